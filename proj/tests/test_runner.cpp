#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "mlhub/errors.hpp"
#include "mlhub/runner.hpp"
#include "support/generators.hpp"

using namespace mlhub;
namespace ts = mlhub::testsupport;

namespace {

/// Fold sizes of one repeat, over the test sets.
std::vector<std::size_t> fold_sizes(const std::vector<FoldSplit>& repeat) {
    std::vector<std::size_t> sizes;
    for (const auto& fold : repeat) sizes.push_back(fold.test.size());
    return sizes;
}

/// Assert one repeat partitions 0..n-1: disjoint test folds covering all rows,
/// train always the exact complement.
void check_partition(const std::vector<FoldSplit>& repeat, std::size_t n) {
    std::set<Id> seen;
    for (const auto& fold : repeat) {
        for (Id id : fold.test) {
            CHECK(id >= 0);
            CHECK(id < static_cast<Id>(n));
            CHECK(seen.insert(id).second);  // no id in two test folds
        }
        CHECK(fold.train.size() + fold.test.size() == n);
        std::set<Id> train(fold.train.begin(), fold.train.end());
        CHECK(train.size() == fold.train.size());
        for (Id id : fold.test) CHECK(train.count(id) == 0);
    }
    CHECK(seen.size() == n);
}

DataSet make_dataset(const arff::Relation& rel, Id data_id, const std::string& target) {
    DataSet ds;
    ds.desc.data_id = data_id;
    ds.desc.name = rel.name.empty() ? "synthetic" : rel.name;
    ds.desc.default_target_attribute = target;
    ds.relation = rel;
    ds.target_index = rel.attribute_index(target);
    return ds;
}

Task make_task(Id task_id, const DataSet& ds, int folds, bool stratified, std::uint64_t seed) {
    Task t;
    t.task_id = task_id;
    t.data_id = ds.desc.data_id;
    t.target_feature = ds.desc.default_target_attribute;
    t.estimation_procedure.folds = folds;
    t.estimation_procedure.repeats = 1;
    t.estimation_procedure.stratified = stratified;
    const TrainingView view = build_training_view(ds.relation, t.target_feature);
    t.splits = make_cv_splits(view.n_rows, view.target, folds, 1, stratified, seed);
    return t;
}

/// 100-row two-class dataset with exactly 60 "A" rows and 40 "B" rows.
arff::Relation sixty_forty() {
    arff::Relation rel;
    rel.name = "sixty_forty";
    rel.attributes = {{"x", arff::Kind::Numeric, {}, {}},
                      {"class", arff::Kind::Nominal, {"A", "B"}, {}}};
    for (int i = 0; i < 100; ++i) {
        rel.rows.push_back({static_cast<double>(i), arff::NominalValue{i < 60 ? 0 : 1}});
    }
    return rel;
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("unstratified folds differ in size by at most one") {
    const Splits splits = make_cv_splits(768, {}, 10, 1, false, 7);
    REQUIRE(splits.size() == 1);
    REQUIRE(splits[0].size() == 10);
    check_partition(splits[0], 768);

    std::vector<std::size_t> sizes = fold_sizes(splits[0]);
    std::multiset<std::size_t> bag(sizes.begin(), sizes.end());
    CHECK(bag == std::multiset<std::size_t>{77, 77, 77, 77, 77, 77, 77, 77, 76, 76});
}

TEST_CASE("stratified folds balance every class") {
    std::vector<std::int32_t> labels(100);
    for (std::size_t i = 0; i < 100; ++i) labels[i] = i < 60 ? 0 : 1;

    const Splits splits = make_cv_splits(100, labels, 10, 1, true, 3);
    check_partition(splits[0], 100);
    for (const auto& fold : splits[0]) {
        std::size_t a = 0, b = 0;
        for (Id id : fold.test) (labels[static_cast<std::size_t>(id)] == 0 ? a : b)++;
        CHECK(a == 6);
        CHECK(b == 4);
    }
}

TEST_CASE("stratified dealing keeps per-class spread at one even when nothing divides") {
    std::vector<std::int32_t> labels = {0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1};  // 7 + 5
    const Splits splits = make_cv_splits(12, labels, 3, 1, true, 11);
    check_partition(splits[0], 12);

    for (std::int32_t cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> per_fold;
        for (const auto& fold : splits[0]) {
            per_fold.push_back(static_cast<std::size_t>(
                std::count_if(fold.test.begin(), fold.test.end(), [&](Id id) {
                    return labels[static_cast<std::size_t>(id)] == cls;
                })));
        }
        const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
        CHECK(*hi - *lo <= 1);
    }
    const auto sizes = fold_sizes(splits[0]);
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
}

TEST_CASE("splits are deterministic in the seed and vary across repeats") {
    std::vector<std::int32_t> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<std::int32_t>(i % 2);

    const Splits a = make_cv_splits(40, labels, 5, 2, true, 42);
    const Splits b = make_cv_splits(40, labels, 5, 2, true, 42);
    CHECK(a == b);

    const Splits c = make_cv_splits(40, labels, 5, 2, true, 43);
    CHECK(a != c);

    REQUIRE(a.size() == 2);
    check_partition(a[0], 40);
    check_partition(a[1], 40);
    CHECK(a[0] != a[1]);  // repeats reshuffle
}

TEST_CASE("split argument validation") {
    CHECK_THROWS_AS(make_cv_splits(10, {}, 1, 1, false, 1), ValidationError);
    CHECK_THROWS_AS(make_cv_splits(10, {}, 2, 0, false, 1), ValidationError);
    CHECK_THROWS_AS(make_cv_splits(3, {}, 5, 1, false, 1), ValidationError);
    std::vector<std::int32_t> labels = {0, 1};
    CHECK_THROWS_AS(make_cv_splits(10, labels, 2, 1, true, 1), ValidationError);
}

TEST_CASE("rank AUC equals hand-computed values") {
    CHECK(auc_rank_statistic(std::vector<double>{0.9, 0.8, 0.2, 0.1},
                             {true, true, false, false}) == 1.0);
    CHECK(auc_rank_statistic(std::vector<double>{0.1, 0.2, 0.8, 0.9},
                             {true, true, false, false}) == 0.0);
    CHECK(auc_rank_statistic(std::vector<double>{0.5, 0.5, 0.5, 0.5},
                             {true, false, true, false}) == 0.5);
    // one correctly ranked pair, one swapped pair, two clean wins: 3/4
    CHECK(auc_rank_statistic(std::vector<double>{0.1, 0.4, 0.35, 0.8},
                             {false, true, false, true}) == doctest::Approx(0.75));
    // tie between a positive and a negative counts half
    CHECK(auc_rank_statistic(std::vector<double>{0.5, 0.5, 0.3},
                             {true, false, false}) == doctest::Approx(0.75));

    CHECK_THROWS_AS(auc_rank_statistic(std::vector<double>{0.5, 0.6}, {true, true}),
                    ValidationError);
    CHECK_THROWS_AS(auc_rank_statistic(std::vector<double>{0.5}, {true, false}),
                    ValidationError);
}

TEST_CASE("rank AUC equals the exhaustive pairwise statistic on random inputs") {
    const double grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (std::uint64_t trial = 0; trial < 300; ++trial) {
        CAPTURE(trial);
        Rng rng(9000 + trial);
        const std::size_t n = 2 + rng.bounded(29);
        std::vector<double> scores;
        std::vector<bool> labels;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(grid[rng.bounded(5)]);
            labels.push_back(rng.bounded(2) == 1);
        }
        labels[0] = true;  // guarantee both classes
        labels[n - 1] = false;
        const double fast = auc_rank_statistic(scores, labels);
        const double slow = ts::pairwise_auc(scores, labels);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
}

TEST_CASE("evaluate_predictions computes per-fold accuracy and binary AUC") {
    Task task;
    task.task_id = 1;
    task.estimation_procedure.folds = 2;
    task.estimation_procedure.repeats = 1;

    auto row = [](int fold, Id id, const char* pred, const char* truth, double p_pos) {
        PredictionRow r;
        r.fold = fold;
        r.row_id = id;
        r.predicted = pred;
        r.truth = truth;
        r.confidences = {{"neg", 1.0 - p_pos}, {"pos", p_pos}};
        return r;
    };
    // fold 0: 3 of 4 correct; fold 1: 1 of 2 correct
    std::vector<PredictionRow> preds = {
        row(0, 0, "pos", "pos", 0.9), row(0, 1, "pos", "pos", 0.8),
        row(0, 2, "neg", "neg", 0.3), row(0, 3, "neg", "pos", 0.2),
        row(1, 4, "pos", "pos", 0.7), row(1, 5, "pos", "neg", 0.6),
    };

    const auto evals = evaluate_predictions(preds, task);
    REQUIRE(evals.count("predictive_accuracy") == 1);
    const MeasureValues& acc = evals.at("predictive_accuracy");
    CHECK(acc.per_fold == std::vector<double>{0.75, 0.5});
    CHECK(acc.aggregate == doctest::Approx(0.625));

    REQUIRE(evals.count("area_under_roc_curve") == 1);
    const MeasureValues& auc = evals.at("area_under_roc_curve");
    // fold 0: positives {0.9, 0.8, 0.2} vs negative {0.3} -> 2/3 of pairs win
    CHECK(auc.per_fold[0] == doctest::Approx(2.0 / 3.0));
    // fold 1: positive 0.7 above negative 0.6
    CHECK(auc.per_fold[1] == doctest::Approx(1.0));

    SUBCASE("AUC is omitted when a fold lacks a class") {
        preds[5] = row(1, 5, "pos", "pos", 0.6);  // fold 1 now all-positive
        const auto partial = evaluate_predictions(preds, task);
        CHECK(partial.count("predictive_accuracy") == 1);
        CHECK(partial.count("area_under_roc_curve") == 0);
        CHECK_THROWS_AS(evaluate_single_measure(preds, task, "area_under_roc_curve"),
                        ValidationError);
    }
    SUBCASE("single-measure lookups") {
        CHECK(evaluate_single_measure(preds, task, "predictive_accuracy").aggregate ==
              doctest::Approx(0.625));
        CHECK(evaluate_single_measure(preds, task, "area_under_roc_curve").per_fold.size() == 2);
        CHECK_THROWS_AS(evaluate_single_measure(preds, task, "f1"), ValidationError);
    }
    SUBCASE("rows without confidences still yield accuracy") {
        for (auto& p : preds) p.confidences.clear();
        const auto bare = evaluate_predictions(preds, task);
        CHECK(bare.count("predictive_accuracy") == 1);
        CHECK(bare.count("area_under_roc_curve") == 0);
        CHECK_THROWS_AS(evaluate_single_measure(preds, task, "area_under_roc_curve"),
                        ValidationError);
    }
    SUBCASE("structural failures throw") {
        CHECK_THROWS_AS(evaluate_predictions(std::vector<PredictionRow>{}, task),
                        ValidationError);
        std::vector<PredictionRow> one_fold(preds.begin(), preds.begin() + 4);
        CHECK_THROWS_AS(evaluate_predictions(one_fold, task), ValidationError);
        preds[0].fold = 7;
        CHECK_THROWS_AS(evaluate_predictions(preds, task), ValidationError);
        preds[0].fold = 0;
        preds[0].truth = "maybe";
        CHECK_THROWS_AS(evaluate_predictions(preds, task), ValidationError);
    }
}

TEST_CASE("AUC on more than two classes is rejected, not silently computed") {
    Task task;
    task.estimation_procedure.folds = 2;
    std::vector<PredictionRow> preds;
    const char* names[] = {"a", "b", "c"};
    for (int fold = 0; fold < 2; ++fold) {
        for (int i = 0; i < 3; ++i) {
            PredictionRow r;
            r.fold = fold;
            r.row_id = fold * 3 + i;
            r.predicted = names[i];
            r.truth = names[i];
            r.confidences = {{"a", i == 0 ? 1.0 : 0.0},
                             {"b", i == 1 ? 1.0 : 0.0},
                             {"c", i == 2 ? 1.0 : 0.0}};
            preds.push_back(r);
        }
    }
    CHECK(evaluate_predictions(preds, task).count("area_under_roc_curve") == 0);
    CHECK_THROWS_AS(evaluate_single_measure(preds, task, "area_under_roc_curve"),
                    ValidationError);
}

TEST_CASE("run_task produces a complete, deterministic, self-evaluated run") {
    const DataSet ds = make_dataset(sixty_forty(), 31, "class");
    const Task task = make_task(201, ds, 10, true, 555);
    CHECK(validate(task).empty());

    const Run run = run_task(task, ds, make_learner("majority"), 42);

    CHECK(run.run_id == 0);
    CHECK(run.task_id == 201);
    CHECK(run.parameter_settings.empty());
    REQUIRE(run.seed_settings.size() == 2);
    CHECK(run.seed_settings[0] == std::pair<std::string, std::string>{"generator", "splitmix64"});
    CHECK(run.seed_settings[1] == std::pair<std::string, std::string>{"seed", "42"});
    CHECK(run.predictions.size() == 100);
    CHECK(validate(run, task).empty());

    // majority always predicts "A"; every stratified fold holds 6 A of 10
    const MeasureValues& acc = run.evaluations.at("predictive_accuracy");
    REQUIRE(acc.per_fold.size() == 10);
    for (double f : acc.per_fold) CHECK(f == doctest::Approx(0.6));
    CHECK(acc.aggregate == doctest::Approx(0.6));
    // constant scores: every fold's AUC is exactly one half
    CHECK(run.evaluations.at("area_under_roc_curve").aggregate == doctest::Approx(0.5));

    CHECK(run_task(task, ds, make_learner("majority"), 42) == run);
    CHECK(run_task(task, ds, make_learner("majority"), 43) != run);
}

TEST_CASE("run_task records parameters with their defaulted flags") {
    const DataSet ds = make_dataset(ts::gaussian_two_class(60, 3, 2, 1.2, 99), 32, "class");
    const Task task = make_task(202, ds, 5, true, 556);

    LearnerSpec spec = make_learner("tree");
    set_hyperparameter(spec, "max_depth", "5");
    const Run run = run_task(task, ds, spec, 7);

    REQUIRE(run.parameter_settings.size() == 3);
    CHECK(run.parameter_settings[0] == ParameterSetting{"max_depth", "5", false});
    CHECK(run.parameter_settings[1] == ParameterSetting{"min_split", "20", true});
    CHECK(run.parameter_settings[2] == ParameterSetting{"min_leaf", "7", true});
    CHECK(validate(run, task).empty());
    CHECK(validate(run).empty());  // confidences normalized, argmax consistent

    // locally computed accuracy equals a direct recount of the predictions
    std::map<int, std::pair<int, int>> per_fold;  // fold -> (correct, total)
    for (const auto& p : run.predictions) {
        per_fold[p.fold].second++;
        if (p.predicted == p.truth) per_fold[p.fold].first++;
    }
    const MeasureValues& acc = run.evaluations.at("predictive_accuracy");
    for (const auto& [fold, counts] : per_fold) {
        CHECK(acc.per_fold[static_cast<std::size_t>(fold)] ==
              doctest::Approx(static_cast<double>(counts.first) / counts.second));
    }
}

TEST_CASE("run_task rejects mismatched inputs") {
    const DataSet ds = make_dataset(sixty_forty(), 31, "class");
    const Task task = make_task(201, ds, 10, true, 555);

    DataSet other = ds;
    other.desc.data_id = 77;
    CHECK_THROWS_AS(run_task(task, other, make_learner("majority"), 1), ValidationError);

    Task no_splits = task;
    no_splits.splits.clear();
    CHECK_THROWS_AS(run_task(no_splits, ds, make_learner("majority"), 1), ValidationError);

    LearnerSpec bogus;
    bogus.name = "mlhub.classif.nope";
    CHECK_THROWS_AS(run_task(task, ds, bogus, 1), ValidationError);
}

TEST_CASE("benchmark conversion keys cells by task and learner") {
    const DataSet ds = make_dataset(sixty_forty(), 31, "class");
    const Task t1 = make_task(201, ds, 5, true, 1);
    const Task t2 = make_task(202, ds, 5, true, 2);

    std::vector<RunContext> runs;
    runs.push_back({run_task(t1, ds, make_learner("majority"), 1), "majority", "predictive_accuracy"});
    runs.push_back({run_task(t2, ds, make_learner("majority"), 1), "majority", "predictive_accuracy"});
    runs.push_back({run_task(t1, ds, make_learner("tree"), 1), "tree", "predictive_accuracy"});

    const BenchmarkResult bmr = convert_runs_to_benchmark(runs);
    CHECK(bmr.measure == "predictive_accuracy");
    REQUIRE(bmr.cells.size() == 3);
    const BenchmarkCell& cell = bmr.cells.at({201, "majority"});
    CHECK(cell.fold_values ==
          runs[0].run.evaluations.at("predictive_accuracy").per_fold);
    CHECK(cell.aggregate ==
          runs[0].run.evaluations.at("predictive_accuracy").aggregate);
    CHECK(bmr.missing_cells({201, 202}, {"majority", "tree"}) ==
          std::vector<std::pair<Id, std::string>>{{202, "tree"}});
    CHECK(validate(bmr).empty());

    SUBCASE("duplicate cells are rejected") {
        runs.push_back({runs[0].run, "majority", "predictive_accuracy"});
        CHECK_THROWS_AS(convert_runs_to_benchmark(runs), Error);
    }
    SUBCASE("mixed measures are rejected") {
        runs[2].measure = "area_under_roc_curve";
        CHECK_THROWS_AS(convert_runs_to_benchmark(runs), Error);
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(convert_runs_to_benchmark(std::vector<RunContext>{}), ValidationError);
    }
}

TEST_CASE("data qualities match hand computation") {
    arff::Relation rel = sixty_forty();  // 60 A, 40 B to start
    // knock out 30 B rows' targets to get a 60/10 observed split with misses
    for (int i = 70; i < 100; ++i) rel.rows[static_cast<std::size_t>(i)][1] = arff::MissingValue{};
    rel.rows[0][0] = arff::MissingValue{};  // one feature miss too

    const auto q = compute_data_qualities(rel, "class");
    CHECK(q.at("NumberOfInstances") == 100.0);
    CHECK(q.at("NumberOfFeatures") == 2.0);
    CHECK(q.at("NumberOfNumericFeatures") == 1.0);
    CHECK(q.at("NumberOfSymbolicFeatures") == 1.0);
    CHECK(q.at("NumberOfMissingValues") == 31.0);
    CHECK(q.at("NumberOfClasses") == 2.0);
    CHECK(q.at("MajorityClassSize") == 60.0);
    CHECK(q.at("MinorityClassSize") == 10.0);

    const double p_a = 60.0 / 70.0;
    const double p_b = 10.0 / 70.0;
    const double entropy = -p_a * std::log2(p_a) - p_b * std::log2(p_b);
    CHECK(q.at("ClassEntropy") == doctest::Approx(entropy).epsilon(1e-12));

    // the canonical 70/30 entropy figure
    arff::Relation mix = sixty_forty();
    for (int i = 0; i < 100; ++i) {
        mix.rows[static_cast<std::size_t>(i)][1] = arff::NominalValue{i < 70 ? 0 : 1};
    }
    CHECK(compute_data_qualities(mix, "class").at("ClassEntropy") ==
          doctest::Approx(-0.7 * std::log2(0.7) - 0.3 * std::log2(0.3)).epsilon(1e-12));
}

}  // TEST_SUITE("runner")
