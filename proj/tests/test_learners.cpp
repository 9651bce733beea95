#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "mlhub/errors.hpp"
#include "mlhub/learners.hpp"
#include "support/generators.hpp"

using namespace mlhub;
namespace ts = mlhub::testsupport;

namespace {

/// Relation over one numeric column `x` and nominal target `y` in {a,b}.
arff::Relation numeric_column(const std::vector<double>& x, const std::vector<int>& y) {
    arff::Relation rel;
    rel.name = "toy";
    rel.attributes = {{"x", arff::Kind::Numeric, {}, {}},
                      {"y", arff::Kind::Nominal, {"a", "b"}, {}}};
    for (std::size_t i = 0; i < x.size(); ++i) {
        rel.rows.push_back({x[i], arff::NominalValue{y[i]}});
    }
    return rel;
}

std::vector<Id> all_rows(const TrainingView& view) {
    std::vector<Id> rows(view.n_rows);
    std::iota(rows.begin(), rows.end(), Id{0});
    return rows;
}

double holdout_accuracy(const FittedModel& model, const TrainingView& view,
                        const std::vector<Id>& test) {
    const auto preds = model.predict(view, test);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (preds[i].label == view.target[static_cast<std::size_t>(test[i])]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

constexpr TreeParams kUnpruned{30, 2, 1, 0};

}  // namespace

TEST_SUITE("learners") {

TEST_CASE("registry lists the four built-ins with their defaults") {
    const auto& all = builtin_learners();
    REQUIRE(all.size() == 4);

    const LearnerInfo* tree = find_learner("tree");
    REQUIRE(tree != nullptr);
    CHECK(tree->name == "mlhub.classif.tree");
    REQUIRE(tree->parameters.size() == 3);
    CHECK(tree->parameters[0].name == "max_depth");
    CHECK(tree->parameters[0].default_value == "30");
    CHECK(tree->parameters[1].name == "min_split");
    CHECK(tree->parameters[1].default_value == "20");
    CHECK(tree->parameters[2].name == "min_leaf");
    CHECK(tree->parameters[2].default_value == "7");

    const LearnerInfo* bagged = find_learner("bagged_tree");
    REQUIRE(bagged != nullptr);
    REQUIRE(bagged->parameters.size() == 4);
    CHECK(bagged->parameters[0].name == "bw_iters");
    CHECK(bagged->parameters[0].default_value == "10");

    const LearnerInfo* forest = find_learner("mlhub.classif.forest");
    REQUIRE(forest != nullptr);
    CHECK(forest->short_name == "forest");
    REQUIRE(forest->parameters.size() == 2);
    CHECK(forest->parameters[0].name == "ntree");
    CHECK(forest->parameters[0].default_value == "500");
    CHECK(forest->parameters[1].name == "mtry");
    CHECK(forest->parameters[1].default_value == "auto");

    const LearnerInfo* majority = find_learner("majority");
    REQUIRE(majority != nullptr);
    CHECK(majority->parameters.empty());

    CHECK(find_learner("svm") == nullptr);
}

TEST_CASE("make_learner fills defaults and records nothing as explicit") {
    const LearnerSpec spec = make_learner("forest");
    CHECK(spec.name == "mlhub.classif.forest");
    CHECK(spec.external_version == "mlhub_0.1.0");
    CHECK(spec.hyperparameters.at("ntree") == "500");
    CHECK(spec.hyperparameters.at("mtry") == "auto");
    CHECK(spec.explicit_params.empty());
    CHECK_THROWS_AS(make_learner("boosting"), ValidationError);
}

TEST_CASE("set_hyperparameter validates names and ranges") {
    LearnerSpec tree = make_learner("tree");
    set_hyperparameter(tree, "max_depth", "5");
    CHECK(tree.hyperparameters.at("max_depth") == "5");
    CHECK(tree.explicit_params == std::set<std::string>{"max_depth"});

    CHECK_THROWS_AS(set_hyperparameter(tree, "ntree", "10"), ValidationError);
    CHECK_THROWS_AS(set_hyperparameter(tree, "max_depth", "five"), ValidationError);
    CHECK_THROWS_AS(set_hyperparameter(tree, "max_depth", "-1"), ValidationError);
    CHECK_NOTHROW(set_hyperparameter(tree, "max_depth", "0"));
    CHECK_THROWS_AS(set_hyperparameter(tree, "min_split", "1"), ValidationError);
    CHECK_NOTHROW(set_hyperparameter(tree, "min_split", "2"));
    CHECK_THROWS_AS(set_hyperparameter(tree, "min_leaf", "0"), ValidationError);

    LearnerSpec forest = make_learner("forest");
    CHECK_NOTHROW(set_hyperparameter(forest, "mtry", "auto"));
    CHECK_NOTHROW(set_hyperparameter(forest, "mtry", "3"));
    CHECK_THROWS_AS(set_hyperparameter(forest, "mtry", "banana"), ValidationError);
    CHECK_THROWS_AS(set_hyperparameter(forest, "ntree", "0"), ValidationError);
}

TEST_CASE("flow round-trips through the converter") {
    LearnerSpec spec = make_learner("bagged_tree");
    const Flow flow = flow_from_learner(spec);
    CHECK(flow.name == "mlhub.classif.bagged_tree");
    CHECK(flow.external_version == "mlhub_0.1.0");
    CHECK(flow.parameters.size() == 4);
    CHECK(flow.dependencies == std::vector<std::string>{"mlhub 0.1.0"});

    const LearnerSpec back = convert_flow_to_learner(flow);
    CHECK(back.name == spec.name);
    CHECK(back.hyperparameters == spec.hyperparameters);
    CHECK(back.external_version == spec.external_version);
}

TEST_CASE("converter honors flow-declared defaults and rejects foreign flows") {
    Flow flow = flow_from_learner(make_learner("tree"));
    flow.parameters[0].default_value = "5";  // max_depth
    CHECK(convert_flow_to_learner(flow).hyperparameters.at("max_depth") == "5");

    Flow foreign;
    foreign.name = "mlr.classif.rpart";
    foreign.flow_id = 99;
    CHECK_THROWS_AS(convert_flow_to_learner(foreign), UnsupportedFlowError);
}

TEST_CASE("build_training_view lays out columns and rejects bad input") {
    arff::Relation rel;
    rel.name = "mix";
    rel.attributes = {{"n1", arff::Kind::Numeric, {}, {}},
                      {"class", arff::Kind::Nominal, {"x", "y"}, {}},
                      {"c1", arff::Kind::Nominal, {"p", "q", "r"}, {}}};
    rel.rows.push_back({1.5, arff::NominalValue{0}, arff::NominalValue{2}});
    rel.rows.push_back({-2.0, arff::NominalValue{1}, arff::NominalValue{0}});

    const TrainingView view = build_training_view(rel, "class");
    CHECK(view.n_rows == 2);
    CHECK(view.classes == std::vector<std::string>{"x", "y"});
    REQUIRE(view.features.size() == 2);
    CHECK(view.features[0].name == "n1");
    CHECK_FALSE(view.features[0].nominal);
    CHECK(view.features[0].numeric == std::vector<double>{1.5, -2.0});
    CHECK(view.features[1].name == "c1");
    CHECK(view.features[1].nominal);
    CHECK(view.features[1].n_levels == 3);
    CHECK(view.features[1].level == std::vector<std::int32_t>{2, 0});
    CHECK(view.target == std::vector<std::int32_t>{0, 1});

    SUBCASE("unknown target") {
        CHECK_THROWS_AS(build_training_view(rel, "label"), ValidationError);
    }
    SUBCASE("numeric target") {
        CHECK_THROWS_AS(build_training_view(rel, "n1"), ValidationError);
    }
    SUBCASE("missing cell") {
        rel.rows[0][0] = arff::MissingValue{};
        CHECK_THROWS_AS(build_training_view(rel, "class"), ValidationError);
    }
    SUBCASE("string feature") {
        rel.attributes.push_back({"notes", arff::Kind::Text, {}, {}});
        rel.rows[0].push_back(std::string("hi"));
        rel.rows[1].push_back(std::string("ho"));
        CHECK_THROWS_AS(build_training_view(rel, "class"), ValidationError);
    }
}

TEST_CASE("tree finds the hand-computed best numeric split") {
    const arff::Relation rel = numeric_column({1, 2, 3, 4}, {0, 0, 1, 1});
    const TrainingView view = build_training_view(rel, "y");
    const auto rows = all_rows(view);
    const TreeModel model = train_tree(view, rows, kUnpruned, Rng(1));

    REQUIRE(model.root != nullptr);
    REQUIRE_FALSE(model.root->is_leaf());
    CHECK(model.root->feature == 0);
    CHECK(model.root->threshold == 2.5);
    CHECK(model.root->level == -1);
    CHECK(model.depth == 1);
    CHECK(model.root->left->is_leaf());
    CHECK(model.root->left->label == 0);
    CHECK(model.root->right->label == 1);

    // oracle agreement: parent Gini 0.5, both children pure
    CHECK(ts::best_root_gini_decrease(view, rows, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ts::achieved_root_gini_decrease(model, view, rows) ==
          doctest::Approx(0.5).epsilon(1e-12));

    const auto preds = predict_tree(model, view, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(preds[i].label == view.target[i]);
        CHECK(preds[i].confidences[static_cast<std::size_t>(preds[i].label)] == 1.0);
    }
}

TEST_CASE("tree splits a nominal feature on one level versus the rest") {
    arff::Relation rel;
    rel.attributes = {{"color", arff::Kind::Nominal, {"red", "green", "blue"}, {}},
                      {"y", arff::Kind::Nominal, {"a", "b"}, {}}};
    for (const auto& [color, cls] : std::vector<std::pair<int, int>>{
             {0, 0}, {0, 0}, {1, 1}, {2, 1}}) {
        rel.rows.push_back({arff::NominalValue{color}, arff::NominalValue{cls}});
    }
    const TrainingView view = build_training_view(rel, "y");
    const auto rows = all_rows(view);
    const TreeModel model = train_tree(view, rows, kUnpruned, Rng(1));

    REQUIRE_FALSE(model.root->is_leaf());
    CHECK(model.root->feature == 0);
    CHECK(model.root->level == 0);  // red vs the rest
    CHECK(ts::achieved_root_gini_decrease(model, view, rows) == doctest::Approx(0.5));
    const auto preds = predict_tree(model, view, rows);
    CHECK(preds[0].label == 0);
    CHECK(preds[2].label == 1);
    CHECK(preds[3].label == 1);
}

TEST_CASE("exact ties break toward the lower feature, then the lower threshold") {
    SUBCASE("duplicate features") {
        arff::Relation rel;
        rel.attributes = {{"x1", arff::Kind::Numeric, {}, {}},
                          {"x2", arff::Kind::Numeric, {}, {}},
                          {"y", arff::Kind::Nominal, {"a", "b"}, {}}};
        for (int i = 0; i < 4; ++i) {
            const double v = 1.0 + i;
            rel.rows.push_back({v, v, arff::NominalValue{i < 2 ? 0 : 1}});
        }
        const TrainingView view = build_training_view(rel, "y");
        const TreeModel model = train_tree(view, all_rows(view), kUnpruned, Rng(1));
        REQUIRE_FALSE(model.root->is_leaf());
        CHECK(model.root->feature == 0);
    }
    SUBCASE("tied thresholds on one feature") {
        // alternating classes: x<1.5 and x<3.5 are equally good; 1.5 must win
        const arff::Relation rel = numeric_column({1, 2, 3, 4}, {0, 1, 0, 1});
        const TrainingView view = build_training_view(rel, "y");
        const TreeModel model = train_tree(view, all_rows(view), kUnpruned, Rng(1));
        REQUIRE_FALSE(model.root->is_leaf());
        CHECK(model.root->threshold == 1.5);
    }
}

TEST_CASE("root split matches the exhaustive-search oracle on random small tables") {
    for (std::uint64_t trial = 0; trial < 400; ++trial) {
        CAPTURE(trial);
        Rng rng(100000 + trial);
        const std::size_t n_rows = 2 + rng.bounded(7);   // 2..8
        const std::size_t n_feat = 1 + rng.bounded(3);   // 1..3

        arff::Relation rel;
        rel.name = "grid";
        for (std::size_t f = 0; f < n_feat; ++f) {
            if (rng.bounded(2) == 0) {
                rel.attributes.push_back(
                    {"n" + std::to_string(f), arff::Kind::Numeric, {}, {}});
            } else {
                rel.attributes.push_back(
                    {"c" + std::to_string(f), arff::Kind::Nominal, {"u", "v", "w"}, {}});
            }
        }
        rel.attributes.push_back({"y", arff::Kind::Nominal, {"a", "b"}, {}});
        for (std::size_t r = 0; r < n_rows; ++r) {
            std::vector<arff::Value> row;
            for (std::size_t f = 0; f < n_feat; ++f) {
                if (rel.attributes[f].kind == arff::Kind::Numeric) {
                    row.emplace_back(static_cast<double>(rng.bounded(3)));  // three values
                } else {
                    row.emplace_back(arff::NominalValue{static_cast<std::int32_t>(rng.bounded(3))});
                }
            }
            row.emplace_back(arff::NominalValue{static_cast<std::int32_t>(rng.bounded(2))});
            rel.rows.push_back(std::move(row));
        }

        const TrainingView view = build_training_view(rel, "y");
        const auto rows = all_rows(view);
        const TreeModel model = train_tree(view, rows, kUnpruned, Rng(trial));
        const double oracle = ts::best_root_gini_decrease(view, rows, kUnpruned.min_leaf);

        if (model.root->is_leaf()) {
            // only a pure node or a node with no admissible candidate stays a leaf
            const bool pure = [&] {
                for (std::size_t i = 1; i < rows.size(); ++i) {
                    if (view.target[static_cast<std::size_t>(rows[i])] !=
                        view.target[static_cast<std::size_t>(rows[0])]) {
                        return false;
                    }
                }
                return true;
            }();
            CHECK((pure || oracle < 0));
        } else {
            const double achieved = ts::achieved_root_gini_decrease(model, view, rows);
            CHECK(achieved == doctest::Approx(oracle).epsilon(1e-12));
        }
    }
}

TEST_CASE("max_depth and min_split prune the tree") {
    const arff::Relation rel = numeric_column({1, 2, 3, 4, 5, 6, 7, 8},
                                              {0, 0, 0, 0, 1, 1, 1, 1});
    const TrainingView view = build_training_view(rel, "y");
    const auto rows = all_rows(view);

    TreeParams depth0 = kUnpruned;
    depth0.max_depth = 0;
    const TreeModel stump = train_tree(view, rows, depth0, Rng(1));
    CHECK(stump.root->is_leaf());
    CHECK(stump.depth == 0);

    TreeParams strict = kUnpruned;
    strict.min_split = 9;  // more than the 8 rows available
    CHECK(train_tree(view, rows, strict, Rng(1)).root->is_leaf());

    TreeParams leafy = kUnpruned;
    leafy.min_leaf = 5;  // no split can give both children 5 rows
    CHECK(train_tree(view, rows, leafy, Rng(1)).root->is_leaf());

    CHECK_FALSE(train_tree(view, rows, kUnpruned, Rng(1)).root->is_leaf());
}

TEST_CASE("majority baseline counts classes and breaks ties by declaration order") {
    const arff::Relation rel = numeric_column({1, 2, 3, 4, 5}, {1, 1, 1, 0, 0});
    const TrainingView view = build_training_view(rel, "y");
    const MajorityModel model = train_majority(view, all_rows(view));
    CHECK(model.label == 1);
    CHECK(model.confidences == std::vector<double>{0.4, 0.6});

    // tie: equal counts -> first declared class
    const arff::Relation tie = numeric_column({1, 2, 3, 4}, {1, 0, 1, 0});
    const TrainingView tview = build_training_view(tie, "y");
    CHECK(train_majority(tview, all_rows(tview)).label == 0);

    CHECK_THROWS_AS(train_majority(view, std::vector<Id>{}), ValidationError);
}

TEST_CASE("ensemble votes are tallied into confidences") {
    const arff::Relation rel = numeric_column({1, 2}, {0, 1});
    const TrainingView view = build_training_view(rel, "y");

    auto leaf_tree = [&](std::int32_t label) {
        TreeModel t;
        t.classes = view.classes;
        t.root = std::make_unique<TreeNode>();
        t.root->label = label;
        t.root->class_counts = {label == 0 ? 1.0 : 0.0, label == 1 ? 1.0 : 0.0};
        return t;
    };

    EnsembleModel em;
    em.classes = view.classes;
    em.members.push_back(leaf_tree(0));
    em.members.push_back(leaf_tree(1));
    em.members.push_back(leaf_tree(1));
    em.members.push_back(leaf_tree(1));

    const Prediction p = predict_ensemble_row(em, view, 0);
    CHECK(p.label == 1);
    CHECK(p.confidences == std::vector<double>{0.25, 0.75});

    // 1-1 tie goes to the first declared class
    em.members.pop_back();
    em.members.pop_back();
    const Prediction t = predict_ensemble_row(em, view, 0);
    CHECK(t.label == 0);
    CHECK(t.confidences == std::vector<double>{0.5, 0.5});
}

TEST_CASE("bagging members depend only on their stream index") {
    const arff::Relation rel =
        ts::gaussian_two_class(120, 4, 2, 1.0, /*seed=*/77);
    const TrainingView view = build_training_view(rel, "class");
    const auto rows = all_rows(view);

    const EnsembleModel wide = train_bagging(view, rows, kUnpruned, 5, Rng(99));
    const EnsembleModel narrow = train_bagging(view, rows, kUnpruned, 2, Rng(99));

    // the first two members of both ensembles are the same trees
    for (std::size_t m = 0; m < narrow.members.size(); ++m) {
        const auto a = predict_tree(wide.members[m], view, rows);
        const auto b = predict_tree(narrow.members[m], view, rows);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].label == b[i].label);
        }
    }
    CHECK_THROWS_AS(train_bagging(view, rows, kUnpruned, 0, Rng(1)), ValidationError);
}

TEST_CASE("fit_learner maps specs to models and validates mtry against the data") {
    const arff::Relation rel = ts::gaussian_two_class(90, 9, 3, 1.0, /*seed=*/5);
    const TrainingView view = build_training_view(rel, "class");
    const auto rows = all_rows(view);

    LearnerSpec tree = make_learner("tree");
    CHECK(std::holds_alternative<TreeModel>(fit_learner(tree, view, rows, Rng(3)).model));

    LearnerSpec bagged = make_learner("bagged_tree");
    set_hyperparameter(bagged, "bw_iters", "4");
    const FittedModel fb = fit_learner(bagged, view, rows, Rng(3));
    CHECK(std::get<EnsembleModel>(fb.model).members.size() == 4);

    LearnerSpec forest = make_learner("forest");
    set_hyperparameter(forest, "ntree", "7");
    const FittedModel ff = fit_learner(forest, view, rows, Rng(3));
    CHECK(std::get<EnsembleModel>(ff.model).members.size() == 7);

    set_hyperparameter(forest, "mtry", "10");  // only 9 predictors
    CHECK_THROWS_AS(fit_learner(forest, view, rows, Rng(3)), ValidationError);

    LearnerSpec majority = make_learner("majority");
    CHECK(std::holds_alternative<MajorityModel>(fit_learner(majority, view, rows, Rng(3)).model));

    LearnerSpec bogus;
    bogus.name = "mlhub.classif.mystery";
    CHECK_THROWS_AS(fit_learner(bogus, view, rows, Rng(3)), ValidationError);
}

TEST_CASE("every learner emits normalized confidences matching its label") {
    const arff::Relation rel = ts::gaussian_two_class(150, 5, 2, 0.8, /*seed=*/21);
    const TrainingView view = build_training_view(rel, "class");
    std::vector<Id> train, test;
    for (Id r = 0; r < static_cast<Id>(view.n_rows); ++r) {
        (r < 100 ? train : test).push_back(r);
    }

    for (const char* name : {"tree", "bagged_tree", "forest", "majority"}) {
        CAPTURE(name);
        LearnerSpec spec = make_learner(name);
        if (spec.hyperparameters.count("ntree")) set_hyperparameter(spec, "ntree", "15");
        const FittedModel model = fit_learner(spec, view, train, Rng(8));
        for (const Prediction& p : model.predict(view, test)) {
            REQUIRE(p.confidences.size() == 2);
            double sum = 0.0;
            std::size_t argmax = 0;
            for (std::size_t k = 0; k < p.confidences.size(); ++k) {
                CHECK(p.confidences[k] >= 0.0);
                sum += p.confidences[k];
                if (p.confidences[k] > p.confidences[argmax]) argmax = k;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(p.confidences[static_cast<std::size_t>(p.label)] >=
                  p.confidences[argmax] - 1e-12);
        }
    }
}

TEST_CASE("ensembles beat single trees on most noisy synthetic datasets") {
    int forest_wins = 0;
    const int datasets = 20;
    for (int d = 0; d < datasets; ++d) {
        const arff::Relation rel =
            ts::gaussian_two_class(240, 6, 2, 1.0, /*seed=*/4000 + static_cast<std::uint64_t>(d));
        const TrainingView view = build_training_view(rel, "class");
        std::vector<Id> train, test;
        for (Id r = 0; r < static_cast<Id>(view.n_rows); ++r) {
            (r < 168 ? train : test).push_back(r);
        }
        LearnerSpec forest = make_learner("forest");
        set_hyperparameter(forest, "ntree", "25");
        const double facc =
            holdout_accuracy(fit_learner(forest, view, train, Rng(500 + d)), view, test);
        const double tacc =
            holdout_accuracy(fit_learner(make_learner("tree"), view, train, Rng(500 + d)), view,
                             test);
        if (facc >= tacc) ++forest_wins;
    }
    // deterministic given the fixed seeds; the margin is wide on purpose
    CHECK(forest_wins >= 14);
}

}  // TEST_SUITE("learners")
