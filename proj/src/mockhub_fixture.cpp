#include <cmath>
#include <numbers>

#include "mlhub/arff.hpp"
#include "mlhub/learners.hpp"
#include "mlhub/mockhub.hpp"
#include "mlhub/rng.hpp"
#include "mlhub/runner.hpp"
#include "mlhub/wire.hpp"

namespace mlhub {

namespace {

constexpr Id kFixtureUser = 348;
constexpr const char* kFixtureDate = "2014-04-06T23:19:24";

double normal(Rng& rng) {
    double u1 = 1.0 - rng.uniform01();  // (0, 1]
    double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Two-class Gaussian data: the first `n_informative` features shift their
/// mean with the class (alternating sign), the rest are pure noise.
arff::Relation make_numeric_relation(const std::string& name, std::size_t n_rows,
                                     std::size_t n_features, std::size_t n_informative,
                                     double effect, double pos_frac,
                                     const std::string& target_name,
                                     const std::string& neg_label, const std::string& pos_label,
                                     std::uint64_t seed) {
    Rng rng(seed);
    arff::Relation rel;
    rel.name = name;
    for (std::size_t f = 0; f < n_features; ++f) {
        rel.attributes.push_back({"V" + std::to_string(f + 1), arff::Kind::Numeric, {}, ""});
    }
    rel.attributes.push_back({target_name, arff::Kind::Nominal, {neg_label, pos_label}, ""});

    rel.rows.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        bool positive = rng.uniform01() < pos_frac;
        std::vector<arff::Value> row;
        row.reserve(n_features + 1);
        for (std::size_t f = 0; f < n_features; ++f) {
            double mean = 0.0;
            if (f < n_informative) {
                double sign = (f % 2 == 0) ? 1.0 : -1.0;
                mean = sign * (positive ? effect : -effect);
            }
            row.emplace_back(mean + normal(rng));
        }
        row.emplace_back(arff::NominalValue{positive ? 1 : 0});
        rel.rows.push_back(std::move(row));
    }
    return rel;
}

/// 3x3 board with cells in {b, o, x} and a noisy rule over a few cells, so
/// the label is learnable from nominal splits.
arff::Relation make_board_relation(const std::string& name, std::size_t n_rows,
                                   std::uint64_t seed) {
    Rng rng(seed);
    arff::Relation rel;
    rel.name = name;
    const std::vector<std::string> cells = {"b", "o", "x"};
    for (std::size_t f = 0; f < 9; ++f) {
        rel.attributes.push_back({"square" + std::to_string(f + 1), arff::Kind::Nominal, cells, ""});
    }
    rel.attributes.push_back({"Class", arff::Kind::Nominal, {"negative", "positive"}, ""});

    rel.rows.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::vector<std::int32_t> board(9);
        for (auto& c : board) c = static_cast<std::int32_t>(rng.bounded(3));
        int score = 0;
        if (board[4] == 2) score += 2;  // center x
        if (board[0] == 2) score += 1;  // corner x
        if (board[8] == 2) score += 1;
        if (board[2] == 1) score += 1;  // corner o
        bool positive = score >= 2;
        if (rng.uniform01() < 0.1) positive = !positive;  // label noise

        std::vector<arff::Value> row;
        row.reserve(10);
        for (std::int32_t c : board) row.emplace_back(arff::NominalValue{c});
        row.emplace_back(arff::NominalValue{positive ? 1 : 0});
        rel.rows.push_back(std::move(row));
    }
    return rel;
}

void inject_missing(arff::Relation& rel, std::size_t count, std::size_t column,
                    std::size_t stride) {
    for (std::size_t i = 0; i < count; ++i) {
        rel.rows[(i * stride) % rel.n_rows()][column] = arff::MissingValue{};
    }
}

std::vector<std::int32_t> target_labels(const arff::Relation& rel, const std::string& target) {
    std::size_t col = static_cast<std::size_t>(rel.attribute_index(target));
    std::vector<std::int32_t> labels;
    labels.reserve(rel.n_rows());
    for (const auto& row : rel.rows) {
        labels.push_back(std::get<arff::NominalValue>(row[col]).index);
    }
    return labels;
}

struct FixtureDataset {
    Id id;
    arff::Relation relation;
    std::string target;
    bool tagged_uci;
};

void add_dataset(HubState& state, FixtureDataset fd) {
    DataSetDescription desc;
    desc.data_id = fd.id;
    desc.name = fd.relation.name;
    desc.version = 1;
    desc.status = DataStatus::Active;
    desc.default_target_attribute = fd.target;
    desc.licence = "Public";
    desc.format = "ARFF";
    desc.upload_date = kFixtureDate;
    desc.uploader = kFixtureUser;
    if (fd.tagged_uci) {
        desc.tags.insert("uci");
        state.tag_records.push_back({"data", fd.id, "uci", kFixtureUser});
    }
    desc.qualities = compute_data_qualities(fd.relation, fd.target);

    HubDataset ds;
    ds.desc = std::move(desc);
    ds.arff_text = arff::write(fd.relation);
    state.datasets.emplace(fd.id, std::move(ds));
}

void add_task(HubState& state, Id task_id, Id data_id, const arff::Relation& rel,
              const std::string& target) {
    Task task;
    task.task_id = task_id;
    task.task_type = TaskType::SupervisedClassification;
    task.data_id = data_id;
    task.target_feature = target;
    task.estimation_procedure = state.estimation_procedures.front();
    task.evaluation_measure = "predictive_accuracy";
    task.splits = make_cv_splits(rel.n_rows(), target_labels(rel, target),
                                 task.estimation_procedure.folds,
                                 task.estimation_procedure.repeats,
                                 task.estimation_procedure.stratified,
                                 1000 + static_cast<std::uint64_t>(task_id));
    state.tasks.emplace(task_id, std::move(task));
}

}  // namespace

HubState build_default_fixture(const FixtureOptions& opts) {
    HubState state;
    state.users = {
        {kFixtureUser, kReadOnlyApiKey, false},
        {1001, kWriterApiKey, true},
        {1002, kSecondWriterApiKey, true},
    };
    EstimationProcedure ten_fold;
    ten_fold.ep_id = 1;
    ten_fold.folds = 10;
    ten_fold.repeats = 1;
    ten_fold.stratified = true;
    state.estimation_procedures = {ten_fold};
    state.evaluation_measures = {"predictive_accuracy", "area_under_roc_curve"};

    // Datasets with the published shapes (instances x features incl. target).
    arff::Relation breast_w = make_numeric_relation("breast-w", 699, 9, 5, 0.9, 0.345, "Class",
                                                    "benign", "malignant", 9015);
    inject_missing(breast_w, 16, 5, 43);  // 16 missing cells, like the original
    arff::Relation diabetes = make_numeric_relation("diabetes", 768, 8, 5, 0.55, 0.35, "class",
                                                    "tested_negative", "tested_positive", 9038);
    arff::Relation sonar = make_numeric_relation("sonar", 208, 60, 8, 0.5, 0.47, "Class", "Rock",
                                                 "Mine", 9040);
    arff::Relation haberman = make_numeric_relation("haberman", 306, 3, 2, 0.6, 0.26, "Class",
                                                    "survived", "died", 9043);
    arff::Relation tictactoe = make_board_relation("tic-tac-toe", 958, 9050);
    arff::Relation heart = make_numeric_relation("heart-statlog", 270, 13, 6, 0.5, 0.44, "class",
                                                 "absent", "present", 9053);
    arff::Relation ionosphere = make_numeric_relation("ionosphere", 351, 34, 6, 0.6, 0.64,
                                                      "class", "b", "g", 9059);
    arff::Relation pending = make_numeric_relation("pending-synthetic", 40, 3, 2, 0.5, 0.5,
                                                   "class", "no", "yes", 9090);

    add_dataset(state, {15, breast_w, "Class", true});
    add_dataset(state, {38, diabetes, "class", true});
    add_dataset(state, {40, sonar, "Class", true});
    add_dataset(state, {43, haberman, "Class", true});
    add_dataset(state, {50, tictactoe, "Class", true});
    add_dataset(state, {53, heart, "class", true});
    add_dataset(state, {59, ionosphere, "class", true});
    add_dataset(state, {90, pending, "class", false});
    state.datasets.at(90).desc.status = DataStatus::InPreparation;
    state.datasets.at(90).desc.uploader = 1001;

    add_task(state, 1, 15, breast_w, "Class");
    add_task(state, 37, 38, diabetes, "class");
    add_task(state, 39, 40, sonar, "Class");
    add_task(state, 42, 43, haberman, "Class");
    add_task(state, 49, 50, tictactoe, "Class");
    add_task(state, 52, 53, heart, "class");
    add_task(state, 57, 59, ionosphere, "class");

    // A flow from another toolkit: downloadable, but not convertible into a
    // built-in learner.
    Flow foreign;
    foreign.flow_id = 4782;
    foreign.name = "mlr.classif.randomForest";
    foreign.version = 17;
    foreign.external_version = "R_3.1.1-734c037";
    foreign.description = "Random forest learner wrapped from the randomForest package.";
    foreign.parameters = {
        {"ntree", "integer", "500"},
        {"mtry", "integer", ""},
        {"nodesize", "integer", "1"},
    };
    foreign.dependencies = {"mlr_2.2", "randomForest_4.6"};
    foreign.uploader = kFixtureUser;
    state.flows.emplace(foreign.flow_id, std::move(foreign));

    if (opts.include_reference_run) {
        // A pre-existing run on task 42, produced by the built-in forest.
        LearnerSpec spec = make_learner("forest");
        set_hyperparameter(spec, "ntree", "50");
        set_hyperparameter(spec, "mtry", "2");
        DataSet ds;
        ds.desc = state.datasets.at(43).desc;
        ds.relation = haberman;
        Run reference = run_task(state.tasks.at(42), ds, spec, 42042);
        reference.run_id = 1816245;
        reference.flow_id = 4782;
        reference.uploader = kFixtureUser;
        reference.tags = {"study_30"};
        state.tag_records.push_back({"run", 1816245, "study_30", kFixtureUser});

        const auto& classes =
            haberman.attributes[static_cast<std::size_t>(haberman.attribute_index("Class"))]
                .levels;
        HubRun hr;
        hr.predictions_arff = arff::write(
            wire::predictions_to_arff(reference.predictions, classes, "run_1816245_predictions"));
        hr.run = std::move(reference);
        state.runs.emplace(1816245, std::move(hr));
    }

    state.next_data_id = 91;
    state.next_task_id = 58;
    state.next_flow_id = 4783;
    state.next_run_id = 1816246;
    return state;
}

}  // namespace mlhub
