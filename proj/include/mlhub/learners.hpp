#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mlhub/arff.hpp"
#include "mlhub/model.hpp"
#include "mlhub/rng.hpp"

namespace mlhub {

/// Namespace prefix carried by every flow this client creates. Flows from
/// other toolkits are downloadable but not convertible into learners.
inline constexpr std::string_view kFlowPrefix = "mlhub.";
inline constexpr std::string_view kClientVersion = "0.1.0";

struct LearnerSpec {
    std::string name;  // full namespaced name, e.g. "mlhub.classif.forest"
    std::map<std::string, std::string> hyperparameters;
    std::set<std::string> explicit_params;  // names set by the caller (vs. defaults)
    std::string external_version;

    bool operator==(const LearnerSpec& other) const {
        return name == other.name && hyperparameters == other.hyperparameters &&
               external_version == other.external_version;
    }
};

struct LearnerInfo {
    std::string name;        // full namespaced name
    std::string short_name;  // CLI alias, e.g. "forest"
    std::string description;
    std::vector<FlowParameter> parameters;
};

const std::vector<LearnerInfo>& builtin_learners();

/// Lookup by full name or short alias; nullptr when unknown.
const LearnerInfo* find_learner(std::string_view name_or_alias);

/// Spec with all hyperparameters at their registry defaults.
LearnerSpec make_learner(std::string_view name_or_alias);

/// Set one hyperparameter; throws ValidationError on unknown names or values
/// outside the declared range.
void set_hyperparameter(LearnerSpec& spec, const std::string& name, const std::string& value);

/// Flow description for uploading this client's learner (registry defaults,
/// not instance values: concrete values travel with each run).
Flow flow_from_learner(const LearnerSpec& spec);

/// Inverse of flow_from_learner for flows carrying this client's namespace
/// prefix. Foreign flows raise UnsupportedFlowError.
LearnerSpec convert_flow_to_learner(const Flow& flow);

// ---------------------------------------------------------------------------
// Training data

struct FeatureColumn {
    std::string name;
    bool nominal = false;
    std::vector<double> numeric;       // per dataset row (numeric columns)
    std::vector<std::int32_t> level;   // per dataset row (nominal columns)
    std::int32_t n_levels = 0;
};

/// Column-oriented view of a relation for the learners: predictor columns plus
/// an integer-coded nominal target. Built once per dataset; folds select rows.
struct TrainingView {
    std::vector<FeatureColumn> features;
    std::vector<std::int32_t> target;  // class index per row
    std::vector<std::string> classes;  // target levels in declared order
    std::size_t n_rows = 0;
};

/// Throws ValidationError on missing values, string/date predictors or a
/// non-nominal target.
TrainingView build_training_view(const arff::Relation& rel, std::string_view target);

// ---------------------------------------------------------------------------
// Models

struct TreeParams {
    int max_depth = 30;
    int min_split = 20;
    int min_leaf = 7;
    int mtry = 0;  // features sampled per node; 0 = consider all
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 = leaf
    double threshold = 0.0;     // numeric split: value < threshold goes left
    std::int32_t level = -1;    // nominal split: value == level goes left
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    // Leaf payload
    std::int32_t label = 0;
    std::vector<double> class_counts;  // training rows routed to this leaf

    bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
    std::unique_ptr<TreeNode> root;
    std::vector<std::string> classes;
    int depth = 0;  // deepest leaf, root = 0
};

struct EnsembleModel {
    std::vector<TreeModel> members;
    std::vector<std::string> classes;
};

struct MajorityModel {
    std::int32_t label = 0;
    std::vector<double> confidences;  // training class frequencies
    std::vector<std::string> classes;
};

struct Prediction {
    std::int32_t label = 0;
    std::vector<double> confidences;  // class declaration order, sums to 1
};

/// Greedy recursive partitioning minimizing Gini impurity. Split scores are
/// compared with exact integer arithmetic over class counts, so equal-score
/// candidates are true ties resolved by (feature index, threshold/level).
TreeModel train_tree(const TrainingView& view, std::span<const Id> rows, const TreeParams& params,
                     Rng rng);

Prediction predict_tree_row(const TreeModel& model, const TrainingView& view, Id row);
std::vector<Prediction> predict_tree(const TreeModel& model, const TrainingView& view,
                                     std::span<const Id> rows);

/// `iters` bootstrap resamples (size n, with replacement); member m trains
/// from the generator `rng.split(m)` so parallel and serial training agree.
EnsembleModel train_bagging(const TrainingView& view, std::span<const Id> rows,
                            const TreeParams& base, int iters, Rng rng);

/// Majority vote over member labels; confidences are vote shares.
Prediction predict_ensemble_row(const EnsembleModel& model, const TrainingView& view, Id row);
std::vector<Prediction> predict_ensemble(const EnsembleModel& model, const TrainingView& view,
                                         std::span<const Id> rows);

MajorityModel train_majority(const TrainingView& view, std::span<const Id> rows);

/// Any fitted built-in learner, ready to predict.
struct FittedModel {
    std::variant<TreeModel, EnsembleModel, MajorityModel> model;
    std::vector<Prediction> predict(const TrainingView& view, std::span<const Id> rows) const;
};

/// Train `spec` on the given rows. The default mtry for the forest is
/// floor(sqrt(#predictors)); hyperparameter values are validated here against
/// the data (e.g. mtry <= #predictors).
FittedModel fit_learner(const LearnerSpec& spec, const TrainingView& view, std::span<const Id> rows,
                        Rng rng);

}  // namespace mlhub
