#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mlhub/arff.hpp"

namespace mlhub {

using Id = std::int64_t;

enum class DataStatus {
    Active,
    Deactivated,
    InPreparation,
};

enum class TaskType {
    SupervisedClassification,
};

std::string to_string(DataStatus status);
std::string to_string(TaskType type);
std::optional<DataStatus> data_status_from_string(const std::string& s);
std::optional<TaskType> task_type_from_string(const std::string& s);

struct DataSetDescription {
    Id data_id = 0;
    std::string name;
    int version = 1;
    DataStatus status = DataStatus::Active;
    std::string default_target_attribute;
    std::string licence;
    std::string format = "ARFF";
    std::string upload_date;  // ISO-8601
    Id uploader = 0;
    std::set<std::string> tags;
    std::map<std::string, double> qualities;

    bool operator==(const DataSetDescription&) const = default;
};

struct DataSet {
    DataSetDescription desc;
    arff::Relation relation;
    std::ptrdiff_t target_index = -1;

    bool operator==(const DataSet&) const = default;
};

struct EstimationProcedure {
    enum class Kind { CrossValidation };

    Id ep_id = 0;
    Kind kind = Kind::CrossValidation;
    int folds = 10;
    int repeats = 1;
    bool stratified = true;

    /// Display name used in listings and filters, e.g. "10-fold Crossvalidation".
    std::string name() const;

    bool operator==(const EstimationProcedure&) const = default;
};

struct FoldSplit {
    std::vector<Id> train;
    std::vector<Id> test;

    bool operator==(const FoldSplit&) const = default;
};

/// Indexed splits[repeat][fold]; fold/repeat indices are 0-based everywhere.
using Splits = std::vector<std::vector<FoldSplit>>;

struct Task {
    Id task_id = 0;
    TaskType task_type = TaskType::SupervisedClassification;
    Id data_id = 0;
    std::string target_feature;
    EstimationProcedure estimation_procedure;
    std::string evaluation_measure;
    Splits splits;
    std::set<std::string> tags;

    bool operator==(const Task&) const = default;
};

struct FlowParameter {
    std::string name;
    std::string data_type;
    std::string default_value;

    bool operator==(const FlowParameter&) const = default;
};

struct Flow {
    Id flow_id = 0;
    std::string name;
    int version = 1;
    std::string external_version;
    std::string description;
    std::vector<FlowParameter> parameters;
    std::vector<std::string> dependencies;
    Id uploader = 0;
    std::set<std::string> tags;

    bool operator==(const Flow&) const = default;
};

struct PredictionRow {
    int repeat = 0;
    int fold = 0;
    Id row_id = 0;
    std::string predicted;
    std::string truth;
    /// (class label, probability) in the task's class declaration order.
    /// May be empty: confidences are optional in the validator.
    std::vector<std::pair<std::string, double>> confidences;

    bool operator==(const PredictionRow&) const = default;
};

struct MeasureValues {
    double aggregate = 0.0;
    std::vector<double> per_fold;

    bool operator==(const MeasureValues&) const = default;
};

struct ParameterSetting {
    std::string name;
    std::string value;
    bool defaulted = false;  // true when the value came from the learner default

    bool operator==(const ParameterSetting&) const = default;
};

struct Run {
    Id run_id = 0;  // 0 = not yet uploaded
    Id task_id = 0;
    Id flow_id = 0;
    Id uploader = 0;
    std::vector<ParameterSetting> parameter_settings;
    std::vector<std::pair<std::string, std::string>> seed_settings;
    std::vector<PredictionRow> predictions;
    std::map<std::string, MeasureValues> evaluations;
    std::set<std::string> tags;

    bool operator==(const Run&) const = default;
};

struct BenchmarkCell {
    std::vector<double> fold_values;
    double aggregate = 0.0;

    bool operator==(const BenchmarkCell&) const = default;
};

struct BenchmarkResult {
    std::string measure;
    std::map<std::pair<Id, std::string>, BenchmarkCell> cells;  // (task_id, learner name)

    /// Grid cells absent from `cells` for the given task/learner sets.
    std::vector<std::pair<Id, std::string>> missing_cells(
        const std::vector<Id>& task_ids, const std::vector<std::string>& learners) const;

    bool operator==(const BenchmarkResult&) const = default;
};

/// One broken invariant; violations are data, not exceptions.
struct Violation {
    std::string field;
    std::string rule;
};

std::vector<Violation> validate(const DataSetDescription& desc);
std::vector<Violation> validate(const DataSet& ds);
std::vector<Violation> validate(const EstimationProcedure& ep);
std::vector<Violation> validate(const Task& task);
std::vector<Violation> validate(const Flow& flow);
/// Run checks that need the task: prediction coverage of the test splits.
std::vector<Violation> validate(const Run& run, const Task& task);
/// Run-local checks only (confidence normalization, argmax consistency).
std::vector<Violation> validate(const Run& run);
std::vector<Violation> validate(const BenchmarkResult& bmr);

}  // namespace mlhub
