#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlhub/cache.hpp"
#include "mlhub/config.hpp"
#include "mlhub/learners.hpp"
#include "mlhub/model.hpp"
#include "mlhub/wire.hpp"

namespace mlhub {

/// Listing filters. Ranges are inclusive; an exact value is Range{v, v}.
/// Bounds must be >= 0 and lo <= hi — violated filters throw ValidationError
/// before any request is sent.
struct DataFilter {
    std::optional<std::string> tag;
    std::optional<std::string> status;  // "active" or "deactivated"
    std::optional<wire::Range> number_of_classes;
    std::optional<wire::Range> number_of_instances;
    std::optional<wire::Range> number_of_features;
    std::optional<wire::Range> number_of_missing_values;
    std::optional<long long> limit;
    std::optional<long long> offset;
};

struct TaskFilter {
    std::optional<std::string> task_type;
    std::optional<wire::Range> number_of_classes;
    std::optional<wire::Range> number_of_instances;
    std::optional<wire::Range> number_of_features;
    std::optional<wire::Range> number_of_missing_values;
    std::optional<std::string> data_tag;  // tag on the task's dataset
    std::optional<std::string> tag;       // tag on the task itself
    std::optional<std::string> estimation_procedure;  // e.g. "10-fold Crossvalidation"
    std::optional<long long> limit;
    std::optional<long long> offset;
};

struct RunSelector {
    std::optional<Id> task_id;
    std::optional<Id> flow_id;
    std::optional<Id> uploader;
    std::optional<std::string> tag;
    std::optional<long long> limit;
    std::optional<long long> offset;
};

// Listing rows.
struct DataSetRow {
    Id data_id = 0;
    std::string name;
    int version = 0;
    DataStatus status = DataStatus::Active;
    std::map<std::string, double> qualities;
    std::vector<std::string> tags;
};

struct TaskRow {
    Id task_id = 0;
    TaskType task_type = TaskType::SupervisedClassification;
    Id data_id = 0;
    std::string data_name;
    std::string target_feature;
    std::string estimation_procedure;
    std::string evaluation_measure;
    std::map<std::string, double> qualities;  // of the task's dataset
    std::vector<std::string> tags;
};

struct RunRow {
    Id run_id = 0;
    Id task_id = 0;
    Id flow_id = 0;
    Id uploader = 0;
    std::vector<std::string> tags;
};

struct EvalRow {
    Id run_id = 0;
    Id task_id = 0;
    Id flow_id = 0;
    std::string flow_name;
    int flow_version = 0;
    Id uploader = 0;
    std::map<std::string, MeasureValues> measures;
    std::vector<std::string> tags;
};

struct FlowUploadResult {
    Id flow_id = 0;
    int version = 0;
    bool already_existed = false;
};

/// Trivial accessors mirroring the run-inspection helpers.
inline const std::vector<ParameterSetting>& get_run_parameters(const Run& run) {
    return run.parameter_settings;
}
inline const std::vector<std::pair<std::string, std::string>>& get_run_seeds(const Run& run) {
    return run.seed_settings;
}

/// Hub client. Entity downloads consult the on-disk cache first; listings are
/// never cached (their filter space is unbounded). GET requests are retried
/// up to twice on transport errors; writes are never retried. A Client is
/// shareable across threads (each request uses its own connection and the
/// cache writes atomically).
class Client {
public:
    explicit Client(Config config);

    const Config& config() const { return config_; }
    Cache& cache() { return cache_; }

    // --- listings -------------------------------------------------------
    std::vector<DataSetRow> list_datasets(const DataFilter& filter = {});
    std::vector<TaskRow> list_tasks(const TaskFilter& filter = {});
    std::vector<Flow> list_flows(const std::optional<std::string>& tag = {});
    std::vector<RunRow> list_runs(const RunSelector& selector = {});
    std::vector<EvalRow> list_run_evaluations(const RunSelector& selector = {});
    std::vector<EstimationProcedure> list_estimation_procedures();
    std::vector<std::string> list_evaluation_measures();

    // --- downloads (cache first) -----------------------------------------
    DataSet get_dataset(Id data_id);
    Task get_task(Id task_id);
    Flow get_flow(Id flow_id);
    Run get_run(Id run_id);
    std::map<std::string, double> get_data_qualities(Id data_id);

    // --- uploads ----------------------------------------------------------
    /// Set description.version to 0 to let the hub assign the next version.
    Id upload_dataset(const arff::Relation& relation, const DataSetDescription& description);
    FlowUploadResult upload_flow(const LearnerSpec& spec);
    /// Uploads run.predictions and tags; returns the hub-assigned run id.
    Id upload_run(const Run& run, const std::vector<std::string>& tags = {});

    // --- tagging / deletion ------------------------------------------------
    /// kind is one of "data", "task", "flow", "run".
    void tag_object(const std::string& kind, Id id, const std::string& tag);
    void untag_object(const std::string& kind, Id id, const std::string& tag);
    void delete_object(const std::string& kind, Id id);

private:
    wire::json http_get(const std::string& path,
                        const std::vector<std::pair<std::string, std::string>>& params);
    wire::json http_post(const std::string& path, const wire::json& body);
    wire::json http_delete(const std::string& path);

    Config config_;
    Cache cache_;
};

}  // namespace mlhub
