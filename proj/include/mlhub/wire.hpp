#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mlhub/arff.hpp"
#include "mlhub/model.hpp"

/// The JSON-over-HTTP wire schema shared by the client and the hub server.
/// Entity GET bodies embed the entity's ARFF payload (dataset rows, task
/// splits, run predictions) so one request fetches one complete object.
namespace mlhub::wire {

using json = nlohmann::json;

/// Inclusive integer interval used by list filters. Serializes as "lo..hi",
/// or just the number when lo == hi.
struct Range {
    long long lo = 0;
    long long hi = 0;

    bool contains(double v) const {
        return v >= static_cast<double>(lo) && v <= static_cast<double>(hi);
    }
    bool operator==(const Range&) const = default;
};

Range exact(long long v);
std::string range_to_string(const Range& r);
Range range_from_string(std::string_view text);  // throws ValidationError

// Entity conversions. *_to_json never includes the ARFF payload; the payload
// travels beside the entity under its own key.
json dataset_description_to_json(const DataSetDescription& desc);
DataSetDescription dataset_description_from_json(const json& j);

json estimation_procedure_to_json(const EstimationProcedure& ep);
EstimationProcedure estimation_procedure_from_json(const json& j);

json task_to_json(const Task& task);  // splits excluded
Task task_from_json(const json& j);

json flow_to_json(const Flow& flow);
Flow flow_from_json(const json& j);

json run_to_json(const Run& run);  // predictions excluded
Run run_from_json(const json& j);

json measure_values_to_json(const MeasureValues& mv);
MeasureValues measure_values_from_json(const json& j);

// Task splits travel as an ARFF relation with attributes
// type {TRAIN,TEST}, rowid, repeat, fold.
arff::Relation splits_to_arff(const Splits& splits, const std::string& relation_name);
Splits splits_from_arff(const arff::Relation& rel);

// Run predictions travel as an ARFF relation with attributes repeat, fold,
// row_id, prediction, truth and one confidence.<class> column per class.
arff::Relation predictions_to_arff(std::span<const PredictionRow> preds,
                                   const std::vector<std::string>& classes,
                                   const std::string& relation_name);
std::vector<PredictionRow> predictions_from_arff(const arff::Relation& rel);

}  // namespace mlhub::wire
