#include "mlhub/wire.hpp"

#include <charconv>
#include <cmath>

#include "mlhub/errors.hpp"

namespace mlhub::wire {

namespace {

long long parse_ll(std::string_view text, std::string_view what) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ValidationError("malformed " + std::string(what) + " '" + std::string(text) + "'");
    }
    return out;
}

}  // namespace

Range exact(long long v) { return Range{v, v}; }

std::string range_to_string(const Range& r) {
    if (r.lo == r.hi) return std::to_string(r.lo);
    return std::to_string(r.lo) + ".." + std::to_string(r.hi);
}

Range range_from_string(std::string_view text) {
    auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        long long v = parse_ll(text, "range");
        return Range{v, v};
    }
    Range r;
    r.lo = parse_ll(text.substr(0, dots), "range lower bound");
    r.hi = parse_ll(text.substr(dots + 2), "range upper bound");
    if (r.lo > r.hi) {
        throw ValidationError("range lower bound " + std::to_string(r.lo) +
                              " exceeds upper bound " + std::to_string(r.hi));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Entities

json dataset_description_to_json(const DataSetDescription& desc) {
    json j;
    j["id"] = desc.data_id;
    j["name"] = desc.name;
    j["version"] = desc.version;
    j["status"] = to_string(desc.status);
    j["default_target_attribute"] = desc.default_target_attribute;
    j["licence"] = desc.licence;
    j["format"] = desc.format;
    j["upload_date"] = desc.upload_date;
    j["uploader"] = desc.uploader;
    j["tags"] = desc.tags;
    j["qualities"] = desc.qualities;
    return j;
}

DataSetDescription dataset_description_from_json(const json& j) {
    DataSetDescription desc;
    desc.data_id = j.at("id").get<Id>();
    desc.name = j.at("name").get<std::string>();
    desc.version = j.at("version").get<int>();
    const std::string status = j.at("status").get<std::string>();
    auto parsed_status = data_status_from_string(status);
    if (!parsed_status) throw ValidationError("unknown dataset status '" + status + "'");
    desc.status = *parsed_status;
    desc.default_target_attribute = j.at("default_target_attribute").get<std::string>();
    desc.licence = j.value("licence", std::string());
    desc.format = j.value("format", std::string("ARFF"));
    desc.upload_date = j.value("upload_date", std::string());
    desc.uploader = j.value("uploader", Id{0});
    desc.tags = j.value("tags", std::set<std::string>{});
    if (j.contains("qualities")) {
        desc.qualities = j.at("qualities").get<std::map<std::string, double>>();
    }
    return desc;
}

json estimation_procedure_to_json(const EstimationProcedure& ep) {
    json j;
    j["id"] = ep.ep_id;
    j["type"] = "crossvalidation";
    j["folds"] = ep.folds;
    j["repeats"] = ep.repeats;
    j["stratified"] = ep.stratified;
    j["name"] = ep.name();
    return j;
}

EstimationProcedure estimation_procedure_from_json(const json& j) {
    EstimationProcedure ep;
    ep.ep_id = j.value("id", Id{0});
    ep.folds = j.at("folds").get<int>();
    ep.repeats = j.at("repeats").get<int>();
    ep.stratified = j.at("stratified").get<bool>();
    return ep;
}

json task_to_json(const Task& task) {
    json j;
    j["id"] = task.task_id;
    j["task_type"] = to_string(task.task_type);
    j["data_id"] = task.data_id;
    j["target_feature"] = task.target_feature;
    j["estimation_procedure"] = estimation_procedure_to_json(task.estimation_procedure);
    j["evaluation_measure"] = task.evaluation_measure;
    j["tags"] = task.tags;
    return j;
}

Task task_from_json(const json& j) {
    Task task;
    task.task_id = j.at("id").get<Id>();
    const std::string type = j.at("task_type").get<std::string>();
    auto parsed_type = task_type_from_string(type);
    if (!parsed_type) throw ValidationError("unknown task type '" + type + "'");
    task.task_type = *parsed_type;
    task.data_id = j.at("data_id").get<Id>();
    task.target_feature = j.at("target_feature").get<std::string>();
    task.estimation_procedure = estimation_procedure_from_json(j.at("estimation_procedure"));
    task.evaluation_measure = j.value("evaluation_measure", std::string());
    task.tags = j.value("tags", std::set<std::string>{});
    return task;
}

json flow_to_json(const Flow& flow) {
    json j;
    j["id"] = flow.flow_id;
    j["name"] = flow.name;
    j["version"] = flow.version;
    j["external_version"] = flow.external_version;
    j["description"] = flow.description;
    json params = json::array();
    for (const auto& p : flow.parameters) {
        params.push_back({{"name", p.name},
                          {"data_type", p.data_type},
                          {"default_value", p.default_value}});
    }
    j["parameters"] = std::move(params);
    j["dependencies"] = flow.dependencies;
    j["uploader"] = flow.uploader;
    j["tags"] = flow.tags;
    return j;
}

Flow flow_from_json(const json& j) {
    Flow flow;
    flow.flow_id = j.at("id").get<Id>();
    flow.name = j.at("name").get<std::string>();
    flow.version = j.at("version").get<int>();
    flow.external_version = j.value("external_version", std::string());
    flow.description = j.value("description", std::string());
    if (j.contains("parameters")) {
        for (const auto& p : j.at("parameters")) {
            flow.parameters.push_back({p.at("name").get<std::string>(),
                                       p.value("data_type", std::string()),
                                       p.value("default_value", std::string())});
        }
    }
    flow.dependencies = j.value("dependencies", std::vector<std::string>{});
    flow.uploader = j.value("uploader", Id{0});
    flow.tags = j.value("tags", std::set<std::string>{});
    return flow;
}

json measure_values_to_json(const MeasureValues& mv) {
    json j;
    j["aggregate"] = mv.aggregate;
    j["per_fold"] = mv.per_fold;
    return j;
}

MeasureValues measure_values_from_json(const json& j) {
    MeasureValues mv;
    mv.aggregate = j.at("aggregate").get<double>();
    mv.per_fold = j.at("per_fold").get<std::vector<double>>();
    return mv;
}

json run_to_json(const Run& run) {
    json j;
    j["id"] = run.run_id;
    j["task_id"] = run.task_id;
    j["flow_id"] = run.flow_id;
    j["uploader"] = run.uploader;
    json params = json::array();
    for (const auto& p : run.parameter_settings) {
        params.push_back({{"name", p.name}, {"value", p.value}, {"defaulted", p.defaulted}});
    }
    j["parameter_settings"] = std::move(params);
    json seeds = json::array();
    for (const auto& [name, value] : run.seed_settings) {
        seeds.push_back({{"name", name}, {"value", value}});
    }
    j["seed_settings"] = std::move(seeds);
    json evals = json::object();
    for (const auto& [measure, values] : run.evaluations) {
        evals[measure] = measure_values_to_json(values);
    }
    j["evaluations"] = std::move(evals);
    j["tags"] = run.tags;
    return j;
}

Run run_from_json(const json& j) {
    Run run;
    run.run_id = j.at("id").get<Id>();
    run.task_id = j.at("task_id").get<Id>();
    run.flow_id = j.at("flow_id").get<Id>();
    run.uploader = j.value("uploader", Id{0});
    if (j.contains("parameter_settings")) {
        for (const auto& p : j.at("parameter_settings")) {
            run.parameter_settings.push_back({p.at("name").get<std::string>(),
                                              p.at("value").get<std::string>(),
                                              p.value("defaulted", false)});
        }
    }
    if (j.contains("seed_settings")) {
        for (const auto& s : j.at("seed_settings")) {
            run.seed_settings.emplace_back(s.at("name").get<std::string>(),
                                           s.at("value").get<std::string>());
        }
    }
    if (j.contains("evaluations")) {
        for (const auto& [measure, values] : j.at("evaluations").items()) {
            run.evaluations[measure] = measure_values_from_json(values);
        }
    }
    run.tags = j.value("tags", std::set<std::string>{});
    return run;
}

// ---------------------------------------------------------------------------
// Splits <-> ARFF

arff::Relation splits_to_arff(const Splits& splits, const std::string& relation_name) {
    arff::Relation rel;
    rel.name = relation_name;
    rel.attributes = {
        {"type", arff::Kind::Nominal, {"TRAIN", "TEST"}, ""},
        {"rowid", arff::Kind::Numeric, {}, ""},
        {"repeat", arff::Kind::Numeric, {}, ""},
        {"fold", arff::Kind::Numeric, {}, ""},
    };
    for (std::size_t rep = 0; rep < splits.size(); ++rep) {
        for (std::size_t fold = 0; fold < splits[rep].size(); ++fold) {
            const FoldSplit& fs = splits[rep][fold];
            for (Id r : fs.train) {
                rel.rows.push_back({arff::NominalValue{0}, static_cast<double>(r),
                                    static_cast<double>(rep), static_cast<double>(fold)});
            }
            for (Id r : fs.test) {
                rel.rows.push_back({arff::NominalValue{1}, static_cast<double>(r),
                                    static_cast<double>(rep), static_cast<double>(fold)});
            }
        }
    }
    return rel;
}

namespace {

std::size_t require_attribute(const arff::Relation& rel, std::string_view name) {
    std::ptrdiff_t idx = rel.attribute_index(name);
    if (idx < 0) {
        throw ValidationError("relation '" + rel.name + "' lacks required attribute '" +
                              std::string(name) + "'");
    }
    return static_cast<std::size_t>(idx);
}

long long numeric_cell(const arff::Relation& rel, std::size_t row, std::size_t col,
                       std::string_view what) {
    const arff::Value& v = rel.rows[row][col];
    if (!std::holds_alternative<double>(v)) {
        throw ValidationError("row " + std::to_string(row + 1) + ": " + std::string(what) +
                              " must be numeric");
    }
    double d = std::get<double>(v);
    long long ll = static_cast<long long>(d);
    if (static_cast<double>(ll) != d) {
        throw ValidationError("row " + std::to_string(row + 1) + ": " + std::string(what) +
                              " must be an integer");
    }
    return ll;
}

}  // namespace

Splits splits_from_arff(const arff::Relation& rel) {
    std::size_t type_col = require_attribute(rel, "type");
    std::size_t rowid_col = require_attribute(rel, "rowid");
    std::size_t repeat_col = require_attribute(rel, "repeat");
    std::size_t fold_col = require_attribute(rel, "fold");

    const auto& type_levels = rel.attributes[type_col].levels;
    Splits splits;
    for (std::size_t i = 0; i < rel.rows.size(); ++i) {
        long long rep = numeric_cell(rel, i, repeat_col, "repeat");
        long long fold = numeric_cell(rel, i, fold_col, "fold");
        long long rowid = numeric_cell(rel, i, rowid_col, "rowid");
        if (rep < 0 || fold < 0 || rowid < 0) {
            throw ValidationError("row " + std::to_string(i + 1) +
                                  ": negative repeat/fold/rowid in splits");
        }
        const arff::Value& tv = rel.rows[i][type_col];
        if (!std::holds_alternative<arff::NominalValue>(tv)) {
            throw ValidationError("row " + std::to_string(i + 1) + ": type must be nominal");
        }
        const std::string& type = type_levels[static_cast<std::size_t>(
            std::get<arff::NominalValue>(tv).index)];

        if (splits.size() <= static_cast<std::size_t>(rep)) {
            splits.resize(static_cast<std::size_t>(rep) + 1);
        }
        auto& folds = splits[static_cast<std::size_t>(rep)];
        if (folds.size() <= static_cast<std::size_t>(fold)) {
            folds.resize(static_cast<std::size_t>(fold) + 1);
        }
        FoldSplit& fs = folds[static_cast<std::size_t>(fold)];
        if (type == "TRAIN") {
            fs.train.push_back(rowid);
        } else if (type == "TEST") {
            fs.test.push_back(rowid);
        } else {
            throw ValidationError("row " + std::to_string(i + 1) + ": unknown split type '" +
                                  type + "'");
        }
    }
    return splits;
}

// ---------------------------------------------------------------------------
// Predictions <-> ARFF

arff::Relation predictions_to_arff(std::span<const PredictionRow> preds,
                                   const std::vector<std::string>& classes,
                                   const std::string& relation_name) {
    arff::Relation rel;
    rel.name = relation_name;
    rel.attributes = {
        {"repeat", arff::Kind::Numeric, {}, ""},
        {"fold", arff::Kind::Numeric, {}, ""},
        {"row_id", arff::Kind::Numeric, {}, ""},
        {"prediction", arff::Kind::Nominal, classes, ""},
        {"truth", arff::Kind::Nominal, classes, ""},
    };
    for (const std::string& cls : classes) {
        rel.attributes.push_back({"confidence." + cls, arff::Kind::Numeric, {}, ""});
    }

    auto level_of = [&](const std::string& label, std::string_view what) -> std::int32_t {
        for (std::size_t k = 0; k < classes.size(); ++k) {
            if (classes[k] == label) return static_cast<std::int32_t>(k);
        }
        throw ValidationError(std::string(what) + " label '" + label +
                              "' is not among the task classes");
    };

    for (const PredictionRow& p : preds) {
        std::vector<arff::Value> row;
        row.reserve(rel.attributes.size());
        row.emplace_back(static_cast<double>(p.repeat));
        row.emplace_back(static_cast<double>(p.fold));
        row.emplace_back(static_cast<double>(p.row_id));
        row.emplace_back(arff::NominalValue{level_of(p.predicted, "prediction")});
        row.emplace_back(arff::NominalValue{level_of(p.truth, "truth")});
        if (p.confidences.empty()) {
            for (std::size_t k = 0; k < classes.size(); ++k) {
                row.emplace_back(arff::MissingValue{});
            }
        } else {
            if (p.confidences.size() != classes.size()) {
                throw ValidationError("prediction row carries " +
                                      std::to_string(p.confidences.size()) +
                                      " confidences for " + std::to_string(classes.size()) +
                                      " classes");
            }
            for (std::size_t k = 0; k < classes.size(); ++k) {
                if (p.confidences[k].first != classes[k]) {
                    throw ValidationError("confidence columns out of order: expected '" +
                                          classes[k] + "', got '" + p.confidences[k].first + "'");
                }
                row.emplace_back(p.confidences[k].second);
            }
        }
        rel.rows.push_back(std::move(row));
    }
    return rel;
}

std::vector<PredictionRow> predictions_from_arff(const arff::Relation& rel) {
    std::size_t repeat_col = require_attribute(rel, "repeat");
    std::size_t fold_col = require_attribute(rel, "fold");
    std::size_t rowid_col = require_attribute(rel, "row_id");
    std::size_t pred_col = require_attribute(rel, "prediction");
    std::size_t truth_col = require_attribute(rel, "truth");

    const auto& classes = rel.attributes[pred_col].levels;
    std::vector<std::ptrdiff_t> conf_cols;
    conf_cols.reserve(classes.size());
    bool any_conf = false;
    for (const std::string& cls : classes) {
        std::ptrdiff_t idx = rel.attribute_index("confidence." + cls);
        conf_cols.push_back(idx);
        if (idx >= 0) any_conf = true;
    }
    if (any_conf) {
        for (std::size_t k = 0; k < classes.size(); ++k) {
            if (conf_cols[k] < 0) {
                throw ValidationError("prediction relation lacks confidence column for class '" +
                                      classes[k] + "'");
            }
        }
    }

    auto nominal_label = [&](const arff::Value& v, std::size_t col,
                             std::size_t row) -> std::string {
        if (!std::holds_alternative<arff::NominalValue>(v)) {
            throw ValidationError("row " + std::to_string(row + 1) + ": attribute '" +
                                  rel.attributes[col].name + "' must be a class label");
        }
        return rel.attributes[col].levels[static_cast<std::size_t>(
            std::get<arff::NominalValue>(v).index)];
    };

    std::vector<PredictionRow> out;
    out.reserve(rel.rows.size());
    for (std::size_t i = 0; i < rel.rows.size(); ++i) {
        PredictionRow p;
        p.repeat = static_cast<int>(numeric_cell(rel, i, repeat_col, "repeat"));
        p.fold = static_cast<int>(numeric_cell(rel, i, fold_col, "fold"));
        p.row_id = numeric_cell(rel, i, rowid_col, "row_id");
        p.predicted = nominal_label(rel.rows[i][pred_col], pred_col, i);
        p.truth = nominal_label(rel.rows[i][truth_col], truth_col, i);
        if (any_conf) {
            bool all_missing = true;
            for (std::size_t k = 0; k < classes.size(); ++k) {
                const arff::Value& v = rel.rows[i][static_cast<std::size_t>(conf_cols[k])];
                if (!std::holds_alternative<arff::MissingValue>(v)) all_missing = false;
            }
            if (!all_missing) {
                for (std::size_t k = 0; k < classes.size(); ++k) {
                    const arff::Value& v = rel.rows[i][static_cast<std::size_t>(conf_cols[k])];
                    if (!std::holds_alternative<double>(v)) {
                        throw ValidationError("row " + std::to_string(i + 1) +
                                              ": confidence for class '" + classes[k] +
                                              "' must be numeric");
                    }
                    p.confidences.emplace_back(classes[k], std::get<double>(v));
                }
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace mlhub::wire
