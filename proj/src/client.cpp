#include "mlhub/client.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "mlhub/arff.hpp"
#include "mlhub/errors.hpp"

namespace mlhub {

using wire::json;

namespace {

constexpr const char* kApiPrefix = "/api/v1/json/";

std::string url_encode(const std::string& value) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(value.size());
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

std::string build_query(const std::vector<std::pair<std::string, std::string>>& params) {
    std::string query;
    for (const auto& [key, value] : params) {
        query += query.empty() ? '?' : '&';
        query += key;
        query += '=';
        query += url_encode(value);
    }
    return query;
}

void check_range(const std::optional<wire::Range>& range, std::string_view name) {
    if (!range) return;
    if (range->lo > range->hi) {
        throw ValidationError(std::string(name) + ": lower bound " + std::to_string(range->lo) +
                              " exceeds upper bound " + std::to_string(range->hi));
    }
    if (range->lo < 0) {
        throw ValidationError(std::string(name) + ": bounds must be >= 0");
    }
}

void append_range(std::vector<std::pair<std::string, std::string>>& params,
                  const std::optional<wire::Range>& range, const std::string& name) {
    check_range(range, name);
    if (range) params.emplace_back(name, wire::range_to_string(*range));
}

void append_paging(std::vector<std::pair<std::string, std::string>>& params,
                   const std::optional<long long>& limit, const std::optional<long long>& offset) {
    if (limit) {
        if (*limit < 0) throw ValidationError("limit must be >= 0");
        params.emplace_back("limit", std::to_string(*limit));
    }
    if (offset) {
        if (*offset < 0) throw ValidationError("offset must be >= 0");
        params.emplace_back("offset", std::to_string(*offset));
    }
}

[[noreturn]] void throw_http_error(int status, const std::string& body) {
    std::string message = "HTTP " + std::to_string(status);
    try {
        json j = json::parse(body);
        if (j.contains("message")) message = j.at("message").get<std::string>();
    } catch (const json::exception&) {
        // Non-JSON error body; keep the generic message.
    }
    if (status == 404) throw NotFoundError(message);
    if (status == 401 || status == 403) throw AuthError(status, message);
    throw HttpError(status, message);
}

json parse_response(const httplib::Result& res) {
    if (res->status != 200) throw_http_error(res->status, res->body);
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw Error(std::string("malformed JSON in hub response: ") + e.what());
    }
}

MeasureValues measures_from(const json& j) { return wire::measure_values_from_json(j); }

}  // namespace

Client::Client(Config config) : config_(std::move(config)), cache_(config_.cachedir) {}

json Client::http_get(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& params) {
    auto all_params = params;
    if (!config_.apikey.empty()) all_params.emplace_back("api_key", config_.apikey);
    const std::string target = kApiPrefix + path + build_query(all_params);

    httplib::Error last_error = httplib::Error::Success;
    for (int attempt = 0; attempt <= 2; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
        }
        httplib::Client cli(config_.server_url);
        cli.set_connection_timeout(std::chrono::seconds(10));
        cli.set_read_timeout(std::chrono::seconds(60));
        httplib::Result res = cli.Get(target);
        if (res) return parse_response(res);
        last_error = res.error();
    }
    throw TransportError("GET " + path + " failed: " + httplib::to_string(last_error));
}

json Client::http_post(const std::string& path, const json& body) {
    std::vector<std::pair<std::string, std::string>> params;
    if (!config_.apikey.empty()) params.emplace_back("api_key", config_.apikey);
    const std::string target = kApiPrefix + path + build_query(params);

    httplib::Client cli(config_.server_url);
    cli.set_connection_timeout(std::chrono::seconds(10));
    cli.set_read_timeout(std::chrono::seconds(120));
    httplib::Result res = cli.Post(target, body.dump(), "application/json");
    if (!res) {
        throw TransportError("POST " + path + " failed: " + httplib::to_string(res.error()));
    }
    return parse_response(res);
}

json Client::http_delete(const std::string& path) {
    std::vector<std::pair<std::string, std::string>> params;
    if (!config_.apikey.empty()) params.emplace_back("api_key", config_.apikey);
    const std::string target = kApiPrefix + path + build_query(params);

    httplib::Client cli(config_.server_url);
    cli.set_connection_timeout(std::chrono::seconds(10));
    httplib::Result res = cli.Delete(target);
    if (!res) {
        throw TransportError("DELETE " + path + " failed: " + httplib::to_string(res.error()));
    }
    return parse_response(res);
}

// ---------------------------------------------------------------------------
// Listings

std::vector<DataSetRow> Client::list_datasets(const DataFilter& filter) {
    std::vector<std::pair<std::string, std::string>> params;
    if (filter.tag) params.emplace_back("tag", *filter.tag);
    if (filter.status) params.emplace_back("status", *filter.status);
    append_range(params, filter.number_of_classes, "number_of_classes");
    append_range(params, filter.number_of_instances, "number_of_instances");
    append_range(params, filter.number_of_features, "number_of_features");
    append_range(params, filter.number_of_missing_values, "number_of_missing_values");
    append_paging(params, filter.limit, filter.offset);

    json body = http_get("data/list", params);
    std::vector<DataSetRow> rows;
    for (const json& j : body.at("data")) {
        DataSetDescription desc = wire::dataset_description_from_json(j);
        DataSetRow row;
        row.data_id = desc.data_id;
        row.name = desc.name;
        row.version = desc.version;
        row.status = desc.status;
        row.qualities = desc.qualities;
        row.tags.assign(desc.tags.begin(), desc.tags.end());
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<TaskRow> Client::list_tasks(const TaskFilter& filter) {
    std::vector<std::pair<std::string, std::string>> params;
    if (filter.task_type) params.emplace_back("task_type", *filter.task_type);
    append_range(params, filter.number_of_classes, "number_of_classes");
    append_range(params, filter.number_of_instances, "number_of_instances");
    append_range(params, filter.number_of_features, "number_of_features");
    append_range(params, filter.number_of_missing_values, "number_of_missing_values");
    if (filter.data_tag) params.emplace_back("data_tag", *filter.data_tag);
    if (filter.tag) params.emplace_back("tag", *filter.tag);
    if (filter.estimation_procedure) {
        params.emplace_back("estimation_procedure", *filter.estimation_procedure);
    }
    append_paging(params, filter.limit, filter.offset);

    json body = http_get("task/list", params);
    std::vector<TaskRow> rows;
    for (const json& j : body.at("tasks")) {
        Task task = wire::task_from_json(j);
        TaskRow row;
        row.task_id = task.task_id;
        row.task_type = task.task_type;
        row.data_id = task.data_id;
        row.data_name = j.value("data_name", std::string());
        row.target_feature = task.target_feature;
        row.estimation_procedure = task.estimation_procedure.name();
        row.evaluation_measure = task.evaluation_measure;
        if (j.contains("qualities")) {
            row.qualities = j.at("qualities").get<std::map<std::string, double>>();
        }
        row.tags.assign(task.tags.begin(), task.tags.end());
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Flow> Client::list_flows(const std::optional<std::string>& tag) {
    std::vector<std::pair<std::string, std::string>> params;
    if (tag) params.emplace_back("tag", *tag);
    json body = http_get("flow/list", params);
    std::vector<Flow> rows;
    for (const json& j : body.at("flows")) rows.push_back(wire::flow_from_json(j));
    return rows;
}

namespace {

std::vector<std::pair<std::string, std::string>> selector_params(const RunSelector& sel) {
    std::vector<std::pair<std::string, std::string>> params;
    if (sel.task_id) params.emplace_back("task_id", std::to_string(*sel.task_id));
    if (sel.flow_id) params.emplace_back("flow_id", std::to_string(*sel.flow_id));
    if (sel.uploader) params.emplace_back("uploader", std::to_string(*sel.uploader));
    if (sel.tag) params.emplace_back("tag", *sel.tag);
    append_paging(params, sel.limit, sel.offset);
    return params;
}

}  // namespace

std::vector<RunRow> Client::list_runs(const RunSelector& selector) {
    json body = http_get("run/list", selector_params(selector));
    std::vector<RunRow> rows;
    for (const json& j : body.at("runs")) {
        RunRow row;
        row.run_id = j.at("id").get<Id>();
        row.task_id = j.at("task_id").get<Id>();
        row.flow_id = j.at("flow_id").get<Id>();
        row.uploader = j.value("uploader", Id{0});
        row.tags = j.value("tags", std::vector<std::string>{});
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<EvalRow> Client::list_run_evaluations(const RunSelector& selector) {
    json body = http_get("evaluation/list", selector_params(selector));
    std::vector<EvalRow> rows;
    for (const json& j : body.at("evaluations")) {
        EvalRow row;
        row.run_id = j.at("run_id").get<Id>();
        row.task_id = j.at("task_id").get<Id>();
        row.flow_id = j.at("flow_id").get<Id>();
        row.flow_name = j.value("flow_name", std::string());
        row.flow_version = j.value("flow_version", 0);
        row.uploader = j.value("uploader", Id{0});
        if (j.contains("measures")) {
            for (const auto& [name, mv] : j.at("measures").items()) {
                row.measures.emplace(name, measures_from(mv));
            }
        }
        row.tags = j.value("tags", std::vector<std::string>{});
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<EstimationProcedure> Client::list_estimation_procedures() {
    json body = http_get("estimationprocedure/list", {});
    std::vector<EstimationProcedure> rows;
    for (const json& j : body.at("estimation_procedures")) {
        rows.push_back(wire::estimation_procedure_from_json(j));
    }
    return rows;
}

std::vector<std::string> Client::list_evaluation_measures() {
    json body = http_get("evaluationmeasure/list", {});
    return body.at("evaluation_measures").get<std::vector<std::string>>();
}

// ---------------------------------------------------------------------------
// Downloads

namespace {

/// Parse a cached or downloaded payload; on cache corruption the entry is
/// dropped so the next call refetches.
arff::Relation parse_arff_payload(const std::string& text, const std::string& context) {
    try {
        return arff::parse(text);
    } catch (const arff::ArffError& e) {
        throw Error(context + ": " + e.what());
    }
}

}  // namespace

DataSet Client::get_dataset(Id data_id) {
    static const std::vector<std::string> kFiles = {"description.json", "dataset.arff"};
    std::string desc_text;
    std::string arff_text;

    if (auto cached = cache_.load(CacheKind::Dataset, data_id, kFiles)) {
        desc_text = cached->at("description.json");
        arff_text = cached->at("dataset.arff");
    } else {
        json body = http_get("data/" + std::to_string(data_id), {});
        desc_text = body.at("data_set_description").dump(2);
        arff_text = body.at("arff").get<std::string>();
        cache_.store(CacheKind::Dataset, data_id,
                     {{"description.json", desc_text}, {"dataset.arff", arff_text}});
    }

    DataSet ds;
    try {
        ds.desc = wire::dataset_description_from_json(json::parse(desc_text));
    } catch (const json::exception& e) {
        cache_.remove(CacheKind::Dataset, data_id);
        throw Error("dataset " + std::to_string(data_id) + ": bad cached description: " +
                    e.what());
    }
    ds.relation = parse_arff_payload(arff_text, "dataset " + std::to_string(data_id));
    ds.target_index = ds.relation.attribute_index(ds.desc.default_target_attribute);
    return ds;
}

Task Client::get_task(Id task_id) {
    static const std::vector<std::string> kFiles = {"task.json", "datasplits.arff"};
    std::string task_text;
    std::string splits_text;

    if (auto cached = cache_.load(CacheKind::Task, task_id, kFiles)) {
        task_text = cached->at("task.json");
        splits_text = cached->at("datasplits.arff");
    } else {
        json body = http_get("task/" + std::to_string(task_id), {});
        task_text = body.at("task").dump(2);
        splits_text = body.at("splits_arff").get<std::string>();
        cache_.store(CacheKind::Task, task_id,
                     {{"task.json", task_text}, {"datasplits.arff", splits_text}});
    }

    Task task;
    try {
        task = wire::task_from_json(json::parse(task_text));
    } catch (const json::exception& e) {
        cache_.remove(CacheKind::Task, task_id);
        throw Error("task " + std::to_string(task_id) + ": bad cached description: " + e.what());
    }
    task.splits = wire::splits_from_arff(
        parse_arff_payload(splits_text, "task " + std::to_string(task_id) + " splits"));
    return task;
}

Flow Client::get_flow(Id flow_id) {
    static const std::vector<std::string> kFiles = {"flow.json"};
    std::string flow_text;

    if (auto cached = cache_.load(CacheKind::Flow, flow_id, kFiles)) {
        flow_text = cached->at("flow.json");
    } else {
        json body = http_get("flow/" + std::to_string(flow_id), {});
        flow_text = body.at("flow").dump(2);
        cache_.store(CacheKind::Flow, flow_id, {{"flow.json", flow_text}});
    }

    try {
        return wire::flow_from_json(json::parse(flow_text));
    } catch (const json::exception& e) {
        cache_.remove(CacheKind::Flow, flow_id);
        throw Error("flow " + std::to_string(flow_id) + ": bad cached description: " + e.what());
    }
}

Run Client::get_run(Id run_id) {
    static const std::vector<std::string> kFiles = {"run.json", "predictions.arff"};
    std::string run_text;
    std::string predictions_text;

    if (auto cached = cache_.load(CacheKind::Run, run_id, kFiles)) {
        run_text = cached->at("run.json");
        predictions_text = cached->at("predictions.arff");
    } else {
        json body = http_get("run/" + std::to_string(run_id), {});
        run_text = body.at("run").dump(2);
        predictions_text = body.at("predictions_arff").get<std::string>();
        cache_.store(CacheKind::Run, run_id,
                     {{"run.json", run_text}, {"predictions.arff", predictions_text}});
    }

    Run run;
    try {
        run = wire::run_from_json(json::parse(run_text));
    } catch (const json::exception& e) {
        cache_.remove(CacheKind::Run, run_id);
        throw Error("run " + std::to_string(run_id) + ": bad cached description: " + e.what());
    }
    run.predictions = wire::predictions_from_arff(
        parse_arff_payload(predictions_text, "run " + std::to_string(run_id) + " predictions"));
    return run;
}

std::map<std::string, double> Client::get_data_qualities(Id data_id) {
    json body = http_get("data/qualities/" + std::to_string(data_id), {});
    return body.at("data_qualities").get<std::map<std::string, double>>();
}

// ---------------------------------------------------------------------------
// Uploads

Id Client::upload_dataset(const arff::Relation& relation, const DataSetDescription& description) {
    json body;
    body["description"] = wire::dataset_description_to_json(description);
    body["arff"] = arff::write(relation);
    json response = http_post("data", body);
    return response.at("data_id").get<Id>();
}

FlowUploadResult Client::upload_flow(const LearnerSpec& spec) {
    Flow flow = flow_from_learner(spec);
    json response = http_post("flow", json{{"flow", wire::flow_to_json(flow)}});
    FlowUploadResult result;
    result.flow_id = response.at("flow_id").get<Id>();
    result.version = response.at("version").get<int>();
    result.already_existed = response.contains("message");
    return result;
}

Id Client::upload_run(const Run& run, const std::vector<std::string>& tags) {
    if (run.predictions.empty()) {
        throw ValidationError("run has no predictions to upload");
    }
    if (run.predictions.front().confidences.empty()) {
        throw ValidationError("run predictions carry no class confidences");
    }
    std::vector<std::string> classes;
    classes.reserve(run.predictions.front().confidences.size());
    for (const auto& [label, value] : run.predictions.front().confidences) {
        (void)value;
        classes.push_back(label);
    }

    Run to_send = run;
    to_send.tags.insert(tags.begin(), tags.end());

    json body;
    body["run"] = wire::run_to_json(to_send);
    body["predictions_arff"] =
        arff::write(wire::predictions_to_arff(run.predictions, classes, "predictions"));
    json response = http_post("run", body);
    return response.at("run_id").get<Id>();
}

// ---------------------------------------------------------------------------
// Tagging / deletion

namespace {

CacheKind cache_kind_for(const std::string& kind) {
    if (kind == "data") return CacheKind::Dataset;
    if (kind == "task") return CacheKind::Task;
    if (kind == "flow") return CacheKind::Flow;
    if (kind == "run") return CacheKind::Run;
    throw ValidationError("unknown entity kind '" + kind + "' (expected data|task|flow|run)");
}

}  // namespace

void Client::tag_object(const std::string& kind, Id id, const std::string& tag) {
    CacheKind ck = cache_kind_for(kind);
    http_post(kind + "/tag", json{{"id", id}, {"tag", tag}});
    cache_.remove(ck, id);  // cached copy no longer reflects the tags
}

void Client::untag_object(const std::string& kind, Id id, const std::string& tag) {
    CacheKind ck = cache_kind_for(kind);
    http_post(kind + "/untag", json{{"id", id}, {"tag", tag}});
    cache_.remove(ck, id);
}

void Client::delete_object(const std::string& kind, Id id) {
    CacheKind ck = cache_kind_for(kind);
    http_delete(kind + "/" + std::to_string(id));
    cache_.remove(ck, id);
}

}  // namespace mlhub
