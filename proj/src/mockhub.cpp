#include "mlhub/mockhub.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include <httplib.h>

#include "mlhub/arff.hpp"
#include "mlhub/errors.hpp"
#include "mlhub/runner.hpp"
#include "mlhub/wire.hpp"

namespace mlhub {

using wire::json;

namespace {

constexpr const char* kApiPrefix = "/api/v1/json/";
constexpr const char* kUploadDate = "2026-01-01T00:00:00";

json error_body(int status, const std::string& message) {
    return json{{"code", status}, {"message", message}};
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(2), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, error_body(status, message), status);
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed JSON request body: ") + e.what());
    }
}

long long param_ll(const httplib::Request& req, const std::string& name) {
    return wire::range_from_string(req.get_param_value(name)).lo;
}

template <typename T>
void apply_paging(std::vector<T>& rows, const httplib::Request& req) {
    long long offset = req.has_param("offset") ? param_ll(req, "offset") : 0;
    if (offset < 0) throw ValidationError("offset must be >= 0");
    if (static_cast<std::size_t>(offset) >= rows.size()) {
        rows.clear();
        return;
    }
    rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(offset));
    if (req.has_param("limit")) {
        long long limit = param_ll(req, "limit");
        if (limit < 0) throw ValidationError("limit must be >= 0");
        if (static_cast<std::size_t>(limit) < rows.size()) {
            rows.resize(static_cast<std::size_t>(limit));
        }
    }
}

bool has_tag(const std::set<std::string>& tags, const std::string& tag) {
    return tags.count(tag) > 0;
}

/// Range check against a quality that may be absent (absent fails the filter).
bool quality_in_range(const std::map<std::string, double>& qualities, const std::string& name,
                      const wire::Range& range) {
    auto it = qualities.find(name);
    return it != qualities.end() && range.contains(it->second);
}

}  // namespace

struct MockHub::Impl {
    HubState fixture;
    HubState state;
    mutable std::mutex mu;
    std::map<std::string, std::size_t> counts;
    httplib::Server server;
    std::thread thread;

    explicit Impl(HubState fx) : fixture(fx), state(std::move(fx)) { setup_routes(); }

    void count(const httplib::Request& req) {
        std::string path = req.path;
        if (path.rfind(kApiPrefix, 0) == 0) path = path.substr(std::string(kApiPrefix).size());
        ++counts[req.method + " " + path];
    }

    const HubUser* find_user(const std::string& key) const {
        for (const auto& u : state.users) {
            if (u.apikey == key) return &u;
        }
        return nullptr;
    }

    const HubUser* optional_user(const httplib::Request& req) const {
        if (!req.has_param("api_key")) return nullptr;
        return find_user(req.get_param_value("api_key"));
    }

    /// Authenticated writer or nullptr with the error already sent.
    const HubUser* require_writer(const httplib::Request& req, httplib::Response& res) const {
        if (!req.has_param("api_key")) {
            send_error(res, 401, "authentication required: pass api_key");
            return nullptr;
        }
        const HubUser* user = find_user(req.get_param_value("api_key"));
        if (!user) {
            send_error(res, 401, "invalid api key");
            return nullptr;
        }
        if (!user->can_write) {
            send_error(res, 403, "this api key has no write access");
            return nullptr;
        }
        return user;
    }

    using Handler = std::function<void(Impl&, const httplib::Request&, httplib::Response&)>;

    httplib::Server::Handler wrap(Handler fn) {
        return [this, fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard<std::mutex> lock(mu);
            count(req);
            try {
                fn(*this, req, res);
            } catch (const Error& e) {
                send_error(res, 400, e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            }
        };
    }

    void setup_routes();

    // --- reads ---------------------------------------------------------
    void get_dataset(const httplib::Request& req, httplib::Response& res);
    void get_data_qualities(const httplib::Request& req, httplib::Response& res);
    void list_datasets(const httplib::Request& req, httplib::Response& res);
    void get_task(const httplib::Request& req, httplib::Response& res);
    void list_tasks(const httplib::Request& req, httplib::Response& res);
    void get_flow(const httplib::Request& req, httplib::Response& res);
    void list_flows(const httplib::Request& req, httplib::Response& res);
    void get_run(const httplib::Request& req, httplib::Response& res);
    void list_runs(const httplib::Request& req, httplib::Response& res);
    void list_evaluations(const httplib::Request& req, httplib::Response& res);

    // --- writes --------------------------------------------------------
    void upload_dataset(const httplib::Request& req, httplib::Response& res);
    void upload_flow(const httplib::Request& req, httplib::Response& res);
    void upload_run(const httplib::Request& req, httplib::Response& res);
    void tag_entity(const httplib::Request& req, httplib::Response& res, bool add);
    void delete_entity(const httplib::Request& req, httplib::Response& res);

    // --- helpers -------------------------------------------------------
    const HubDataset* visible_dataset(Id id, const HubUser* user, httplib::Response& res) {
        auto it = state.datasets.find(id);
        if (it == state.datasets.end()) {
            send_error(res, 404, "dataset " + std::to_string(id) + " not found");
            return nullptr;
        }
        if (it->second.desc.status == DataStatus::InPreparation &&
            (!user || user->user_id != it->second.desc.uploader)) {
            send_error(res, 403, "dataset " + std::to_string(id) + " is in preparation");
            return nullptr;
        }
        return &it->second;
    }

    std::set<std::string>* entity_tags(const std::string& kind, Id id) {
        if (kind == "data") {
            auto it = state.datasets.find(id);
            return it == state.datasets.end() ? nullptr : &it->second.desc.tags;
        }
        if (kind == "task") {
            auto it = state.tasks.find(id);
            return it == state.tasks.end() ? nullptr : &it->second.tags;
        }
        if (kind == "flow") {
            auto it = state.flows.find(id);
            return it == state.flows.end() ? nullptr : &it->second.tags;
        }
        auto it = state.runs.find(id);
        return it == state.runs.end() ? nullptr : &it->second.run.tags;
    }
};

void MockHub::Impl::setup_routes() {
    const std::string p = kApiPrefix;

    server.Get(p + "data/list", wrap([](Impl& s, const auto& req, auto& res) {
        s.list_datasets(req, res);
    }));
    server.Get(p + R"(data/qualities/(\d+))", wrap([](Impl& s, const auto& req, auto& res) {
        s.get_data_qualities(req, res);
    }));
    server.Get(p + R"(data/(\d+))", wrap([](Impl& s, const auto& req, auto& res) {
        s.get_dataset(req, res);
    }));
    server.Get(p + "task/list", wrap([](Impl& s, const auto& req, auto& res) {
        s.list_tasks(req, res);
    }));
    server.Get(p + R"(task/(\d+))", wrap([](Impl& s, const auto& req, auto& res) {
        s.get_task(req, res);
    }));
    server.Get(p + "flow/list", wrap([](Impl& s, const auto& req, auto& res) {
        s.list_flows(req, res);
    }));
    server.Get(p + R"(flow/(\d+))", wrap([](Impl& s, const auto& req, auto& res) {
        s.get_flow(req, res);
    }));
    server.Get(p + "run/list", wrap([](Impl& s, const auto& req, auto& res) {
        s.list_runs(req, res);
    }));
    server.Get(p + R"(run/(\d+))", wrap([](Impl& s, const auto& req, auto& res) {
        s.get_run(req, res);
    }));
    server.Get(p + "evaluation/list", wrap([](Impl& s, const auto& req, auto& res) {
        s.list_evaluations(req, res);
    }));
    server.Get(p + "estimationprocedure/list", wrap([](Impl& s, const auto&, auto& res) {
        json rows = json::array();
        for (const auto& ep : s.state.estimation_procedures) {
            rows.push_back(wire::estimation_procedure_to_json(ep));
        }
        send_json(res, json{{"estimation_procedures", rows}});
    }));
    server.Get(p + "evaluationmeasure/list", wrap([](Impl& s, const auto&, auto& res) {
        send_json(res, json{{"evaluation_measures", s.state.evaluation_measures}});
    }));

    server.Post(p + "data", wrap([](Impl& s, const auto& req, auto& res) {
        s.upload_dataset(req, res);
    }));
    server.Post(p + "flow", wrap([](Impl& s, const auto& req, auto& res) {
        s.upload_flow(req, res);
    }));
    server.Post(p + "run", wrap([](Impl& s, const auto& req, auto& res) {
        s.upload_run(req, res);
    }));
    server.Post(p + R"((data|task|flow|run)/tag)", wrap([](Impl& s, const auto& req, auto& res) {
        s.tag_entity(req, res, true);
    }));
    server.Post(p + R"((data|task|flow|run)/untag)",
                wrap([](Impl& s, const auto& req, auto& res) { s.tag_entity(req, res, false); }));
    server.Delete(p + R"((data|task|flow|run)/(\d+))",
                  wrap([](Impl& s, const auto& req, auto& res) { s.delete_entity(req, res); }));

    // Test-only control endpoints; never counted.
    server.Post("/_test/reset", [this](const httplib::Request&, httplib::Response& res) {
        std::lock_guard<std::mutex> lock(mu);
        state = fixture;
        counts.clear();
        send_json(res, json{{"reset", true}});
    });
    server.Get("/_test/counts", [this](const httplib::Request&, httplib::Response& res) {
        std::lock_guard<std::mutex> lock(mu);
        send_json(res, json{{"counts", counts}});
    });
}

// ---------------------------------------------------------------------------
// Reads

void MockHub::Impl::get_dataset(const httplib::Request& req, httplib::Response& res) {
    Id id = std::stoll(req.matches[1]);
    const HubDataset* ds = visible_dataset(id, optional_user(req), res);
    if (!ds) return;
    send_json(res, json{{"data_set_description", wire::dataset_description_to_json(ds->desc)},
                        {"arff", ds->arff_text}});
}

void MockHub::Impl::get_data_qualities(const httplib::Request& req, httplib::Response& res) {
    Id id = std::stoll(req.matches[1]);
    const HubDataset* ds = visible_dataset(id, optional_user(req), res);
    if (!ds) return;
    send_json(res, json{{"data_qualities", ds->desc.qualities}});
}

void MockHub::Impl::list_datasets(const httplib::Request& req, httplib::Response& res) {
    std::optional<DataStatus> status_filter;
    if (req.has_param("status")) {
        status_filter = data_status_from_string(req.get_param_value("status"));
        if (!status_filter || *status_filter == DataStatus::InPreparation) {
            throw ValidationError("invalid status filter '" + req.get_param_value("status") + "'");
        }
    }
    static const std::pair<const char*, const char*> kRangeParams[] = {
        {"number_of_classes", "NumberOfClasses"},
        {"number_of_instances", "NumberOfInstances"},
        {"number_of_features", "NumberOfFeatures"},
        {"number_of_missing_values", "NumberOfMissingValues"},
    };

    std::vector<json> rows;
    for (const auto& [id, ds] : state.datasets) {
        const DataSetDescription& desc = ds.desc;
        if (desc.status == DataStatus::InPreparation) continue;
        if (status_filter && desc.status != *status_filter) continue;
        if (req.has_param("tag") && !has_tag(desc.tags, req.get_param_value("tag"))) continue;
        bool pass = true;
        for (const auto& [param, quality] : kRangeParams) {
            if (!req.has_param(param)) continue;
            wire::Range range = wire::range_from_string(req.get_param_value(param));
            if (!quality_in_range(desc.qualities, quality, range)) {
                pass = false;
                break;
            }
        }
        if (!pass) continue;
        rows.push_back(wire::dataset_description_to_json(desc));
    }
    apply_paging(rows, req);
    send_json(res, json{{"data", rows}});
}

void MockHub::Impl::get_task(const httplib::Request& req, httplib::Response& res) {
    Id id = std::stoll(req.matches[1]);
    auto it = state.tasks.find(id);
    if (it == state.tasks.end()) {
        send_error(res, 404, "task " + std::to_string(id) + " not found");
        return;
    }
    arff::Relation splits = wire::splits_to_arff(it->second.splits,
                                                 "task_" + std::to_string(id) + "_splits");
    send_json(res, json{{"task", wire::task_to_json(it->second)},
                        {"splits_arff", arff::write(splits)}});
}

void MockHub::Impl::list_tasks(const httplib::Request& req, httplib::Response& res) {
    std::optional<TaskType> type_filter;
    if (req.has_param("task_type")) {
        type_filter = task_type_from_string(req.get_param_value("task_type"));
        if (!type_filter) {
            throw ValidationError("unknown task type '" + req.get_param_value("task_type") + "'");
        }
    }
    static const std::pair<const char*, const char*> kRangeParams[] = {
        {"number_of_classes", "NumberOfClasses"},
        {"number_of_instances", "NumberOfInstances"},
        {"number_of_features", "NumberOfFeatures"},
        {"number_of_missing_values", "NumberOfMissingValues"},
    };

    std::vector<json> rows;
    for (const auto& [id, task] : state.tasks) {
        auto ds = state.datasets.find(task.data_id);
        if (ds == state.datasets.end()) continue;
        const DataSetDescription& desc = ds->second.desc;
        if (desc.status == DataStatus::InPreparation) continue;
        if (type_filter && task.task_type != *type_filter) continue;
        if (req.has_param("tag") && !has_tag(task.tags, req.get_param_value("tag"))) continue;
        if (req.has_param("data_tag") && !has_tag(desc.tags, req.get_param_value("data_tag"))) {
            continue;
        }
        if (req.has_param("estimation_procedure") &&
            task.estimation_procedure.name() != req.get_param_value("estimation_procedure")) {
            continue;
        }
        bool pass = true;
        for (const auto& [param, quality] : kRangeParams) {
            if (!req.has_param(param)) continue;
            wire::Range range = wire::range_from_string(req.get_param_value(param));
            if (!quality_in_range(desc.qualities, quality, range)) {
                pass = false;
                break;
            }
        }
        if (!pass) continue;

        json row = wire::task_to_json(task);
        row["data_name"] = desc.name;
        row["qualities"] = desc.qualities;
        rows.push_back(std::move(row));
    }
    apply_paging(rows, req);
    send_json(res, json{{"tasks", rows}});
}

void MockHub::Impl::get_flow(const httplib::Request& req, httplib::Response& res) {
    Id id = std::stoll(req.matches[1]);
    auto it = state.flows.find(id);
    if (it == state.flows.end()) {
        send_error(res, 404, "flow " + std::to_string(id) + " not found");
        return;
    }
    send_json(res, json{{"flow", wire::flow_to_json(it->second)}});
}

void MockHub::Impl::list_flows(const httplib::Request& req, httplib::Response& res) {
    std::vector<json> rows;
    for (const auto& [id, flow] : state.flows) {
        if (req.has_param("tag") && !has_tag(flow.tags, req.get_param_value("tag"))) continue;
        rows.push_back(wire::flow_to_json(flow));
    }
    apply_paging(rows, req);
    send_json(res, json{{"flows", rows}});
}

void MockHub::Impl::get_run(const httplib::Request& req, httplib::Response& res) {
    Id id = std::stoll(req.matches[1]);
    auto it = state.runs.find(id);
    if (it == state.runs.end()) {
        send_error(res, 404, "run " + std::to_string(id) + " not found");
        return;
    }
    send_json(res, json{{"run", wire::run_to_json(it->second.run)},
                        {"predictions_arff", it->second.predictions_arff}});
}

namespace {

bool run_matches_selector(const Run& run, const httplib::Request& req) {
    if (req.has_param("task_id") && run.task_id != param_ll(req, "task_id")) return false;
    if (req.has_param("flow_id") && run.flow_id != param_ll(req, "flow_id")) return false;
    if (req.has_param("uploader") && run.uploader != param_ll(req, "uploader")) return false;
    if (req.has_param("tag") && !has_tag(run.tags, req.get_param_value("tag"))) return false;
    return true;
}

}  // namespace

void MockHub::Impl::list_runs(const httplib::Request& req, httplib::Response& res) {
    std::vector<json> rows;
    for (const auto& [id, hr] : state.runs) {
        if (!run_matches_selector(hr.run, req)) continue;
        rows.push_back(json{{"id", hr.run.run_id},
                            {"task_id", hr.run.task_id},
                            {"flow_id", hr.run.flow_id},
                            {"uploader", hr.run.uploader},
                            {"tags", hr.run.tags}});
    }
    apply_paging(rows, req);
    send_json(res, json{{"runs", rows}});
}

void MockHub::Impl::list_evaluations(const httplib::Request& req, httplib::Response& res) {
    std::vector<json> rows;
    for (const auto& [id, hr] : state.runs) {
        if (!run_matches_selector(hr.run, req)) continue;
        std::string flow_name;
        int flow_version = 0;
        auto flow = state.flows.find(hr.run.flow_id);
        if (flow != state.flows.end()) {
            flow_name = flow->second.name;
            flow_version = flow->second.version;
        }
        json measures = json::object();
        for (const auto& [name, mv] : hr.run.evaluations) {
            measures[name] = wire::measure_values_to_json(mv);
        }
        rows.push_back(json{{"run_id", hr.run.run_id},
                            {"task_id", hr.run.task_id},
                            {"flow_id", hr.run.flow_id},
                            {"flow_name", flow_name},
                            {"flow_version", flow_version},
                            {"uploader", hr.run.uploader},
                            {"measures", measures},
                            {"tags", hr.run.tags}});
    }
    apply_paging(rows, req);
    send_json(res, json{{"evaluations", rows}});
}

// ---------------------------------------------------------------------------
// Writes

void MockHub::Impl::upload_dataset(const httplib::Request& req, httplib::Response& res) {
    const HubUser* user = require_writer(req, res);
    if (!user) return;
    json body = parse_body(req);
    if (!body.contains("description") || !body.contains("arff")) {
        send_error(res, 400, "dataset upload needs 'description' and 'arff'");
        return;
    }
    DataSetDescription desc = wire::dataset_description_from_json(body.at("description"));

    arff::Relation rel;
    try {
        rel = arff::parse(body.at("arff").get<std::string>());
    } catch (const arff::ArffError& e) {
        send_error(res, 400, std::string("dataset ARFF does not parse: ") + e.what());
        return;
    }
    if (desc.default_target_attribute.empty() ||
        rel.attribute_index(desc.default_target_attribute) < 0) {
        send_error(res, 400, "missing target attribute '" + desc.default_target_attribute +
                                 "' in uploaded relation");
        return;
    }

    if (desc.version <= 0) {
        int max_version = 0;
        for (const auto& [id, ds] : state.datasets) {
            if (ds.desc.name == desc.name) max_version = std::max(max_version, ds.desc.version);
        }
        desc.version = max_version + 1;
    } else {
        for (const auto& [id, ds] : state.datasets) {
            if (ds.desc.name == desc.name && ds.desc.version == desc.version) {
                send_error(res, 412, "dataset '" + desc.name + "' version " +
                                         std::to_string(desc.version) + " already exists");
                return;
            }
        }
    }

    desc.data_id = state.next_data_id++;
    desc.status = DataStatus::Active;
    desc.uploader = user->user_id;
    desc.upload_date = kUploadDate;
    desc.format = "ARFF";
    desc.qualities = compute_data_qualities(rel, desc.default_target_attribute);
    for (const std::string& tag : desc.tags) {
        state.tag_records.push_back({"data", desc.data_id, tag, user->user_id});
    }

    HubDataset ds;
    ds.arff_text = arff::write(rel);
    Id id = desc.data_id;
    ds.desc = std::move(desc);
    state.datasets.emplace(id, std::move(ds));
    send_json(res, json{{"data_id", id}});
}

void MockHub::Impl::upload_flow(const httplib::Request& req, httplib::Response& res) {
    const HubUser* user = require_writer(req, res);
    if (!user) return;
    json body = parse_body(req);
    if (!body.contains("flow")) {
        send_error(res, 400, "flow upload needs 'flow'");
        return;
    }
    Flow flow = wire::flow_from_json(body.at("flow"));
    if (flow.name.empty()) {
        send_error(res, 400, "flow name must not be empty");
        return;
    }
    std::set<std::string> seen;
    for (const auto& p : flow.parameters) {
        if (!seen.insert(p.name).second) {
            send_error(res, 412, "duplicate parameter name '" + p.name + "' in flow");
            return;
        }
    }

    int max_version = 0;
    for (const auto& [id, existing] : state.flows) {
        if (existing.name != flow.name) continue;
        if (existing.external_version == flow.external_version) {
            send_json(res, json{{"flow_id", existing.flow_id},
                                {"version", existing.version},
                                {"message", "flow already exists"}});
            return;
        }
        max_version = std::max(max_version, existing.version);
    }

    flow.flow_id = state.next_flow_id++;
    flow.version = max_version + 1;
    flow.uploader = user->user_id;
    for (const std::string& tag : flow.tags) {
        state.tag_records.push_back({"flow", flow.flow_id, tag, user->user_id});
    }
    Id id = flow.flow_id;
    int version = flow.version;
    state.flows.emplace(id, std::move(flow));
    send_json(res, json{{"flow_id", id}, {"version", version}});
}

void MockHub::Impl::upload_run(const httplib::Request& req, httplib::Response& res) {
    const HubUser* user = require_writer(req, res);
    if (!user) return;
    json body = parse_body(req);
    if (!body.contains("run") || !body.contains("predictions_arff")) {
        send_error(res, 400, "run upload needs 'run' and 'predictions_arff'");
        return;
    }
    Run run = wire::run_from_json(body.at("run"));
    auto task = state.tasks.find(run.task_id);
    if (task == state.tasks.end()) {
        send_error(res, 412, "run references unknown task " + std::to_string(run.task_id));
        return;
    }
    if (!state.flows.count(run.flow_id)) {
        send_error(res, 412, "run references unknown flow " + std::to_string(run.flow_id));
        return;
    }

    const std::string predictions_text = body.at("predictions_arff").get<std::string>();
    try {
        run.predictions = wire::predictions_from_arff(arff::parse(predictions_text));
    } catch (const arff::ArffError& e) {
        send_error(res, 400, std::string("run predictions do not parse: ") + e.what());
        return;
    }
    std::vector<Violation> violations = validate(run, task->second);
    if (!violations.empty()) {
        std::string msg = "run predictions rejected:";
        for (const auto& v : violations) msg += " [" + v.field + "] " + v.rule + ";";
        send_error(res, 412, msg);
        return;
    }

    // The hub's evaluations are authoritative; whatever the client computed
    // locally is discarded and recomputed here.
    run.evaluations = evaluate_predictions(run.predictions, task->second);
    run.run_id = state.next_run_id++;
    run.uploader = user->user_id;
    for (const std::string& tag : run.tags) {
        state.tag_records.push_back({"run", run.run_id, tag, user->user_id});
    }

    HubRun hr;
    hr.predictions_arff = predictions_text;
    Id id = run.run_id;
    hr.run = std::move(run);
    state.runs.emplace(id, std::move(hr));
    send_json(res, json{{"run_id", id}});
}

void MockHub::Impl::tag_entity(const httplib::Request& req, httplib::Response& res, bool add) {
    const HubUser* user = require_writer(req, res);
    if (!user) return;
    const std::string kind = req.matches[1];
    json body = parse_body(req);
    if (!body.contains("id") || !body.contains("tag")) {
        send_error(res, 400, "tagging needs 'id' and 'tag'");
        return;
    }
    Id id = body.at("id").get<Id>();
    std::string tag = body.at("tag").get<std::string>();
    if (tag.empty()) {
        send_error(res, 400, "tag must not be empty");
        return;
    }
    std::set<std::string>* tags = entity_tags(kind, id);
    if (!tags) {
        send_error(res, 404, kind + " " + std::to_string(id) + " not found");
        return;
    }

    if (add) {
        if (has_tag(*tags, tag)) {
            send_error(res, 412,
                       kind + " " + std::to_string(id) + " already has tag '" + tag + "'");
            return;
        }
        tags->insert(tag);
        state.tag_records.push_back({kind, id, tag, user->user_id});
    } else {
        if (!has_tag(*tags, tag)) {
            send_error(res, 412, kind + " " + std::to_string(id) + " has no tag '" + tag + "'");
            return;
        }
        auto record = std::find_if(state.tag_records.begin(), state.tag_records.end(),
                                   [&](const TagRecord& r) {
                                       return r.kind == kind && r.id == id && r.tag == tag;
                                   });
        Id owner = record != state.tag_records.end() ? record->owner : Id{0};
        if (owner != user->user_id) {
            send_error(res, 403, "only self-created tags can be removed");
            return;
        }
        tags->erase(tag);
        state.tag_records.erase(record);
    }
    send_json(res, json{{"id", id}, {"tags", *tags}});
}

void MockHub::Impl::delete_entity(const httplib::Request& req, httplib::Response& res) {
    const HubUser* user = require_writer(req, res);
    if (!user) return;
    const std::string kind = req.matches[1];
    Id id = std::stoll(req.matches[2]);

    Id uploader = -1;
    bool found = false;
    if (kind == "data") {
        auto it = state.datasets.find(id);
        if (it != state.datasets.end()) {
            found = true;
            uploader = it->second.desc.uploader;
        }
    } else if (kind == "flow") {
        auto it = state.flows.find(id);
        if (it != state.flows.end()) {
            found = true;
            uploader = it->second.uploader;
        }
    } else if (kind == "run") {
        auto it = state.runs.find(id);
        if (it != state.runs.end()) {
            found = true;
            uploader = it->second.run.uploader;
        }
    } else {
        send_error(res, 403, "tasks cannot be deleted through the API");
        return;
    }
    if (!found) {
        send_error(res, 404, kind + " " + std::to_string(id) + " not found");
        return;
    }
    if (uploader != user->user_id) {
        send_error(res, 403, "only the uploader may delete this " + kind);
        return;
    }

    if (kind == "data") state.datasets.erase(id);
    if (kind == "flow") state.flows.erase(id);
    if (kind == "run") state.runs.erase(id);
    state.tag_records.erase(std::remove_if(state.tag_records.begin(), state.tag_records.end(),
                                           [&](const TagRecord& r) {
                                               return r.kind == kind && r.id == id;
                                           }),
                            state.tag_records.end());
    send_json(res, json{{"deleted", kind}, {"id", id}});
}

// ---------------------------------------------------------------------------
// Handle

MockHub::MockHub(HubState fixture) : impl_(std::make_unique<Impl>(std::move(fixture))) {}

MockHub::~MockHub() { stop(); }

void MockHub::start(int port) {
    if (impl_->server.is_running()) throw Error("hub already running");
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw Error("cannot bind hub to an ephemeral port");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port)) {
            throw Error("cannot bind hub to port " + std::to_string(port));
        }
        port_ = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void MockHub::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void MockHub::reset() {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->state = impl_->fixture;
    impl_->counts.clear();
}

std::map<std::string, std::size_t> MockHub::request_counts() const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->counts;
}

std::size_t MockHub::request_count(const std::string& key) const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->counts.find(key);
    return it == impl_->counts.end() ? 0 : it->second;
}

HubState MockHub::snapshot() const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->state;
}

}  // namespace mlhub
