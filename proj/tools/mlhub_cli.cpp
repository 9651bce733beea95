// mlhub: command-line client for the hub.
//
// Subcommands cover the everyday workflows (config, list, get, run, tag,
// cache) plus the benchmark harness (`bench`) and a standalone local hub
// (`hub serve`). Errors go to stderr and the process exits nonzero exactly
// when a command fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlhub/arff.hpp"
#include "mlhub/bench.hpp"
#include "mlhub/cache.hpp"
#include "mlhub/client.hpp"
#include "mlhub/config.hpp"
#include "mlhub/csv.hpp"
#include "mlhub/errors.hpp"
#include "mlhub/learners.hpp"
#include "mlhub/mockhub.hpp"
#include "mlhub/model.hpp"
#include "mlhub/runner.hpp"
#include "mlhub/wire.hpp"

namespace {

using namespace mlhub;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Shared option state

struct GlobalOpts {
    std::string server;
    std::string apikey;
    std::string cachedir;
    bool yes = false;
    bool csv_out = false;
    bool json_out = false;
};

Config effective_config(const GlobalOpts& g) {
    Config cfg = load_config(config_home());
    if (!g.server.empty()) cfg.server_url = g.server;
    if (!g.apikey.empty()) cfg.apikey = g.apikey;
    if (!g.cachedir.empty()) cfg.cachedir = g.cachedir;
    validate_config(cfg);
    return cfg;
}

Client make_client(const GlobalOpts& g) { return Client(effective_config(g)); }

void require_upload_consent(const Config& cfg, const GlobalOpts& g) {
    if (cfg.confirm_upload && !g.yes) {
        throw Error("upload requires confirmation: pass --yes or set confirm_upload=false");
    }
}

// ---------------------------------------------------------------------------
// Output helpers

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    void print_aligned(std::ostream& out) const {
        std::vector<std::size_t> width(header.size(), 0);
        for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
                width[c] = std::max(width[c], row[c].size());
            }
        }
        auto line = [&](const std::vector<std::string>& row) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c > 0) out << "  ";
                out << row[c];
                if (c + 1 < row.size()) out << std::string(width[c] - row[c].size(), ' ');
            }
            out << "\n";
        };
        line(header);
        for (const auto& row : rows) line(row);
        out << "(" << rows.size() << (rows.size() == 1 ? " row)" : " rows)") << "\n";
    }

    void print_csv(std::ostream& out) const {
        out << csv::write_row(header);
        for (const auto& row : rows) out << csv::write_row(row);
    }

    void print_json(std::ostream& out) const {
        json arr = json::array();
        for (const auto& row : rows) {
            json obj = json::object();
            for (std::size_t c = 0; c < row.size() && c < header.size(); ++c) {
                obj[header[c]] = row[c];
            }
            arr.push_back(std::move(obj));
        }
        out << arr.dump(2) << "\n";
    }

    void print(const GlobalOpts& g) const {
        if (g.json_out) {
            print_json(std::cout);
        } else if (g.csv_out) {
            print_csv(std::cout);
        } else {
            print_aligned(std::cout);
        }
    }
};

std::string join_tags(const std::vector<std::string>& tags) {
    std::string out;
    for (const auto& t : tags) {
        if (!out.empty()) out += ",";
        out += t;
    }
    return out;
}

std::string number_string(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    return arff::format_double(v);
}

std::string quality_string(const std::map<std::string, double>& qualities, const char* name) {
    auto it = qualities.find(name);
    return it == qualities.end() ? std::string() : number_string(it->second);
}

std::string round4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// Range option: accepts "n" or "lo..hi".
void add_range_option(CLI::App* cmd, const std::string& flag, std::optional<wire::Range>& slot,
                      const std::string& help) {
    cmd->add_option_function<std::string>(
        flag,
        [&slot](const std::string& text) { slot = wire::range_from_string(text); },
        help + " (exact value or lo..hi)");
}

// ---------------------------------------------------------------------------
// config

void cmd_config_show(const GlobalOpts& g) {
    const std::filesystem::path home = config_home();
    Config cfg = effective_config(g);
    std::string key = cfg.apikey;
    if (key.size() > 8) key = key.substr(0, 8) + std::string(key.size() - 8, '*');
    std::cout << "config home   " << home.string() << "\n"
              << "server_url    " << cfg.server_url << "\n"
              << "apikey        " << (key.empty() ? "(not set)" : key) << "\n"
              << "cachedir      " << cfg.cachedir.string() << "\n"
              << "verbosity     " << cfg.verbosity << "\n"
              << "confirm_upload " << (cfg.confirm_upload ? "true" : "false") << "\n";
}

void cmd_config_set(const std::string& key, const std::string& value) {
    const std::filesystem::path home = config_home();
    Config cfg = load_config(home);
    if (key == "server" || key == "server_url") {
        cfg.server_url = value;
    } else if (key == "apikey") {
        cfg.apikey = value;
    } else if (key == "cachedir") {
        cfg.cachedir = value;
    } else if (key == "verbosity") {
        cfg.verbosity = std::stoi(value);
    } else if (key == "confirm_upload") {
        if (value != "true" && value != "false") {
            throw ConfigError("confirm_upload expects true or false, got '" + value + "'");
        }
        cfg.confirm_upload = value == "true";
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
    validate_config(cfg);
    const auto path = save_config(cfg, home);
    std::cout << "wrote " << path.string() << "\n";
}

// ---------------------------------------------------------------------------
// list

void cmd_list_datasets(const GlobalOpts& g, const DataFilter& filter) {
    Client client = make_client(g);
    Table t;
    t.header = {"data_id", "name", "version", "status", "instances", "features", "classes",
                "missing", "tags"};
    for (const auto& row : client.list_datasets(filter)) {
        t.add({std::to_string(row.data_id), row.name, std::to_string(row.version),
               to_string(row.status),
               quality_string(row.qualities, "NumberOfInstances"),
               quality_string(row.qualities, "NumberOfFeatures"),
               quality_string(row.qualities, "NumberOfClasses"),
               quality_string(row.qualities, "NumberOfMissingValues"), join_tags(row.tags)});
    }
    t.print(g);
}

void cmd_list_tasks(const GlobalOpts& g, const TaskFilter& filter) {
    Client client = make_client(g);
    Table t;
    t.header = {"task_id", "type", "data_id", "data_name", "target", "estimation_procedure",
                "measure", "instances", "tags"};
    for (const auto& row : client.list_tasks(filter)) {
        t.add({std::to_string(row.task_id), to_string(row.task_type),
               std::to_string(row.data_id), row.data_name, row.target_feature,
               row.estimation_procedure, row.evaluation_measure,
               quality_string(row.qualities, "NumberOfInstances"), join_tags(row.tags)});
    }
    t.print(g);
}

void cmd_list_flows(const GlobalOpts& g, const std::optional<std::string>& tag) {
    Client client = make_client(g);
    Table t;
    t.header = {"flow_id", "name", "version", "external_version", "uploader", "tags"};
    for (const auto& flow : client.list_flows(tag)) {
        std::vector<std::string> tags(flow.tags.begin(), flow.tags.end());
        t.add({std::to_string(flow.flow_id), flow.name, std::to_string(flow.version),
               flow.external_version, std::to_string(flow.uploader), join_tags(tags)});
    }
    t.print(g);
}

void cmd_list_runs(const GlobalOpts& g, const RunSelector& selector) {
    Client client = make_client(g);
    Table t;
    t.header = {"run_id", "task_id", "flow_id", "uploader", "tags"};
    for (const auto& row : client.list_runs(selector)) {
        t.add({std::to_string(row.run_id), std::to_string(row.task_id),
               std::to_string(row.flow_id), std::to_string(row.uploader), join_tags(row.tags)});
    }
    t.print(g);
}

void cmd_list_evals(const GlobalOpts& g, const RunSelector& selector) {
    Client client = make_client(g);
    Table t;
    t.header = {"run_id", "task_id", "flow_id", "flow_name", "uploader", "predictive_accuracy",
                "area_under_roc_curve", "tags"};
    for (const auto& row : client.list_run_evaluations(selector)) {
        auto measure = [&](const char* name) {
            auto it = row.measures.find(name);
            return it == row.measures.end() ? std::string() : arff::format_double(it->second.aggregate);
        };
        t.add({std::to_string(row.run_id), std::to_string(row.task_id),
               std::to_string(row.flow_id), row.flow_name, std::to_string(row.uploader),
               measure("predictive_accuracy"), measure("area_under_roc_curve"),
               join_tags(row.tags)});
    }
    t.print(g);
}

// ---------------------------------------------------------------------------
// get

std::string join_set(const std::set<std::string>& values) {
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ", ";
        out += v;
    }
    return out.empty() ? "(none)" : out;
}

void cmd_get_dataset(const GlobalOpts& g, Id id) {
    Client client = make_client(g);
    DataSet ds = client.get_dataset(id);
    std::cout << "data set " << ds.desc.data_id << ": " << ds.desc.name << " (v"
              << ds.desc.version << ", " << to_string(ds.desc.status) << ")\n"
              << "  target     " << ds.desc.default_target_attribute << "\n"
              << "  licence    " << (ds.desc.licence.empty() ? "(unspecified)" : ds.desc.licence)
              << "\n"
              << "  uploaded   " << ds.desc.upload_date << " by user " << ds.desc.uploader << "\n"
              << "  rows       " << ds.relation.rows.size() << "\n"
              << "  attributes " << ds.relation.attributes.size() << "\n"
              << "  tags       " << join_set(ds.desc.tags) << "\n";
    if (!ds.desc.qualities.empty()) {
        std::cout << "  qualities\n";
        for (const auto& [name, value] : ds.desc.qualities) {
            std::cout << "    " << name << " = " << number_string(value) << "\n";
        }
    }
}

void cmd_get_task(const GlobalOpts& g, Id id) {
    Client client = make_client(g);
    Task task = client.get_task(id);
    std::cout << "task " << task.task_id << ": " << to_string(task.task_type) << "\n"
              << "  data set   " << task.data_id << "\n"
              << "  target     " << task.target_feature << "\n"
              << "  estimation " << task.estimation_procedure.name()
              << (task.estimation_procedure.stratified ? " (stratified)" : "") << "\n"
              << "  measure    " << task.evaluation_measure << "\n"
              << "  splits     " << task.splits.size() << " repeat(s) x "
              << (task.splits.empty() ? 0 : task.splits[0].size()) << " fold(s)\n"
              << "  tags       " << join_set(task.tags) << "\n";
}

void cmd_get_flow(const GlobalOpts& g, Id id) {
    Client client = make_client(g);
    Flow flow = client.get_flow(id);
    std::cout << "flow " << flow.flow_id << ": " << flow.name << " (v" << flow.version << ")\n"
              << "  external_version " << flow.external_version << "\n"
              << "  uploader         " << flow.uploader << "\n"
              << "  description      " << flow.description << "\n"
              << "  tags             " << join_set(flow.tags) << "\n";
    if (!flow.parameters.empty()) {
        std::cout << "  parameters\n";
        for (const auto& p : flow.parameters) {
            std::cout << "    " << p.name << " : " << p.data_type << " = " << p.default_value
                      << "\n";
        }
    }
}

void print_run_details(const Run& run) {
    std::cout << "run " << run.run_id << "\n"
              << "  task     " << run.task_id << "\n"
              << "  flow     " << run.flow_id << "\n"
              << "  uploader " << run.uploader << "\n"
              << "  tags     " << join_set(run.tags) << "\n";
    if (!run.parameter_settings.empty()) {
        std::cout << "  parameters\n";
        for (const auto& p : run.parameter_settings) {
            std::cout << "    " << p.name << " = " << p.value
                      << (p.defaulted ? " (default)" : "") << "\n";
        }
    }
    if (!run.seed_settings.empty()) {
        std::cout << "  seeds\n";
        for (const auto& [name, value] : run.seed_settings) {
            std::cout << "    " << name << " = " << value << "\n";
        }
    }
    if (!run.evaluations.empty()) {
        std::cout << "  evaluations\n";
        for (const auto& [measure, values] : run.evaluations) {
            std::cout << "    " << measure << " = " << round4(values.aggregate) << " over "
                      << values.per_fold.size() << " folds\n";
        }
    }
    std::cout << "  predictions " << run.predictions.size() << " rows\n";
}

void cmd_get_run(const GlobalOpts& g, Id id) {
    Client client = make_client(g);
    print_run_details(client.get_run(id));
}

// ---------------------------------------------------------------------------
// run

struct RunOpts {
    Id task_id = 0;
    std::string learner;
    std::vector<std::string> params;
    std::uint64_t seed = 1;
    bool upload = false;
    std::vector<std::string> tags;
};

void cmd_run(const GlobalOpts& g, const RunOpts& opts) {
    Config cfg = effective_config(g);
    if (opts.upload) require_upload_consent(cfg, g);
    Client client{cfg};

    LearnerSpec spec = make_learner(opts.learner);
    for (const auto& kv : opts.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("--param expects name=value, got '" + kv + "'");
        }
        set_hyperparameter(spec, kv.substr(0, eq), kv.substr(eq + 1));
    }

    Task task = client.get_task(opts.task_id);
    DataSet dataset = client.get_dataset(task.data_id);
    Run run = run_task(task, dataset, spec, opts.seed);

    std::cout << "task " << task.task_id << " (" << dataset.desc.name << "), learner " << spec.name
              << ", seed " << opts.seed << "\n";
    for (const auto& [measure, values] : run.evaluations) {
        const auto [lo, hi] =
            std::minmax_element(values.per_fold.begin(), values.per_fold.end());
        std::cout << "  " << measure << ": " << round4(values.aggregate) << " (folds "
                  << round4(*lo) << " .. " << round4(*hi) << ")\n";
    }

    if (opts.upload) {
        run.flow_id = client.upload_flow(spec).flow_id;
        const Id run_id = client.upload_run(run, opts.tags);
        std::cout << "uploaded run " << run_id << " (flow " << run.flow_id << ")\n";
    }
}

// ---------------------------------------------------------------------------
// tag / untag

std::string wire_kind(const std::string& kind) {
    if (kind == "dataset" || kind == "data") return "data";
    if (kind == "task" || kind == "flow" || kind == "run") return kind;
    throw ValidationError("unknown entity kind '" + kind + "' (expected dataset|task|flow|run)");
}

// ---------------------------------------------------------------------------
// cache

void cmd_cache_status(const GlobalOpts& g) {
    Client client = make_client(g);
    const CacheStatus st = client.cache().status();
    std::cout << "cache root " << client.cache().root().string() << "\n"
              << "  entries  " << st.entries << "\n"
              << "  corrupt  " << st.corrupt << "\n"
              << "  bytes    " << st.bytes << "\n";
    for (const auto& [kind, count] : st.by_kind) {
        std::cout << "  " << kind << ": " << count << "\n";
    }
}

void cmd_cache_clear(const GlobalOpts& g) {
    Client client = make_client(g);
    std::cout << "removed " << client.cache().clear() << " cached entries\n";
}

void cmd_cache_populate(const GlobalOpts& g, const std::vector<Id>& datasets,
                        const std::vector<Id>& tasks) {
    if (datasets.empty() && tasks.empty()) {
        throw ValidationError("cache populate needs --dataset and/or --task ids");
    }
    Client client = make_client(g);
    std::size_t fetched = 0;
    for (Id id : tasks) {
        Task task = client.get_task(id);
        client.get_dataset(task.data_id);
        fetched += 2;
    }
    for (Id id : datasets) {
        client.get_dataset(id);
        ++fetched;
    }
    std::cout << "fetched " << fetched << " objects into " << client.cache().root().string()
              << "\n";
}

// ---------------------------------------------------------------------------
// bench

std::filesystem::path make_temp_dir(const char* prefix) {
    std::random_device rd;
    for (int attempt = 0; attempt < 32; ++attempt) {
        auto candidate = std::filesystem::temp_directory_path() /
                         (std::string(prefix) + std::to_string(rd()));
        std::error_code ec;
        if (std::filesystem::create_directories(candidate, ec) && !ec) return candidate;
    }
    throw Error("cannot create a temporary directory");
}

void cmd_bench(const GlobalOpts& g, bench::BenchOptions opts, bool server_given) {
    std::optional<MockHub> hub;
    std::filesystem::path temp_cache;
    Config cfg;
    if (server_given) {
        cfg = effective_config(g);
        require_upload_consent(cfg, g);
    } else {
        // No server chosen: benchmark against a fresh in-process hub loaded
        // with the bundled fixture. Its responses are ephemeral, so they get
        // a throwaway cache directory rather than the user's.
        hub.emplace(build_default_fixture());
        hub->start();
        temp_cache = make_temp_dir("mlhub-bench-cache-");
        cfg = Config{};
        cfg.server_url = hub->url();
        cfg.apikey = kWriterApiKey;
        cfg.cachedir = temp_cache;
    }

    Client client{cfg};
    const auto started = std::chrono::steady_clock::now();
    const bench::BenchReport report = bench::run_suite(client, opts);
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                              started);
    const auto paths = bench::write_artifacts(report, opts.out_dir);

    std::size_t uploaded = 0;
    for (const auto& cell : report.cells) uploaded += cell.uploaded_run_id != 0;
    std::cout << "suite " << opts.suite << ": " << report.task_ids.size() << " tasks x "
              << report.suite.size() << " learners, seed " << opts.seed << ", "
              << elapsed.count() / 1000.0 << " s\n";
    std::cout << "uploaded " << uploaded << " runs tagged '" << opts.tag << "' to "
              << cfg.server_url << "\n";
    for (const auto& path : paths) std::cout << "wrote " << path.string() << "\n";

    if (!temp_cache.empty()) {
        std::error_code ec;
        std::filesystem::remove_all(temp_cache, ec);
    }
    if (hub) hub->stop();
}

// ---------------------------------------------------------------------------
// hub serve

void cmd_hub_serve(int port) {
    MockHub hub(build_default_fixture());
    hub.start(port);
    std::cout << "hub listening on " << hub.url() << "\n"
              << "  read-only key " << kReadOnlyApiKey << " (user 348)\n"
              << "  writer key    " << kWriterApiKey << " (user 1001)\n"
              << "  writer key    " << kSecondWriterApiKey << " (user 1002)\n"
              << "press Ctrl-C to stop\n";
    for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mlhub: hub client and benchmark harness"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--server", g.server, "Hub base URL (overrides config)");
    app.add_option("--apikey", g.apikey, "API key (overrides config)");
    app.add_option("--cache-dir", g.cachedir, "Cache directory (overrides config)");
    app.add_flag("--yes", g.yes, "Confirm uploads without prompting");

    // config ----------------------------------------------------------------
    auto* config_cmd = app.add_subcommand("config", "Show or edit the configuration file");
    config_cmd->require_subcommand(1);
    auto* config_show = config_cmd->add_subcommand("show", "Print the effective configuration");
    config_show->callback([&] { cmd_config_show(g); });
    static std::string cfg_key, cfg_value;
    auto* config_set = config_cmd->add_subcommand("set", "Set one configuration key");
    config_set->add_option("key", cfg_key, "server_url|apikey|cachedir|verbosity|confirm_upload")
        ->required();
    config_set->add_option("value", cfg_value, "New value")->required();
    config_set->callback([&] { cmd_config_set(cfg_key, cfg_value); });

    // list ------------------------------------------------------------------
    auto* list_cmd = app.add_subcommand("list", "List hub objects");
    list_cmd->require_subcommand(1);
    auto add_output_flags = [&](CLI::App* cmd) {
        cmd->add_flag("--csv", g.csv_out, "Emit CSV instead of an aligned table");
        cmd->add_flag("--json", g.json_out, "Emit JSON instead of an aligned table");
    };

    static DataFilter data_filter;
    auto* list_datasets = list_cmd->add_subcommand("datasets", "List data sets");
    list_datasets->add_option("--tag", [&](auto& v) { data_filter.tag = v[0]; return true; },
                              "Only data sets carrying this tag");
    list_datasets->add_option("--status", [&](auto& v) { data_filter.status = v[0]; return true; },
                              "active or deactivated");
    add_range_option(list_datasets, "--classes", data_filter.number_of_classes, "Class count");
    add_range_option(list_datasets, "--instances", data_filter.number_of_instances, "Row count");
    add_range_option(list_datasets, "--features", data_filter.number_of_features, "Feature count");
    add_range_option(list_datasets, "--missing", data_filter.number_of_missing_values,
                     "Missing-value count");
    list_datasets->add_option("--limit", [&](auto& v) { data_filter.limit = std::stoll(v[0]); return true; },
                              "Maximum rows");
    list_datasets->add_option("--offset", [&](auto& v) { data_filter.offset = std::stoll(v[0]); return true; },
                              "Rows to skip");
    add_output_flags(list_datasets);
    list_datasets->callback([&] { cmd_list_datasets(g, data_filter); });

    static TaskFilter task_filter;
    auto* list_tasks = list_cmd->add_subcommand("tasks", "List tasks");
    list_tasks->add_option("--type", [&](auto& v) { task_filter.task_type = v[0]; return true; },
                           "Task type name");
    add_range_option(list_tasks, "--classes", task_filter.number_of_classes, "Class count");
    add_range_option(list_tasks, "--instances", task_filter.number_of_instances, "Row count");
    add_range_option(list_tasks, "--features", task_filter.number_of_features, "Feature count");
    add_range_option(list_tasks, "--missing", task_filter.number_of_missing_values,
                     "Missing-value count");
    list_tasks->add_option("--data-tag", [&](auto& v) { task_filter.data_tag = v[0]; return true; },
                           "Tag on the task's data set");
    list_tasks->add_option("--tag", [&](auto& v) { task_filter.tag = v[0]; return true; },
                           "Tag on the task itself");
    list_tasks->add_option("--ep", [&](auto& v) { task_filter.estimation_procedure = v[0]; return true; },
                           "Estimation procedure name, e.g. '10-fold Crossvalidation'");
    list_tasks->add_option("--limit", [&](auto& v) { task_filter.limit = std::stoll(v[0]); return true; },
                           "Maximum rows");
    list_tasks->add_option("--offset", [&](auto& v) { task_filter.offset = std::stoll(v[0]); return true; },
                           "Rows to skip");
    add_output_flags(list_tasks);
    list_tasks->callback([&] { cmd_list_tasks(g, task_filter); });

    static std::optional<std::string> flow_tag;
    auto* list_flows = list_cmd->add_subcommand("flows", "List flows");
    list_flows->add_option("--tag", [&](auto& v) { flow_tag = v[0]; return true; },
                           "Only flows carrying this tag");
    add_output_flags(list_flows);
    list_flows->callback([&] { cmd_list_flows(g, flow_tag); });

    static RunSelector run_selector;
    auto add_run_selector = [&](CLI::App* cmd) {
        cmd->add_option("--task", [&](auto& v) { run_selector.task_id = std::stoll(v[0]); return true; },
                        "Only runs on this task");
        cmd->add_option("--flow", [&](auto& v) { run_selector.flow_id = std::stoll(v[0]); return true; },
                        "Only runs of this flow");
        cmd->add_option("--uploader", [&](auto& v) { run_selector.uploader = std::stoll(v[0]); return true; },
                        "Only runs by this user");
        cmd->add_option("--tag", [&](auto& v) { run_selector.tag = v[0]; return true; },
                        "Only runs carrying this tag");
        cmd->add_option("--limit", [&](auto& v) { run_selector.limit = std::stoll(v[0]); return true; },
                        "Maximum rows");
        cmd->add_option("--offset", [&](auto& v) { run_selector.offset = std::stoll(v[0]); return true; },
                        "Rows to skip");
        add_output_flags(cmd);
    };
    auto* list_runs = list_cmd->add_subcommand("runs", "List runs");
    add_run_selector(list_runs);
    list_runs->callback([&] { cmd_list_runs(g, run_selector); });
    auto* list_evals = list_cmd->add_subcommand("evals", "List run evaluations");
    add_run_selector(list_evals);
    list_evals->callback([&] { cmd_list_evals(g, run_selector); });

    // get ---------------------------------------------------------------
    auto* get_cmd = app.add_subcommand("get", "Download one object (cache first)");
    get_cmd->require_subcommand(1);
    static Id get_id = 0;
    for (const auto& [name, fn] : std::vector<std::pair<const char*, void (*)(const GlobalOpts&, Id)>>{
             {"dataset", &cmd_get_dataset},
             {"task", &cmd_get_task},
             {"flow", &cmd_get_flow},
             {"run", &cmd_get_run}}) {
        auto* sub = get_cmd->add_subcommand(name, std::string("Fetch a ") + name);
        sub->add_option("id", get_id, "Hub id")->required();
        auto* callback_fn = fn;
        sub->callback([&g, callback_fn] { callback_fn(g, get_id); });
    }

    // run ---------------------------------------------------------------
    static RunOpts run_opts;
    auto* run_cmd = app.add_subcommand("run", "Execute a learner on a task");
    run_cmd->add_option("--task", run_opts.task_id, "Task id")->required();
    run_cmd->add_option("--learner", run_opts.learner, "Learner name or alias")->required();
    run_cmd->add_option("--param", run_opts.params, "Hyperparameter name=value (repeatable)");
    run_cmd->add_option("--seed", run_opts.seed, "Run seed (default 1)");
    run_cmd->add_flag("--upload", run_opts.upload, "Upload the finished run to the hub");
    run_cmd->add_option("--tag", run_opts.tags, "Tag for the uploaded run (repeatable)");
    run_cmd->callback([&] { cmd_run(g, run_opts); });

    // tag / untag ---------------------------------------------------------
    static std::string tag_kind, tag_value;
    static Id tag_id = 0;
    auto* tag_cmd = app.add_subcommand("tag", "Attach a tag to an object");
    tag_cmd->add_option("kind", tag_kind, "dataset|task|flow|run")->required();
    tag_cmd->add_option("id", tag_id, "Hub id")->required();
    tag_cmd->add_option("tag", tag_value, "Tag to attach")->required();
    tag_cmd->callback([&] {
        make_client(g).tag_object(wire_kind(tag_kind), tag_id, tag_value);
        std::cout << "tagged " << tag_kind << " " << tag_id << " with '" << tag_value << "'\n";
    });
    auto* untag_cmd = app.add_subcommand("untag", "Remove a tag you attached");
    untag_cmd->add_option("kind", tag_kind, "dataset|task|flow|run")->required();
    untag_cmd->add_option("id", tag_id, "Hub id")->required();
    untag_cmd->add_option("tag", tag_value, "Tag to remove")->required();
    untag_cmd->callback([&] {
        make_client(g).untag_object(wire_kind(tag_kind), tag_id, tag_value);
        std::cout << "removed tag '" << tag_value << "' from " << tag_kind << " " << tag_id
                  << "\n";
    });

    // cache ---------------------------------------------------------------
    auto* cache_cmd = app.add_subcommand("cache", "Inspect or clear the local cache");
    cache_cmd->require_subcommand(1);
    cache_cmd->add_subcommand("status", "Entry and byte counts")->callback([&] {
        cmd_cache_status(g);
    });
    cache_cmd->add_subcommand("clear", "Remove every cached entry")->callback([&] {
        cmd_cache_clear(g);
    });
    static std::vector<Id> populate_datasets, populate_tasks;
    auto* cache_populate = cache_cmd->add_subcommand("populate", "Prefetch objects into the cache");
    cache_populate->add_option("--dataset", populate_datasets, "Data set id (repeatable)");
    cache_populate->add_option("--task", populate_tasks,
                               "Task id (repeatable; also fetches its data set)");
    cache_populate->callback([&] { cmd_cache_populate(g, populate_datasets, populate_tasks); });

    // bench ---------------------------------------------------------------
    static bench::BenchOptions bench_opts;
    static std::string bench_out = "bench-out";
    auto* bench_cmd = app.add_subcommand(
        "bench",
        "Run a benchmark suite and emit reports (targets an in-process hub with the bundled "
        "fixture unless --server is given)");
    bench_cmd->add_option("--suite", bench_opts.suite, "Suite name (case-study)");
    bench_cmd->add_option("--out", bench_out, "Output directory (default bench-out)");
    bench_cmd->add_option("--seed", bench_opts.seed, "Suite seed (default 42)");
    bench_cmd->add_option("--jobs", bench_opts.jobs, "Parallel grid cells (default 1)");
    bench_cmd->add_option("--tag", bench_opts.tag, "Tag for uploaded runs (default study_30)");
    bench_cmd->callback([&] {
        bench_opts.out_dir = bench_out;
        cmd_bench(g, bench_opts, app.count("--server") > 0);
    });

    // hub -----------------------------------------------------------------
    auto* hub_cmd = app.add_subcommand("hub", "Local hub for offline use");
    hub_cmd->require_subcommand(1);
    static int hub_port = 8080;
    auto* hub_serve = hub_cmd->add_subcommand("serve", "Serve the bundled fixture over HTTP");
    hub_serve->add_option("--port", hub_port, "Port (default 8080)");
    hub_serve->callback([&] { cmd_hub_serve(hub_port); });

    // Let global options (--server, --yes, ...) appear after the subcommand.
    std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* cmd) {
        for (CLI::App* sub : cmd->get_subcommands([](const CLI::App*) { return true; })) {
            sub->fallthrough();
            enable_fallthrough(sub);
        }
    };
    enable_fallthrough(&app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
