// Python bindings: the core operations (ARFF round-trip, hub client, local
// cross-validated runs, the in-process hub) exposed as mlhub._core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlhub/arff.hpp"
#include "mlhub/client.hpp"
#include "mlhub/config.hpp"
#include "mlhub/learners.hpp"
#include "mlhub/mockhub.hpp"
#include "mlhub/model.hpp"
#include "mlhub/rng.hpp"
#include "mlhub/runner.hpp"
#include "mlhub/wire.hpp"

namespace py = pybind11;
using namespace mlhub;

namespace {

py::dict measures_to_dict(const std::map<std::string, MeasureValues>& measures) {
    py::dict out;
    for (const auto& [name, values] : measures) {
        py::dict m;
        m["aggregate"] = values.aggregate;
        m["per_fold"] = values.per_fold;
        out[name.c_str()] = m;
    }
    return out;
}

LearnerSpec spec_from_args(const std::string& learner,
                           const std::map<std::string, std::string>& params) {
    LearnerSpec spec = make_learner(learner);
    for (const auto& [k, v] : params) set_hyperparameter(spec, k, v);
    return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hub client core: ARFF, learners, cross-validated runs, local hub";

    py::register_exception<Error>(m, "HubError");

    // ----------------------------------------------------------------- ARFF
    py::class_<arff::Relation>(m, "Relation")
        .def_property_readonly("name", [](const arff::Relation& r) { return r.name; })
        .def_property_readonly("n_rows", [](const arff::Relation& r) { return r.rows.size(); })
        .def_property_readonly("attribute_names",
                               [](const arff::Relation& r) {
                                   std::vector<std::string> names;
                                   for (const auto& a : r.attributes) names.push_back(a.name);
                                   return names;
                               })
        .def("__repr__", [](const arff::Relation& r) {
            return "<Relation '" + r.name + "' " + std::to_string(r.rows.size()) + " rows x " +
                   std::to_string(r.attributes.size()) + " attributes>";
        });

    m.def("parse_arff", [](const std::string& text) { return arff::parse(text); },
          py::arg("text"), "Parse ARFF text into a Relation.");
    m.def("write_arff", [](const arff::Relation& rel) { return arff::write(rel); },
          py::arg("relation"), "Serialize a Relation back to ARFF text.");

    // ------------------------------------------------------------- learners
    m.def("builtin_learners", [] {
        std::vector<py::dict> out;
        for (const auto& info : builtin_learners()) {
            py::dict d;
            d["name"] = info.name;
            d["short_name"] = info.short_name;
            d["description"] = info.description;
            py::dict params;
            for (const auto& p : info.parameters) params[p.name.c_str()] = p.default_value;
            d["parameters"] = params;
            out.push_back(std::move(d));
        }
        return out;
    });

    m.def(
        "cv_splits",
        [](std::size_t n_rows, int folds, int repeats, bool stratified, std::uint64_t seed,
           const std::optional<std::vector<std::int32_t>>& labels) {
            static const std::vector<std::int32_t> kNone;
            const auto& lab = labels ? *labels : kNone;
            Splits splits = make_cv_splits(n_rows, lab, folds, repeats, stratified, seed);
            std::vector<std::vector<std::pair<std::vector<Id>, std::vector<Id>>>> out;
            for (const auto& rep : splits) {
                std::vector<std::pair<std::vector<Id>, std::vector<Id>>> folds_out;
                for (const auto& fold : rep) folds_out.emplace_back(fold.train, fold.test);
                out.push_back(std::move(folds_out));
            }
            return out;
        },
        py::arg("n_rows"), py::arg("folds") = 10, py::arg("repeats") = 1,
        py::arg("stratified") = false, py::arg("seed") = 1, py::arg("labels") = py::none(),
        "Cross-validation splits as [repeat][fold] -> (train, test) row-id lists.");

    // ------------------------------------------------------------- mock hub
    py::class_<MockHub>(m, "LocalHub")
        .def(py::init([](bool include_reference_run) {
                 FixtureOptions opts;
                 opts.include_reference_run = include_reference_run;
                 return std::make_unique<MockHub>(build_default_fixture(opts));
             }),
             py::arg("include_reference_run") = true,
             "In-process hub preloaded with the bundled fixture.")
        .def("start", [](MockHub& hub, int port) { hub.start(port); }, py::arg("port") = 0)
        .def("stop", &MockHub::stop)
        .def("reset", &MockHub::reset)
        .def_property_readonly("url", &MockHub::url)
        .def_property_readonly("port", &MockHub::port)
        .def("request_count", &MockHub::request_count, py::arg("key"))
        .def("request_counts", &MockHub::request_counts);

    m.attr("READ_ONLY_APIKEY") = kReadOnlyApiKey;
    m.attr("WRITER_APIKEY") = kWriterApiKey;
    m.attr("SECOND_WRITER_APIKEY") = kSecondWriterApiKey;

    // --------------------------------------------------------------- client
    py::class_<Client>(m, "Client")
        .def(py::init([](const std::string& server, const std::string& apikey,
                         const std::string& cachedir) {
                 Config cfg;
                 cfg.server_url = server;
                 cfg.apikey = apikey;
                 cfg.cachedir = cachedir;
                 validate_config(cfg);
                 return std::make_unique<Client>(cfg);
             }),
             py::arg("server"), py::arg("apikey") = "", py::arg("cachedir") = "")
        .def("list_tasks",
             [](Client& client, const std::optional<std::string>& data_tag,
                std::optional<long long> classes, std::optional<long long> missing) {
                 TaskFilter filter;
                 filter.data_tag = data_tag;
                 if (classes) filter.number_of_classes = wire::exact(*classes);
                 if (missing) filter.number_of_missing_values = wire::exact(*missing);
                 std::vector<py::dict> out;
                 for (const auto& row : client.list_tasks(filter)) {
                     py::dict d;
                     d["task_id"] = row.task_id;
                     d["data_id"] = row.data_id;
                     d["data_name"] = row.data_name;
                     d["target"] = row.target_feature;
                     d["estimation_procedure"] = row.estimation_procedure;
                     out.push_back(std::move(d));
                 }
                 return out;
             },
             py::arg("data_tag") = py::none(), py::arg("classes") = py::none(),
             py::arg("missing") = py::none())
        .def("get_dataset",
             [](Client& client, Id data_id) {
                 DataSet ds = client.get_dataset(data_id);
                 py::dict d;
                 d["data_id"] = ds.desc.data_id;
                 d["name"] = ds.desc.name;
                 d["version"] = ds.desc.version;
                 d["target"] = ds.desc.default_target_attribute;
                 d["n_rows"] = ds.relation.rows.size();
                 d["n_attributes"] = ds.relation.attributes.size();
                 d["tags"] = std::vector<std::string>(ds.desc.tags.begin(), ds.desc.tags.end());
                 return d;
             },
             py::arg("data_id"))
        .def("get_relation",
             [](Client& client, Id data_id) { return client.get_dataset(data_id).relation; },
             py::arg("data_id"))
        .def(
            "run_task",
            [](Client& client, Id task_id, const std::string& learner,
               const std::map<std::string, std::string>& params, std::uint64_t seed, bool upload,
               const std::vector<std::string>& tags) {
                LearnerSpec spec = spec_from_args(learner, params);
                Task task = client.get_task(task_id);
                DataSet dataset = client.get_dataset(task.data_id);
                Run run;
                {
                    py::gil_scoped_release release;
                    run = mlhub::run_task(task, dataset, spec, seed);
                }
                Id run_id = 0;
                if (upload) {
                    run.flow_id = client.upload_flow(spec).flow_id;
                    run_id = client.upload_run(run, tags);
                }
                py::dict d;
                d["task_id"] = task.task_id;
                d["learner"] = spec.name;
                d["seed"] = seed;
                d["evaluations"] = measures_to_dict(run.evaluations);
                d["n_predictions"] = run.predictions.size();
                d["run_id"] = run_id;
                return d;
            },
            py::arg("task_id"), py::arg("learner"), py::arg("params") = py::dict(),
            py::arg("seed") = 1, py::arg("upload") = false,
            py::arg("tags") = std::vector<std::string>{},
            "Execute a learner on a task's cross-validation splits; optionally upload the run.")
        .def("get_run_evaluations",
             [](Client& client, Id run_id) { return measures_to_dict(client.get_run(run_id).evaluations); },
             py::arg("run_id"))
        .def("list_run_evaluations",
             [](Client& client, const std::optional<std::string>& tag) {
                 RunSelector selector;
                 selector.tag = tag;
                 std::vector<py::dict> out;
                 for (const auto& row : client.list_run_evaluations(selector)) {
                     py::dict d;
                     d["run_id"] = row.run_id;
                     d["task_id"] = row.task_id;
                     d["flow_name"] = row.flow_name;
                     d["measures"] = measures_to_dict(row.measures);
                     out.push_back(std::move(d));
                 }
                 return out;
             },
             py::arg("tag") = py::none())
        .def("cache_clear", [](Client& client) { return client.cache().clear(); });

    m.attr("__version__") = std::string(kClientVersion);
}
