#include "mlhub/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "mlhub/arff.hpp"
#include "mlhub/csv.hpp"
#include "mlhub/errors.hpp"
#include "mlhub/rng.hpp"

namespace mlhub::bench {

namespace {

LearnerSpec with_params(std::string_view name,
                        std::initializer_list<std::pair<const char*, const char*>> params) {
    LearnerSpec spec = make_learner(name);
    for (const auto& [k, v] : params) set_hyperparameter(spec, k, v);
    return spec;
}

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::vector<SuiteEntry> case_study_suite() {
    return {
        {"tree", with_params("tree", {})},
        {"tree_d5", with_params("tree", {{"max_depth", "5"}})},
        {"bagged_tree", with_params("bagged_tree", {{"bw_iters", "50"}})},
        {"bagged_tree_d5", with_params("bagged_tree", {{"bw_iters", "50"}, {"max_depth", "5"}})},
        {"forest", with_params("forest", {{"ntree", "50"}})},
        {"majority", with_params("majority", {})},
    };
}

std::vector<Id> case_study_tasks(Client& client) {
    TaskFilter filter;
    filter.task_type = "Supervised Classification";
    filter.number_of_classes = wire::exact(2);
    filter.number_of_missing_values = wire::exact(0);
    filter.number_of_instances = wire::Range{100, 999};
    filter.data_tag = "uci";
    filter.estimation_procedure = "10-fold Crossvalidation";
    std::vector<Id> ids;
    for (const auto& row : client.list_tasks(filter)) ids.push_back(row.task_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

BenchReport run_suite(Client& client, const BenchOptions& options) {
    if (options.suite != "case-study") {
        throw ValidationError("unknown benchmark suite '" + options.suite + "'");
    }
    if (options.jobs < 1) throw ValidationError("jobs must be >= 1");

    BenchReport report;
    report.suite = case_study_suite();
    report.task_ids = case_study_tasks(client);
    if (report.task_ids.empty()) throw Error("benchmark suite resolved no tasks");

    // Fetch tasks and datasets once, up front and single-threaded, so the
    // workers touch only immutable local state.
    std::map<Id, Task> tasks;
    std::map<Id, DataSet> datasets;
    for (Id task_id : report.task_ids) {
        Task task = client.get_task(task_id);
        if (!datasets.count(task.data_id)) datasets.emplace(task.data_id, client.get_dataset(task.data_id));
        tasks.emplace(task_id, std::move(task));
    }

    const std::size_t n_learners = report.suite.size();
    report.cells.resize(report.task_ids.size() * n_learners);

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= report.cells.size()) return;
            const Id task_id = report.task_ids[i / n_learners];
            const std::size_t li = i % n_learners;
            try {
                const Task& task = tasks.at(task_id);
                const DataSet& dataset = datasets.at(task.data_id);
                const std::uint64_t cell_seed = Rng::derive_seed(
                    Rng::derive_seed(options.seed, static_cast<std::uint64_t>(task_id)), li);
                CellResult cell;
                cell.task_id = task_id;
                cell.data_name = dataset.desc.name;
                cell.learner_label = report.suite[li].label;
                cell.learner_index = li;
                cell.run = run_task(task, dataset, report.suite[li].spec, cell_seed);
                report.cells[i] = std::move(cell);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const std::size_t n_threads =
        std::min(static_cast<std::size_t>(options.jobs), report.cells.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    if (options.upload) {
        // One flow per distinct learner name; repeated uploads are idempotent.
        std::map<std::string, Id> flow_ids;
        for (const auto& entry : report.suite) {
            if (flow_ids.count(entry.spec.name)) continue;
            flow_ids[entry.spec.name] = client.upload_flow(entry.spec).flow_id;
        }
        for (std::size_t i = 0; i < report.cells.size(); ++i) {
            CellResult& cell = report.cells[i];
            cell.run.flow_id = flow_ids.at(report.suite[cell.learner_index].spec.name);
            cell.uploaded_run_id = client.upload_run(cell.run, {options.tag});
        }
    }

    std::vector<RunContext> contexts;
    contexts.reserve(report.cells.size());
    for (const auto& cell : report.cells) {
        contexts.push_back({cell.run, cell.learner_label, "predictive_accuracy"});
    }
    report.table = convert_runs_to_benchmark(contexts);
    return report;
}

std::string results_csv(const BenchReport& report) {
    std::vector<const CellResult*> order;
    order.reserve(report.cells.size());
    for (const auto& cell : report.cells) order.push_back(&cell);
    std::sort(order.begin(), order.end(), [](const CellResult* a, const CellResult* b) {
        if (a->task_id != b->task_id) return a->task_id < b->task_id;
        return a->learner_label < b->learner_label;
    });

    std::string out = csv::write_row({"task", "data_name", "learner", "fold", "accuracy"});
    for (const CellResult* cell : order) {
        const auto it = cell->run.evaluations.find("predictive_accuracy");
        if (it == cell->run.evaluations.end()) {
            throw Error("run for task " + std::to_string(cell->task_id) +
                        " carries no predictive_accuracy evaluation");
        }
        const auto& folds = it->second.per_fold;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            out += csv::write_row({std::to_string(cell->task_id), cell->data_name,
                                   cell->learner_label, std::to_string(f),
                                   arff::format_double(folds[f])});
        }
    }
    return out;
}

std::string summary_markdown(const BenchReport& report) {
    std::string out = "# Benchmark summary\n\n";
    out += "Aggregate predictive accuracy (mean over cross-validation folds); ";
    out += "best per task in bold.\n\n";

    out += "| task | data |";
    for (const auto& entry : report.suite) out += " " + entry.label + " |";
    out += "\n|---:|---|";
    for (std::size_t i = 0; i < report.suite.size(); ++i) out += "---:|";
    out += "\n";

    // cells are laid out task-major in roster order
    const std::size_t n_learners = report.suite.size();
    std::vector<double> learner_sums(n_learners, 0.0);
    for (std::size_t ti = 0; ti < report.task_ids.size(); ++ti) {
        const CellResult* row_cells = &report.cells[ti * n_learners];
        double best = 0.0;
        for (std::size_t li = 0; li < n_learners; ++li) {
            best = std::max(best, row_cells[li].run.evaluations.at("predictive_accuracy").aggregate);
        }
        out += "| " + std::to_string(report.task_ids[ti]) + " | " + row_cells[0].data_name + " |";
        for (std::size_t li = 0; li < n_learners; ++li) {
            const double v = row_cells[li].run.evaluations.at("predictive_accuracy").aggregate;
            learner_sums[li] += v;
            const std::string text = fmt4(v);
            out += v == best ? " **" + text + "** |" : " " + text + " |";
        }
        out += "\n";
    }

    out += "| | mean |";
    for (std::size_t li = 0; li < n_learners; ++li) {
        out += " " + fmt4(learner_sums[li] / static_cast<double>(report.task_ids.size())) + " |";
    }
    out += "\n";
    return out;
}

std::string accuracy_svg(const BenchReport& report) {
    static const char* kPalette[] = {"#4269d0", "#efb118", "#ff725c",
                                     "#6cc5b0", "#9c6b4e", "#3ca951"};
    const std::size_t n_tasks = report.task_ids.size();
    const std::size_t n_learners = report.suite.size();

    const double width = 960, height = 520;
    const double left = 70, right = width - 190, top = 46, bottom = height - 78;

    double lo = 1.0, hi = 0.0;
    auto aggregate = [&](std::size_t ti, std::size_t li) {
        return report.cells[ti * n_learners + li].run.evaluations.at("predictive_accuracy").aggregate;
    };
    for (std::size_t ti = 0; ti < n_tasks; ++ti) {
        for (std::size_t li = 0; li < n_learners; ++li) {
            lo = std::min(lo, aggregate(ti, li));
            hi = std::max(hi, aggregate(ti, li));
        }
    }
    double y_min = std::max(0.0, std::floor((lo - 0.03) * 20.0) / 20.0);
    double y_max = std::min(1.0, std::ceil((hi + 0.03) * 20.0) / 20.0);
    if (y_max - y_min < 0.1) y_min = std::max(0.0, y_max - 0.1);

    auto x_of = [&](std::size_t ti, std::size_t li) {
        const double slot = (right - left) / static_cast<double>(n_tasks);
        const double center = left + slot * (static_cast<double>(ti) + 0.5);
        const double offset = (static_cast<double>(li) - (static_cast<double>(n_learners) - 1) / 2.0) * 7.0;
        return center + offset;
    };
    auto y_of = [&](double v) {
        return bottom - (v - y_min) / (y_max - y_min) * (bottom - top);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt1(width) + "\" height=\"" +
           fmt1(height) + "\" viewBox=\"0 0 " + fmt1(width) + " " + fmt1(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt1(width / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\" "
           "fill=\"#222\">Cross-validated predictive accuracy per task</text>\n";

    // Horizontal gridlines and y tick labels every 0.05.
    for (double v = y_min; v <= y_max + 1e-9; v += 0.05) {
        const double y = y_of(v);
        svg += "<line x1=\"" + fmt1(left) + "\" y1=\"" + fmt1(y) + "\" x2=\"" + fmt1(right) +
               "\" y2=\"" + fmt1(y) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt1(left - 8) + "\" y=\"" + fmt1(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#444\">" + fmt4(v).substr(0, 4) + "</text>\n";
    }
    // Axes.
    svg += "<line x1=\"" + fmt1(left) + "\" y1=\"" + fmt1(top) + "\" x2=\"" + fmt1(left) +
           "\" y2=\"" + fmt1(bottom) + "\" stroke=\"#222\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fmt1(left) + "\" y1=\"" + fmt1(bottom) + "\" x2=\"" + fmt1(right) +
           "\" y2=\"" + fmt1(bottom) + "\" stroke=\"#222\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"24\" y=\"" + fmt1((top + bottom) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\" "
           "transform=\"rotate(-90 24 " + fmt1((top + bottom) / 2) +
           ")\">predictive accuracy</text>\n";

    // Task group labels.
    for (std::size_t ti = 0; ti < n_tasks; ++ti) {
        const double slot = (right - left) / static_cast<double>(n_tasks);
        const double center = left + slot * (static_cast<double>(ti) + 0.5);
        svg += "<text x=\"" + fmt1(center) + "\" y=\"" + fmt1(bottom + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#222\">task " + std::to_string(report.task_ids[ti]) + "</text>\n";
        svg += "<text x=\"" + fmt1(center) + "\" y=\"" + fmt1(bottom + 36) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#666\">" + report.cells[ti * n_learners].data_name + "</text>\n";
    }

    // One polyline + point series per learner.
    for (std::size_t li = 0; li < n_learners; ++li) {
        const char* color = kPalette[li % 6];
        std::string points;
        for (std::size_t ti = 0; ti < n_tasks; ++ti) {
            if (ti > 0) points += " ";
            points += fmt1(x_of(ti, li)) + "," + fmt1(y_of(aggregate(ti, li)));
        }
        svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\" stroke-opacity=\"0.65\"/>\n";
        for (std::size_t ti = 0; ti < n_tasks; ++ti) {
            svg += "<circle cx=\"" + fmt1(x_of(ti, li)) + "\" cy=\"" +
                   fmt1(y_of(aggregate(ti, li))) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
        }
    }

    // Legend.
    const double legend_x = right + 16;
    for (std::size_t li = 0; li < n_learners; ++li) {
        const double y = top + 12 + 22.0 * static_cast<double>(li);
        const char* color = kPalette[li % 6];
        svg += "<line x1=\"" + fmt1(legend_x) + "\" y1=\"" + fmt1(y) + "\" x2=\"" +
               fmt1(legend_x + 22) + "\" y2=\"" + fmt1(y) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        svg += "<circle cx=\"" + fmt1(legend_x + 11) + "\" cy=\"" + fmt1(y) + "\" r=\"4\" fill=\"" +
               color + "\"/>\n";
        svg += "<text x=\"" + fmt1(legend_x + 30) + "\" y=\"" + fmt1(y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">" +
               report.suite[li].label + "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

std::vector<std::filesystem::path> write_artifacts(const BenchReport& report,
                                                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::vector<std::pair<const char*, std::string>> files = {
        {"results.csv", results_csv(report)},
        {"summary.md", summary_markdown(report)},
        {"accuracy.svg", accuracy_svg(report)},
    };
    std::vector<std::filesystem::path> paths;
    for (const auto& [name, content] : files) {
        const std::filesystem::path path = out_dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("failed writing " + path.string());
        paths.push_back(path);
    }
    return paths;
}

}  // namespace mlhub::bench
