#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mlhub/client.hpp"
#include "mlhub/learners.hpp"
#include "mlhub/model.hpp"
#include "mlhub/runner.hpp"

namespace mlhub::bench {

/// One roster entry of a benchmark suite: a display label (results column)
/// plus the fully parameterized learner behind it.
struct SuiteEntry {
    std::string label;
    LearnerSpec spec;
};

struct BenchOptions {
    std::string suite = "case-study";
    std::filesystem::path out_dir = "bench-out";
    std::uint64_t seed = 42;
    int jobs = 1;
    bool upload = true;          // push runs to the hub after the grid finishes
    std::string tag = "study_30";
};

/// One finished grid cell. `run` keeps the locally computed evaluations;
/// `uploaded_run_id` is 0 until/unless the run was pushed to the hub.
struct CellResult {
    Id task_id = 0;
    std::string data_name;
    std::string learner_label;
    std::size_t learner_index = 0;  // position in the suite roster
    Run run;
    Id uploaded_run_id = 0;
};

struct BenchReport {
    std::vector<SuiteEntry> suite;
    std::vector<Id> task_ids;
    std::vector<CellResult> cells;  // task-major, roster order
    BenchmarkResult table;
};

/// The benchmark roster: single tree (full and depth-limited), bagged trees
/// with 50 iterations (full and depth-limited base), a 50-tree random forest,
/// and the majority baseline. Six entries over four flows.
std::vector<SuiteEntry> case_study_suite();

/// Resolve the suite's tasks from the hub: binary classification, complete
/// data, 100-999 instances, datasets tagged "uci", 10-fold cross-validation.
std::vector<Id> case_study_tasks(Client& client);

/// Execute the full grid (tasks x suite). Cells run on up to `jobs` threads;
/// every per-cell seed derives only from (options.seed, task id, roster
/// index), so results are identical for any thread count. Uploads, when
/// enabled, happen afterwards on one thread in grid order.
BenchReport run_suite(Client& client, const BenchOptions& options);

/// Per-fold accuracies, one row per (task, learner, fold), RFC-4180 with a
/// header row. Contains no hub-assigned identifiers: bytes depend only on the
/// grid inputs and seed.
std::string results_csv(const BenchReport& report);

/// Markdown table of aggregate accuracy per (task, learner), best per task in
/// bold, plus a per-learner mean row.
std::string summary_markdown(const BenchReport& report);

/// Static SVG: one point group per task, one colored series with connecting
/// lines per learner, y = aggregate accuracy.
std::string accuracy_svg(const BenchReport& report);

/// Write results.csv, summary.md and accuracy.svg into out_dir (created if
/// missing). Returns the three paths in that order.
std::vector<std::filesystem::path> write_artifacts(const BenchReport& report,
                                                   const std::filesystem::path& out_dir);

}  // namespace mlhub::bench
