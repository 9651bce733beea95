#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mlhub/model.hpp"

namespace mlhub {

struct HubUser {
    Id user_id = 0;
    std::string apikey;
    bool can_write = false;
};

struct HubDataset {
    DataSetDescription desc;
    std::string arff_text;
};

struct HubRun {
    Run run;
    std::string predictions_arff;
};

struct TagRecord {
    std::string kind;  // "data", "task", "flow", "run"
    Id id = 0;
    std::string tag;
    Id owner = 0;
};

/// Complete in-memory hub state. Entity tag vectors mirror the ownership
/// records; id counters only ever grow, so deleted ids are never reused.
struct HubState {
    std::map<Id, HubDataset> datasets;
    std::map<Id, Task> tasks;  // splits materialized
    std::map<Id, Flow> flows;
    std::map<Id, HubRun> runs;
    std::vector<HubUser> users;
    std::vector<TagRecord> tag_records;
    std::vector<EstimationProcedure> estimation_procedures;
    std::vector<std::string> evaluation_measures;
    Id next_data_id = 1;
    Id next_task_id = 1;
    Id next_flow_id = 1;
    Id next_run_id = 1;
};

struct FixtureOptions {
    /// Include the pre-existing reference run (tagged "study_30"). Tests that
    /// count exactly the runs they upload under that tag start without it.
    bool include_reference_run = true;
};

/// The bundled fixture: seven tagged datasets with published shapes, their
/// classification tasks with stratified 10-fold splits, one foreign flow, a
/// reference run, and three users (one read-only, two writers).
HubState build_default_fixture(const FixtureOptions& opts = {});

/// Well-known fixture credentials.
inline constexpr const char* kReadOnlyApiKey = "c1994bdb7ecb3c6f3c8f3b35f4b47f1f";
inline constexpr const char* kWriterApiKey = "0123456789abcdef0123456789abcdef";
inline constexpr const char* kSecondWriterApiKey = "fedcba9876543210fedcba9876543210";

/// In-process hub server for offline integration tests. All state access is
/// serialized through one mutex, so concurrent uploads receive distinct ids.
/// Requests are counted per "<METHOD> <path>" (e.g. "GET data/15"), with the
/// /_test/ control endpoints excluded.
class MockHub {
public:
    explicit MockHub(HubState fixture);
    ~MockHub();

    MockHub(const MockHub&) = delete;
    MockHub& operator=(const MockHub&) = delete;

    /// Bind 127.0.0.1 on an ephemeral port (or `port` if nonzero) and serve
    /// until stop().
    void start(int port = 0);
    void stop();

    int port() const { return port_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    /// Restore the fixture snapshot and zero the request counters.
    void reset();

    std::map<std::string, std::size_t> request_counts() const;
    std::size_t request_count(const std::string& key) const;

    /// Copy of the current state (for brute-force comparisons in tests).
    HubState snapshot() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace mlhub
