#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "mlhub/cache.hpp"
#include "mlhub/errors.hpp"
#include "support/generators.hpp"

using namespace mlhub;
using mlhub::testsupport::TempDir;
namespace fs = std::filesystem;

TEST_SUITE("cache") {

TEST_CASE("kind directories") {
    CHECK(cache_kind_dir(CacheKind::Dataset) == "datasets");
    CHECK(cache_kind_dir(CacheKind::Task) == "tasks");
    CHECK(cache_kind_dir(CacheKind::Flow) == "flows");
    CHECK(cache_kind_dir(CacheKind::Run) == "runs");
}

TEST_CASE("store and load round-trip binary content") {
    TempDir dir;
    Cache cache(dir.path());
    const std::string binary = std::string("abc\0def\nxyz", 11);
    cache.store(CacheKind::Dataset, 15, {{"description.json", "{\"id\":15}"},
                                         {"dataset.arff", binary}});

    CHECK(cache.entry_dir(CacheKind::Dataset, 15) == dir.path() / "datasets" / "15");
    CHECK(cache.contains(CacheKind::Dataset, 15));

    const auto files = cache.load(CacheKind::Dataset, 15, {"description.json", "dataset.arff"});
    REQUIRE(files.has_value());
    CHECK(files->at("description.json") == "{\"id\":15}");
    CHECK(files->at("dataset.arff") == binary);
    CHECK(files->at("dataset.arff").size() == 11);
}

TEST_CASE("load misses cleanly") {
    TempDir dir;
    Cache cache(dir.path());
    CHECK_FALSE(cache.load(CacheKind::Task, 99, {"task.json"}).has_value());
    CHECK_FALSE(cache.contains(CacheKind::Task, 99));
}

TEST_CASE("only requested files come back") {
    TempDir dir;
    Cache cache(dir.path());
    cache.store(CacheKind::Flow, 2, {{"flow.json", "{}"}, {"extra.txt", "x"}});
    const auto files = cache.load(CacheKind::Flow, 2, {"flow.json"});
    REQUIRE(files.has_value());
    CHECK(files->size() == 1);
    CHECK(files->count("flow.json") == 1);
}

TEST_CASE("re-store replaces the whole entry") {
    TempDir dir;
    Cache cache(dir.path());
    cache.store(CacheKind::Run, 8, {{"run.json", "v1"}, {"stale.txt", "old"}});
    cache.store(CacheKind::Run, 8, {{"run.json", "v2"}});

    const auto files = cache.load(CacheKind::Run, 8, {"run.json"});
    REQUIRE(files.has_value());
    CHECK(files->at("run.json") == "v2");
    CHECK_FALSE(fs::exists(cache.entry_dir(CacheKind::Run, 8) / "stale.txt"));
}

TEST_CASE("incomplete entries are quarantined and reported") {
    TempDir dir;
    Cache cache(dir.path());
    std::vector<std::string> warnings;
    cache.warn = [&](const std::string& msg) { warnings.push_back(msg); };

    cache.store(CacheKind::Dataset, 7, {{"description.json", "{}"}});
    // a required file the entry does not have -> miss + quarantine
    CHECK_FALSE(cache.load(CacheKind::Dataset, 7, {"description.json", "dataset.arff"})
                    .has_value());

    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("datasets/7") != std::string::npos);
    CHECK_FALSE(cache.contains(CacheKind::Dataset, 7));
    CHECK(fs::is_directory(dir.path() / "datasets" / "7.corrupt"));

    const CacheStatus st = cache.status();
    CHECK(st.entries == 0);
    CHECK(st.corrupt == 1);

    // a second quarantine of the same id picks a fresh name
    cache.store(CacheKind::Dataset, 7, {{"description.json", "{}"}});
    CHECK_FALSE(cache.load(CacheKind::Dataset, 7, {"dataset.arff"}).has_value());
    CHECK(fs::is_directory(dir.path() / "datasets" / "7.corrupt.1"));
    CHECK(cache.status().corrupt == 2);
}

TEST_CASE("a failure before commit leaves the previous entry intact") {
    TempDir dir;
    Cache cache(dir.path());
    cache.store(CacheKind::Task, 3, {{"task.json", "v1"}});

    cache.pre_commit_hook = [] { throw Error("disk full"); };
    CHECK_THROWS_AS(cache.store(CacheKind::Task, 3, {{"task.json", "v2"}}), Error);
    cache.pre_commit_hook = nullptr;

    const auto files = cache.load(CacheKind::Task, 3, {"task.json"});
    REQUIRE(files.has_value());
    CHECK(files->at("task.json") == "v1");

    // no temporary directories survive the failed store
    std::size_t dirs = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "tasks")) {
        (void)e;
        ++dirs;
    }
    CHECK(dirs == 1);
}

TEST_CASE("status counts per kind and sums bytes") {
    TempDir dir;
    Cache cache(dir.path());
    cache.store(CacheKind::Dataset, 1, {{"a", "12345"}});
    cache.store(CacheKind::Dataset, 2, {{"b", "123"}});
    cache.store(CacheKind::Task, 5, {{"c", "12"}});

    const CacheStatus st = cache.status();
    CHECK(st.entries == 3);
    CHECK(st.corrupt == 0);
    CHECK(st.bytes == 10);
    CHECK(st.by_kind.at("datasets") == 2);
    CHECK(st.by_kind.at("tasks") == 1);
    CHECK(st.by_kind.at("flows") == 0);
    CHECK(st.by_kind.at("runs") == 0);
}

TEST_CASE("remove and clear") {
    TempDir dir;
    Cache cache(dir.path());
    cache.warn = [](const std::string&) {};
    cache.store(CacheKind::Dataset, 1, {{"a", "x"}});
    cache.store(CacheKind::Run, 2, {{"b", "y"}});
    cache.store(CacheKind::Run, 3, {{"c", "z"}});

    cache.remove(CacheKind::Run, 2);
    CHECK_FALSE(cache.contains(CacheKind::Run, 2));
    CHECK(cache.contains(CacheKind::Run, 3));

    // quarantine one entry so clear() has a corrupt dir to sweep too
    CHECK_FALSE(cache.load(CacheKind::Dataset, 1, {"missing"}).has_value());
    CHECK(cache.status().corrupt == 1);

    const std::size_t removed = cache.clear();
    CHECK(removed == 2);  // runs/3 plus the quarantined datasets/1
    const CacheStatus st = cache.status();
    CHECK(st.entries == 0);
    CHECK(st.corrupt == 0);
    CHECK(st.bytes == 0);
}

}  // TEST_SUITE("cache")
