#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlhub/model.hpp"

namespace mlhub {

enum class CacheKind { Dataset, Task, Flow, Run };

std::string_view cache_kind_dir(CacheKind kind);  // "datasets", "tasks", "flows", "runs"

struct CacheStatus {
    std::size_t entries = 0;
    std::size_t corrupt = 0;
    std::uintmax_t bytes = 0;
    std::map<std::string, std::size_t> by_kind;  // kind dir -> entry count
};

/// On-disk cache of hub objects, one directory per entry:
/// <root>/<kind>/<id>/<file>. Writes go to a temporary sibling directory that
/// is renamed into place, so a crash mid-write never yields a half-written
/// entry. Entries that exist but lack a required file are quarantined
/// (renamed to "<id>.corrupt[.n]") and treated as a miss.
class Cache {
public:
    explicit Cache(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    using Files = std::map<std::string, std::string>;  // file name -> content

    /// Atomically create or replace an entry.
    void store(CacheKind kind, Id id, const Files& files);

    /// All files of an entry, or nullopt on miss (including after quarantine).
    std::optional<Files> load(CacheKind kind, Id id, const std::vector<std::string>& required);

    bool contains(CacheKind kind, Id id) const;
    void remove(CacheKind kind, Id id);

    /// Remove every cached entry (quarantined ones included). Returns the
    /// number of entries removed.
    std::size_t clear();

    CacheStatus status() const;

    std::filesystem::path entry_dir(CacheKind kind, Id id) const;

    /// Test hook, invoked after the temporary directory is fully written and
    /// before it is renamed into place.
    std::function<void()> pre_commit_hook;

    /// Warning sink for quarantine events; defaults to stderr.
    std::function<void(const std::string&)> warn;

private:
    std::filesystem::path root_;
};

}  // namespace mlhub
