#include "mlhub/cache.hpp"

#include <atomic>
#include <fstream>
#include <iostream>

#include "mlhub/errors.hpp"

namespace fs = std::filesystem;

namespace mlhub {

namespace {

constexpr CacheKind kAllKinds[] = {CacheKind::Dataset, CacheKind::Task, CacheKind::Flow,
                                   CacheKind::Run};

std::atomic<std::uint64_t> tmp_counter{0};

bool is_entry_dir(const fs::directory_entry& e) {
    if (!e.is_directory()) return false;
    const std::string name = e.path().filename().string();
    if (name.empty() || name.find(".tmp") != std::string::npos ||
        name.find(".corrupt") != std::string::npos) {
        return false;
    }
    return name.find_first_not_of("0123456789") == std::string::npos;
}

bool is_corrupt_dir(const fs::directory_entry& e) {
    return e.is_directory() &&
           e.path().filename().string().find(".corrupt") != std::string::npos;
}

}  // namespace

std::string_view cache_kind_dir(CacheKind kind) {
    switch (kind) {
        case CacheKind::Dataset: return "datasets";
        case CacheKind::Task: return "tasks";
        case CacheKind::Flow: return "flows";
        case CacheKind::Run: return "runs";
    }
    return "unknown";
}

Cache::Cache(fs::path root) : root_(std::move(root)) {
    warn = [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
}

fs::path Cache::entry_dir(CacheKind kind, Id id) const {
    return root_ / cache_kind_dir(kind) / std::to_string(id);
}

void Cache::store(CacheKind kind, Id id, const Files& files) {
    const fs::path final_dir = entry_dir(kind, id);
    const fs::path kind_dir = final_dir.parent_path();
    std::error_code ec;
    fs::create_directories(kind_dir, ec);
    if (ec) throw Error("cannot create cache directory " + kind_dir.string() + ": " + ec.message());

    const fs::path tmp_dir =
        kind_dir / (std::to_string(id) + ".tmp" +
                    std::to_string(tmp_counter.fetch_add(1, std::memory_order_relaxed)));
    fs::create_directories(tmp_dir, ec);
    if (ec) throw Error("cannot create " + tmp_dir.string() + ": " + ec.message());

    try {
        for (const auto& [name, content] : files) {
            std::ofstream out(tmp_dir / name, std::ios::binary);
            out.write(content.data(), static_cast<std::streamsize>(content.size()));
            if (!out.good()) throw Error("cannot write cache file " + (tmp_dir / name).string());
        }
        if (pre_commit_hook) pre_commit_hook();
        fs::remove_all(final_dir);
        fs::rename(tmp_dir, final_dir);
    } catch (...) {
        fs::remove_all(tmp_dir, ec);
        throw;
    }
}

std::optional<Cache::Files> Cache::load(CacheKind kind, Id id,
                                        const std::vector<std::string>& required) {
    const fs::path dir = entry_dir(kind, id);
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return std::nullopt;

    Files files;
    bool corrupt = false;
    for (const std::string& name : required) {
        std::ifstream in(dir / name, std::ios::binary);
        if (!in.good()) {
            corrupt = true;
            break;
        }
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        files.emplace(name, std::move(content));
    }

    if (corrupt) {
        fs::path target = dir;
        target += ".corrupt";
        for (int n = 1; fs::exists(target, ec); ++n) {
            target = dir;
            target += ".corrupt." + std::to_string(n);
        }
        fs::rename(dir, target, ec);
        if (warn) {
            warn("cache entry " + std::string(cache_kind_dir(kind)) + "/" + std::to_string(id) +
                 " is incomplete; moved aside to " + target.filename().string());
        }
        return std::nullopt;
    }
    return files;
}

bool Cache::contains(CacheKind kind, Id id) const {
    std::error_code ec;
    return fs::is_directory(entry_dir(kind, id), ec);
}

void Cache::remove(CacheKind kind, Id id) {
    std::error_code ec;
    fs::remove_all(entry_dir(kind, id), ec);
}

std::size_t Cache::clear() {
    std::size_t removed = 0;
    std::error_code ec;
    for (CacheKind kind : kAllKinds) {
        const fs::path kind_dir = root_ / cache_kind_dir(kind);
        if (!fs::is_directory(kind_dir, ec)) continue;
        for (const auto& entry : fs::directory_iterator(kind_dir, ec)) {
            if (entry.is_directory()) ++removed;
            fs::remove_all(entry.path(), ec);
        }
    }
    return removed;
}

CacheStatus Cache::status() const {
    CacheStatus st;
    std::error_code ec;
    for (CacheKind kind : kAllKinds) {
        const fs::path kind_dir = root_ / cache_kind_dir(kind);
        std::size_t count = 0;
        if (fs::is_directory(kind_dir, ec)) {
            for (const auto& entry : fs::directory_iterator(kind_dir, ec)) {
                if (is_entry_dir(entry)) {
                    ++count;
                    for (const auto& file : fs::recursive_directory_iterator(entry.path(), ec)) {
                        if (file.is_regular_file()) st.bytes += file.file_size(ec);
                    }
                } else if (is_corrupt_dir(entry)) {
                    ++st.corrupt;
                }
            }
        }
        st.by_kind[std::string(cache_kind_dir(kind))] = count;
        st.entries += count;
    }
    return st;
}

}  // namespace mlhub
