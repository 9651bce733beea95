#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here is deliberately written without reusing the library's own algorithms:
// the oracles recompute results the slow, obvious way.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mlhub/arff.hpp"
#include "mlhub/learners.hpp"
#include "mlhub/rng.hpp"

namespace mlhub::testsupport {

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& prefix = "mlhub-test-") {
        static std::atomic<unsigned> counter{0};
        const auto stamp =
            std::chrono::steady_clock::now().time_since_epoch().count() ^
            (static_cast<long long>(counter.fetch_add(1)) << 48);
        path_ = std::filesystem::temp_directory_path() /
                (prefix + std::to_string(static_cast<unsigned long long>(stamp)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Randomized relations (quoting / missing / numeric stress)

inline const std::vector<std::string>& tricky_tokens() {
    static const std::vector<std::string> pool = {
        "plain",       "x1",          "with space",  "comma,inside", "quote'middle",
        "double\"quo", "{brace}",     "percent%off", "?",            "tab\tchar",
        "back\\slash", "new\nline",   "cr\rreturn",  "trailing ",    " leading",
        "MiXeD",       "123abc",      "-",           "@data",        "naïve",
    };
    return pool;
}

inline std::string random_token(Rng& rng) {
    return tricky_tokens()[rng.bounded(tricky_tokens().size())];
}

inline double random_interesting_double(Rng& rng) {
    switch (rng.bounded(8)) {
        case 0: return static_cast<double>(rng.bounded(2001)) - 1000.0;
        case 1: return rng.uniform01();
        case 2: return -rng.uniform01() * 1e6;
        case 3: return 0.1;
        case 4: return 1.0 / 3.0;
        case 5: return 1e300;
        case 6: return 5e-324;  // smallest denormal
        default: return rng.uniform01() * 1e-12;
    }
}

/// A relation exercising every attribute kind, the full quoting alphabet,
/// and unquoted-`?` missing cells. Attribute names and nominal levels are
/// uniquified with an index suffix so redeclaration rules never trip.
inline arff::Relation random_relation(Rng& rng, std::size_t max_attributes = 50,
                                      std::size_t max_rows = 200) {
    arff::Relation rel;
    rel.name = random_token(rng) + "_rel";
    const std::size_t n_attrs = 1 + rng.bounded(max_attributes);
    const std::size_t n_rows = rng.bounded(max_rows + 1);

    for (std::size_t a = 0; a < n_attrs; ++a) {
        arff::AttributeDecl attr;
        attr.name = random_token(rng) + "_" + std::to_string(a);
        switch (rng.bounded(10)) {
            case 0:
            case 1:
            case 2:
            case 3:
                attr.kind = arff::Kind::Numeric;
                break;
            case 4:
            case 5:
            case 6:
                attr.kind = arff::Kind::Nominal;
                break;
            case 7:
            case 8:
                attr.kind = arff::Kind::Text;
                break;
            default:
                attr.kind = arff::Kind::Date;
                if (rng.bounded(2) == 0) attr.date_format = "yyyy-MM-dd HH:mm:ss";
                break;
        }
        if (attr.kind == arff::Kind::Nominal) {
            const std::size_t n_levels = 1 + rng.bounded(6);
            std::set<std::string> seen;
            for (std::size_t l = 0; l < n_levels; ++l) {
                std::string level = random_token(rng);
                if (!seen.insert(level).second) {
                    level += "_" + std::to_string(l);
                    seen.insert(level);
                }
                attr.levels.push_back(std::move(level));
            }
        }
        rel.attributes.push_back(std::move(attr));
    }

    for (std::size_t r = 0; r < n_rows; ++r) {
        std::vector<arff::Value> row;
        row.reserve(n_attrs);
        for (const auto& attr : rel.attributes) {
            if (rng.bounded(10) == 0) {
                row.emplace_back(arff::MissingValue{});
                continue;
            }
            switch (attr.kind) {
                case arff::Kind::Numeric:
                    row.emplace_back(random_interesting_double(rng));
                    break;
                case arff::Kind::Nominal:
                    row.emplace_back(arff::NominalValue{
                        static_cast<std::int32_t>(rng.bounded(attr.levels.size()))});
                    break;
                case arff::Kind::Text:
                case arff::Kind::Date:
                    row.emplace_back(random_token(rng));
                    break;
            }
        }
        rel.rows.push_back(std::move(row));
    }
    return rel;
}

/// Count unquoted `?` data fields by scanning serialized ARFF text directly —
/// an independent check on parse/write missing-value handling. Assumes writer
/// output: one token per field, comma separators, quotes opened only at field
/// start.
inline std::size_t scan_unquoted_missing(std::string_view text) {
    std::size_t count = 0;
    bool in_data = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!in_data) {
            if (line.size() >= 5) {
                std::string head(line.substr(0, 5));
                std::transform(head.begin(), head.end(), head.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                if (head == "@data") in_data = true;
            }
            continue;
        }
        if (line.empty() || line[0] == '%') continue;
        std::size_t i = 0;
        while (i <= line.size()) {
            // read one field
            std::string field;
            bool quoted = false;
            if (i < line.size() && (line[i] == '\'' || line[i] == '"')) {
                quoted = true;
                const char quote = line[i++];
                while (i < line.size() && line[i] != quote) {
                    if (line[i] == '\\') ++i;
                    ++i;
                }
                ++i;  // closing quote
            } else {
                while (i < line.size() && line[i] != ',') field.push_back(line[i++]);
            }
            if (!quoted && field == "?") ++count;
            if (i < line.size() && line[i] == ',') {
                ++i;
                if (i == line.size()) break;  // trailing comma: empty last field
                continue;
            }
            break;
        }
    }
    return count;
}

// ---------------------------------------------------------------------------
// Evaluation oracles

/// Exhaustive pairwise AUC: fraction of (positive, negative) pairs with the
/// positive scored higher, ties counting half.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& is_pos) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!is_pos[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (is_pos[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    return wins / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// Split-search oracle (plain double arithmetic, brute force)

inline double gini_impurity(const std::vector<std::size_t>& counts) {
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

inline double delta_gini(const std::vector<std::size_t>& left,
                         const std::vector<std::size_t>& right) {
    std::size_t n_left = 0, n_right = 0;
    for (std::size_t c : left) n_left += c;
    for (std::size_t c : right) n_right += c;
    const std::size_t n = n_left + n_right;
    std::vector<std::size_t> parent(left.size());
    for (std::size_t k = 0; k < left.size(); ++k) parent[k] = left[k] + right[k];
    return gini_impurity(parent) -
           (static_cast<double>(n_left) / static_cast<double>(n)) * gini_impurity(left) -
           (static_cast<double>(n_right) / static_cast<double>(n)) * gini_impurity(right);
}

/// Best achievable Gini decrease at the root over every candidate the search
/// space admits (numeric midpoints between distinct sorted values, one nominal
/// level vs the rest), honoring min_leaf. Returns -1 when no candidate exists.
inline double best_root_gini_decrease(const TrainingView& view, const std::vector<Id>& rows,
                                      int min_leaf) {
    const std::size_t n_classes = view.classes.size();
    double best = -1.0;
    auto consider = [&](const std::vector<std::size_t>& left,
                        const std::vector<std::size_t>& right) {
        std::size_t n_left = 0, n_right = 0;
        for (std::size_t c : left) n_left += c;
        for (std::size_t c : right) n_right += c;
        if (n_left < static_cast<std::size_t>(min_leaf) ||
            n_right < static_cast<std::size_t>(min_leaf)) {
            return;
        }
        best = std::max(best, delta_gini(left, right));
    };

    for (std::size_t f = 0; f < view.features.size(); ++f) {
        const FeatureColumn& col = view.features[f];
        if (col.nominal) {
            for (std::int32_t level = 0; level < col.n_levels; ++level) {
                std::vector<std::size_t> left(n_classes, 0), right(n_classes, 0);
                for (Id row : rows) {
                    auto& side = col.level[static_cast<std::size_t>(row)] == level ? left : right;
                    ++side[static_cast<std::size_t>(view.target[static_cast<std::size_t>(row)])];
                }
                consider(left, right);
            }
        } else {
            std::vector<double> values;
            for (Id row : rows) values.push_back(col.numeric[static_cast<std::size_t>(row)]);
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                const double threshold = values[i] + (values[i + 1] - values[i]) / 2.0;
                std::vector<std::size_t> left(n_classes, 0), right(n_classes, 0);
                for (Id row : rows) {
                    auto& side =
                        col.numeric[static_cast<std::size_t>(row)] < threshold ? left : right;
                    ++side[static_cast<std::size_t>(view.target[static_cast<std::size_t>(row)])];
                }
                consider(left, right);
            }
        }
    }
    return best;
}

/// Gini decrease actually achieved by a trained tree's root split (in plain
/// double arithmetic). Returns -1 for a leaf root.
inline double achieved_root_gini_decrease(const TreeModel& model, const TrainingView& view,
                                          const std::vector<Id>& rows) {
    if (!model.root || model.root->is_leaf()) return -1.0;
    const TreeNode& root = *model.root;
    const FeatureColumn& col = view.features[static_cast<std::size_t>(root.feature)];
    const std::size_t n_classes = view.classes.size();
    std::vector<std::size_t> left(n_classes, 0), right(n_classes, 0);
    for (Id row : rows) {
        const auto r = static_cast<std::size_t>(row);
        const bool go_left = col.nominal ? col.level[r] == root.level
                                         : col.numeric[r] < root.threshold;
        ++(go_left ? left : right)[static_cast<std::size_t>(view.target[r])];
    }
    return delta_gini(left, right);
}

// ---------------------------------------------------------------------------
// Learnable synthetic data

/// Two-class dataset with `n_informative` Gaussian features whose class means
/// are separated by `effect`; the rest are pure noise. Target levels are
/// {"neg", "pos"}.
inline arff::Relation gaussian_two_class(std::size_t n_rows, std::size_t n_features,
                                         std::size_t n_informative, double effect,
                                         std::uint64_t seed, double positive_fraction = 0.5) {
    Rng rng(seed);
    auto normal = [&rng]() {
        const double u1 = std::max(rng.uniform01(), 1e-12);
        const double u2 = rng.uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    };

    arff::Relation rel;
    rel.name = "synthetic_two_class";
    for (std::size_t f = 0; f < n_features; ++f) {
        rel.attributes.push_back({"V" + std::to_string(f + 1), arff::Kind::Numeric, {}, {}});
    }
    rel.attributes.push_back({"class", arff::Kind::Nominal, {"neg", "pos"}, {}});

    for (std::size_t r = 0; r < n_rows; ++r) {
        const bool positive = rng.uniform01() < positive_fraction;
        std::vector<arff::Value> row;
        for (std::size_t f = 0; f < n_features; ++f) {
            double mean = 0.0;
            if (f < n_informative && positive) {
                mean = (f % 2 == 0 ? 1.0 : -1.0) * effect;
            }
            row.emplace_back(mean + normal());
        }
        row.emplace_back(arff::NominalValue{positive ? 1 : 0});
        rel.rows.push_back(std::move(row));
    }
    return rel;
}

}  // namespace mlhub::testsupport
