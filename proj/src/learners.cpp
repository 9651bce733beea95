#include "mlhub/learners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mlhub/errors.hpp"

namespace mlhub {

namespace {

constexpr std::string_view kTreeName = "mlhub.classif.tree";
constexpr std::string_view kBaggedName = "mlhub.classif.bagged_tree";
constexpr std::string_view kForestName = "mlhub.classif.forest";
constexpr std::string_view kMajorityName = "mlhub.classif.majority";

std::string external_version_string() {
    return std::string("mlhub_") + std::string(kClientVersion);
}

std::vector<LearnerInfo> make_registry() {
    std::vector<FlowParameter> tree_params = {
        {"max_depth", "integer", "30"},
        {"min_split", "integer", "20"},
        {"min_leaf", "integer", "7"},
    };
    std::vector<FlowParameter> bagged_params = {
        {"bw_iters", "integer", "10"},
    };
    bagged_params.insert(bagged_params.end(), tree_params.begin(), tree_params.end());
    std::vector<FlowParameter> forest_params = {
        {"ntree", "integer", "500"},
        {"mtry", "integer", "auto"},
    };
    return {
        {std::string(kTreeName), "tree", "Classification tree grown by recursive partitioning on the Gini criterion.", tree_params},
        {std::string(kBaggedName), "bagged_tree", "Bootstrap-aggregated classification trees with majority voting.", bagged_params},
        {std::string(kForestName), "forest", "Random forest: bagged trees with per-node feature subsampling.", forest_params},
        {std::string(kMajorityName), "majority", "Baseline predicting the most frequent training class.", {}},
    };
}

long long parse_int_value(const std::string& learner, const std::string& param,
                          const std::string& value) {
    long long out = 0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ValidationError("hyperparameter " + param + " of " + learner +
                              " expects an integer, got '" + value + "'");
    }
    return out;
}

void check_value(const std::string& learner, const std::string& param, const std::string& value) {
    if (param == "mtry" && value == "auto") return;
    long long v = parse_int_value(learner, param, value);
    long long lo = 1;
    if (param == "min_split") lo = 2;
    if (param == "max_depth") lo = 0;
    if (v < lo) {
        throw ValidationError("hyperparameter " + param + " of " + learner + " must be >= " +
                              std::to_string(lo) + ", got " + value);
    }
}

int get_int_param(const LearnerSpec& spec, const std::string& name, int fallback) {
    auto it = spec.hyperparameters.find(name);
    if (it == spec.hyperparameters.end()) return fallback;
    return static_cast<int>(parse_int_value(spec.name, name, it->second));
}

}  // namespace

const std::vector<LearnerInfo>& builtin_learners() {
    static const std::vector<LearnerInfo> registry = make_registry();
    return registry;
}

const LearnerInfo* find_learner(std::string_view name_or_alias) {
    for (const auto& info : builtin_learners()) {
        if (info.name == name_or_alias || info.short_name == name_or_alias) return &info;
    }
    return nullptr;
}

LearnerSpec make_learner(std::string_view name_or_alias) {
    const LearnerInfo* info = find_learner(name_or_alias);
    if (!info) {
        throw ValidationError("unknown learner '" + std::string(name_or_alias) + "'");
    }
    LearnerSpec spec;
    spec.name = info->name;
    spec.external_version = external_version_string();
    for (const auto& p : info->parameters) spec.hyperparameters[p.name] = p.default_value;
    return spec;
}

void set_hyperparameter(LearnerSpec& spec, const std::string& name, const std::string& value) {
    const LearnerInfo* info = find_learner(spec.name);
    if (!info) throw ValidationError("unknown learner '" + spec.name + "'");
    auto declared = std::find_if(info->parameters.begin(), info->parameters.end(),
                                 [&](const FlowParameter& p) { return p.name == name; });
    if (declared == info->parameters.end()) {
        throw ValidationError("learner " + spec.name + " has no hyperparameter '" + name + "'");
    }
    check_value(spec.name, name, value);
    spec.hyperparameters[name] = value;
    spec.explicit_params.insert(name);
}

Flow flow_from_learner(const LearnerSpec& spec) {
    const LearnerInfo* info = find_learner(spec.name);
    if (!info) throw ValidationError("unknown learner '" + spec.name + "'");
    Flow flow;
    flow.name = info->name;
    flow.external_version = spec.external_version.empty() ? external_version_string()
                                                          : spec.external_version;
    flow.description = info->description;
    flow.parameters = info->parameters;
    flow.dependencies = {"mlhub " + std::string(kClientVersion)};
    return flow;
}

LearnerSpec convert_flow_to_learner(const Flow& flow) {
    if (flow.name.rfind(kFlowPrefix, 0) != 0) {
        throw UnsupportedFlowError(flow.name);
    }
    const LearnerInfo* info = find_learner(flow.name);
    if (!info) throw UnsupportedFlowError(flow.name);
    LearnerSpec spec;
    spec.name = info->name;
    spec.external_version = flow.external_version;
    // Registry defaults first, then any defaults the flow itself declares.
    for (const auto& p : info->parameters) spec.hyperparameters[p.name] = p.default_value;
    for (const auto& p : flow.parameters) {
        if (spec.hyperparameters.count(p.name) && !p.default_value.empty()) {
            spec.hyperparameters[p.name] = p.default_value;
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Training data

TrainingView build_training_view(const arff::Relation& rel, std::string_view target) {
    std::ptrdiff_t target_idx = rel.attribute_index(target);
    if (target_idx < 0) {
        throw ValidationError("target attribute '" + std::string(target) + "' not found");
    }
    const arff::AttributeDecl& tdecl = rel.attributes[static_cast<std::size_t>(target_idx)];
    if (tdecl.kind != arff::Kind::Nominal) {
        throw ValidationError("target attribute '" + std::string(target) + "' must be nominal");
    }

    TrainingView view;
    view.n_rows = rel.n_rows();
    view.classes = tdecl.levels;
    view.target.reserve(view.n_rows);

    for (std::size_t a = 0; a < rel.attributes.size(); ++a) {
        if (static_cast<std::ptrdiff_t>(a) == target_idx) continue;
        const arff::AttributeDecl& decl = rel.attributes[a];
        FeatureColumn col;
        col.name = decl.name;
        switch (decl.kind) {
            case arff::Kind::Numeric:
                col.nominal = false;
                col.numeric.reserve(view.n_rows);
                break;
            case arff::Kind::Nominal:
                col.nominal = true;
                col.n_levels = static_cast<std::int32_t>(decl.levels.size());
                col.level.reserve(view.n_rows);
                break;
            default:
                throw ValidationError("attribute '" + decl.name +
                                      "': string and date features are not supported by the "
                                      "built-in learners");
        }
        view.features.push_back(std::move(col));
    }

    for (std::size_t r = 0; r < rel.n_rows(); ++r) {
        const auto& row = rel.rows[r];
        std::size_t fi = 0;
        for (std::size_t a = 0; a < rel.attributes.size(); ++a) {
            const arff::Value& v = row[a];
            if (std::holds_alternative<arff::MissingValue>(v)) {
                throw ValidationError("row " + std::to_string(r + 1) + ", attribute '" +
                                      rel.attributes[a].name +
                                      "': built-in learners do not support missing values");
            }
            if (static_cast<std::ptrdiff_t>(a) == target_idx) {
                view.target.push_back(std::get<arff::NominalValue>(v).index);
            } else {
                FeatureColumn& col = view.features[fi++];
                if (col.nominal) {
                    col.level.push_back(std::get<arff::NominalValue>(v).index);
                } else {
                    col.numeric.push_back(std::get<double>(v));
                }
            }
        }
    }
    return view;
}

// ---------------------------------------------------------------------------
// Tree

namespace {

// A split candidate's quality is the rational number score_num / den where
//   score_num = sum_k cL_k^2 * nR + sum_k cR_k^2 * nL,   den = nL * nR.
// Maximizing it is equivalent to maximizing the Gini impurity decrease; using
// the exact integer form makes ties exact instead of float-rounded.
struct Candidate {
    bool valid = false;
    long long score_num = 0;
    long long den = 1;
    std::int32_t feature = -1;
    bool nominal = false;
    double threshold = 0.0;
    std::int32_t level = -1;
};

bool better(const Candidate& a, const Candidate& b) {
    if (!a.valid) return false;
    if (!b.valid) return true;
    __int128 lhs = static_cast<__int128>(a.score_num) * b.den;
    __int128 rhs = static_cast<__int128>(b.score_num) * a.den;
    if (lhs != rhs) return lhs > rhs;
    if (a.feature != b.feature) return a.feature < b.feature;
    if (a.nominal != b.nominal) return !a.nominal;  // cannot occur for one feature
    if (a.nominal) return a.level < b.level;
    return a.threshold < b.threshold;
}

struct TreeBuilder {
    const TrainingView& view;
    const TreeParams& params;
    Rng rng;
    std::int32_t n_classes;
    int depth_seen = 0;

    TreeBuilder(const TrainingView& v, const TreeParams& p, Rng r)
        : view(v), params(p), rng(r), n_classes(static_cast<std::int32_t>(v.classes.size())) {}

    std::vector<std::int32_t> sample_features() {
        std::int32_t n_feat = static_cast<std::int32_t>(view.features.size());
        std::vector<std::int32_t> pool(static_cast<std::size_t>(n_feat));
        std::iota(pool.begin(), pool.end(), 0);
        if (params.mtry <= 0 || params.mtry >= n_feat) return pool;
        for (std::int32_t i = 0; i < params.mtry; ++i) {
            std::uint64_t j = i + rng.bounded(static_cast<std::uint64_t>(n_feat - i));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(params.mtry));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    Candidate scan_numeric(std::int32_t f, const std::vector<Id>& rows,
                           const std::vector<long long>& total) {
        const FeatureColumn& col = view.features[static_cast<std::size_t>(f)];
        std::vector<std::pair<double, std::int32_t>> items;
        items.reserve(rows.size());
        for (Id r : rows) {
            items.emplace_back(col.numeric[static_cast<std::size_t>(r)],
                               view.target[static_cast<std::size_t>(r)]);
        }
        std::sort(items.begin(), items.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        const long long n = static_cast<long long>(items.size());
        std::vector<long long> left(static_cast<std::size_t>(n_classes), 0);
        long long sum_left_sq = 0;
        long long sum_total_sq = 0;
        for (long long c : total) sum_total_sq += c * c;
        long long sum_right_sq = sum_total_sq;

        Candidate best;
        for (long long i = 0; i < n - 1; ++i) {
            std::int32_t cls = items[static_cast<std::size_t>(i)].second;
            long long& lc = left[static_cast<std::size_t>(cls)];
            long long rc = total[static_cast<std::size_t>(cls)] - lc;
            sum_left_sq += 2 * lc + 1;
            sum_right_sq -= 2 * rc - 1;
            lc += 1;
            double lo = items[static_cast<std::size_t>(i)].first;
            double hi = items[static_cast<std::size_t>(i) + 1].first;
            if (lo == hi) continue;
            long long n_left = i + 1;
            long long n_right = n - n_left;
            if (n_left < params.min_leaf || n_right < params.min_leaf) continue;
            Candidate cand;
            cand.valid = true;
            cand.score_num = sum_left_sq * n_right + sum_right_sq * n_left;
            cand.den = n_left * n_right;
            cand.feature = f;
            cand.nominal = false;
            cand.threshold = lo + (hi - lo) / 2.0;
            if (better(cand, best)) best = cand;
        }
        return best;
    }

    Candidate scan_nominal(std::int32_t f, const std::vector<Id>& rows,
                           const std::vector<long long>& total) {
        const FeatureColumn& col = view.features[static_cast<std::size_t>(f)];
        const long long n = static_cast<long long>(rows.size());
        // counts[level][class]
        std::vector<std::vector<long long>> counts(
            static_cast<std::size_t>(col.n_levels),
            std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
        std::vector<long long> level_n(static_cast<std::size_t>(col.n_levels), 0);
        for (Id r : rows) {
            std::int32_t lv = col.level[static_cast<std::size_t>(r)];
            counts[static_cast<std::size_t>(lv)][static_cast<std::size_t>(
                view.target[static_cast<std::size_t>(r)])]++;
            level_n[static_cast<std::size_t>(lv)]++;
        }
        long long sum_total_sq = 0;
        for (long long c : total) sum_total_sq += c * c;

        Candidate best;
        const long long min_leaf = std::max(1LL, static_cast<long long>(params.min_leaf));
        for (std::int32_t lv = 0; lv < col.n_levels; ++lv) {
            long long n_left = level_n[static_cast<std::size_t>(lv)];
            long long n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            long long sum_left_sq = 0;
            long long cross = 0;
            for (std::int32_t k = 0; k < n_classes; ++k) {
                long long cl = counts[static_cast<std::size_t>(lv)][static_cast<std::size_t>(k)];
                sum_left_sq += cl * cl;
                cross += cl * total[static_cast<std::size_t>(k)];
            }
            // sum_k (total_k - cl_k)^2 = sum total^2 - 2*cross + sum_left_sq
            long long sum_right_sq = sum_total_sq - 2 * cross + sum_left_sq;
            Candidate cand;
            cand.valid = true;
            cand.score_num = sum_left_sq * n_right + sum_right_sq * n_left;
            cand.den = n_left * n_right;
            cand.feature = f;
            cand.nominal = true;
            cand.level = lv;
            if (better(cand, best)) best = cand;
        }
        return best;
    }

    std::unique_ptr<TreeNode> build(std::vector<Id> rows, int depth) {
        depth_seen = std::max(depth_seen, depth);
        std::vector<long long> counts(static_cast<std::size_t>(n_classes), 0);
        for (Id r : rows) counts[static_cast<std::size_t>(view.target[static_cast<std::size_t>(r)])]++;

        bool pure = std::count_if(counts.begin(), counts.end(),
                                  [](long long c) { return c > 0; }) <= 1;
        bool can_split = !pure && depth < params.max_depth &&
                         static_cast<long long>(rows.size()) >= params.min_split;

        Candidate best;
        if (can_split) {
            for (std::int32_t f : sample_features()) {
                const FeatureColumn& col = view.features[static_cast<std::size_t>(f)];
                Candidate cand = col.nominal ? scan_nominal(f, rows, counts)
                                             : scan_numeric(f, rows, counts);
                if (better(cand, best)) best = cand;
            }
        }

        auto node = std::make_unique<TreeNode>();
        if (!best.valid) {
            node->label = 0;
            long long best_count = -1;
            node->class_counts.resize(static_cast<std::size_t>(n_classes));
            for (std::int32_t k = 0; k < n_classes; ++k) {
                node->class_counts[static_cast<std::size_t>(k)] =
                    static_cast<double>(counts[static_cast<std::size_t>(k)]);
                if (counts[static_cast<std::size_t>(k)] > best_count) {
                    best_count = counts[static_cast<std::size_t>(k)];
                    node->label = k;
                }
            }
            return node;
        }

        const FeatureColumn& col = view.features[static_cast<std::size_t>(best.feature)];
        std::vector<Id> left_rows, right_rows;
        for (Id r : rows) {
            bool goes_left =
                best.nominal ? col.level[static_cast<std::size_t>(r)] == best.level
                             : col.numeric[static_cast<std::size_t>(r)] < best.threshold;
            (goes_left ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        node->feature = best.feature;
        node->threshold = best.threshold;
        node->level = best.nominal ? best.level : -1;
        node->left = build(std::move(left_rows), depth + 1);
        node->right = build(std::move(right_rows), depth + 1);
        return node;
    }
};

const TreeNode* route(const TreeModel& model, const TrainingView& view, Id row) {
    const TreeNode* node = model.root.get();
    while (!node->is_leaf()) {
        const FeatureColumn& col = view.features[static_cast<std::size_t>(node->feature)];
        bool goes_left = node->level >= 0
                             ? col.level[static_cast<std::size_t>(row)] == node->level
                             : col.numeric[static_cast<std::size_t>(row)] < node->threshold;
        node = goes_left ? node->left.get() : node->right.get();
    }
    return node;
}

}  // namespace

TreeModel train_tree(const TrainingView& view, std::span<const Id> rows, const TreeParams& params,
                     Rng rng) {
    if (view.classes.empty()) throw ValidationError("training data declares no classes");
    if (rows.empty()) throw ValidationError("cannot train a tree on zero rows");
    TreeBuilder builder(view, params, rng);
    TreeModel model;
    model.classes = view.classes;
    model.root = builder.build(std::vector<Id>(rows.begin(), rows.end()), 0);
    model.depth = builder.depth_seen;
    return model;
}

Prediction predict_tree_row(const TreeModel& model, const TrainingView& view, Id row) {
    const TreeNode* leaf = route(model, view, row);
    Prediction pred;
    pred.label = leaf->label;
    double total = 0.0;
    for (double c : leaf->class_counts) total += c;
    pred.confidences.reserve(leaf->class_counts.size());
    for (double c : leaf->class_counts) pred.confidences.push_back(c / total);
    return pred;
}

std::vector<Prediction> predict_tree(const TreeModel& model, const TrainingView& view,
                                     std::span<const Id> rows) {
    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (Id r : rows) out.push_back(predict_tree_row(model, view, r));
    return out;
}

EnsembleModel train_bagging(const TrainingView& view, std::span<const Id> rows,
                            const TreeParams& base, int iters, Rng rng) {
    if (iters < 1) throw ValidationError("ensemble needs at least one member");
    EnsembleModel model;
    model.classes = view.classes;
    model.members.reserve(static_cast<std::size_t>(iters));
    const std::size_t n = rows.size();
    for (int m = 0; m < iters; ++m) {
        Rng member_rng = rng.split(static_cast<std::uint64_t>(m));
        std::vector<Id> boot;
        boot.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            boot.push_back(rows[static_cast<std::size_t>(member_rng.bounded(n))]);
        }
        model.members.push_back(train_tree(view, boot, base, member_rng));
    }
    return model;
}

Prediction predict_ensemble_row(const EnsembleModel& model, const TrainingView& view, Id row) {
    std::vector<long long> votes(model.classes.size(), 0);
    for (const TreeModel& member : model.members) {
        votes[static_cast<std::size_t>(route(member, view, row)->label)]++;
    }
    Prediction pred;
    long long best = -1;
    for (std::size_t k = 0; k < votes.size(); ++k) {
        if (votes[k] > best) {
            best = votes[k];
            pred.label = static_cast<std::int32_t>(k);
        }
    }
    pred.confidences.reserve(votes.size());
    for (long long v : votes) {
        pred.confidences.push_back(static_cast<double>(v) /
                                   static_cast<double>(model.members.size()));
    }
    return pred;
}

std::vector<Prediction> predict_ensemble(const EnsembleModel& model, const TrainingView& view,
                                         std::span<const Id> rows) {
    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (Id r : rows) out.push_back(predict_ensemble_row(model, view, r));
    return out;
}

MajorityModel train_majority(const TrainingView& view, std::span<const Id> rows) {
    if (rows.empty()) throw ValidationError("cannot train on zero rows");
    MajorityModel model;
    model.classes = view.classes;
    std::vector<long long> counts(view.classes.size(), 0);
    for (Id r : rows) counts[static_cast<std::size_t>(view.target[static_cast<std::size_t>(r)])]++;
    long long best = -1;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] > best) {
            best = counts[k];
            model.label = static_cast<std::int32_t>(k);
        }
    }
    model.confidences.reserve(counts.size());
    for (long long c : counts) {
        model.confidences.push_back(static_cast<double>(c) / static_cast<double>(rows.size()));
    }
    return model;
}

std::vector<Prediction> FittedModel::predict(const TrainingView& view,
                                             std::span<const Id> rows) const {
    if (const TreeModel* tree = std::get_if<TreeModel>(&model)) {
        return predict_tree(*tree, view, rows);
    }
    if (const EnsembleModel* ensemble = std::get_if<EnsembleModel>(&model)) {
        return predict_ensemble(*ensemble, view, rows);
    }
    const MajorityModel& majority = std::get<MajorityModel>(model);
    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.push_back(Prediction{majority.label, majority.confidences});
    }
    return out;
}

FittedModel fit_learner(const LearnerSpec& spec, const TrainingView& view,
                        std::span<const Id> rows, Rng rng) {
    const std::int32_t n_feat = static_cast<std::int32_t>(view.features.size());

    auto tree_params = [&](int default_min_split, int default_min_leaf) {
        TreeParams p;
        p.max_depth = get_int_param(spec, "max_depth", 30);
        p.min_split = get_int_param(spec, "min_split", default_min_split);
        p.min_leaf = get_int_param(spec, "min_leaf", default_min_leaf);
        return p;
    };

    if (spec.name == kTreeName) {
        return {train_tree(view, rows, tree_params(20, 7), rng)};
    }
    if (spec.name == kBaggedName) {
        int iters = get_int_param(spec, "bw_iters", 10);
        return {train_bagging(view, rows, tree_params(20, 7), iters, rng)};
    }
    if (spec.name == kForestName) {
        int ntree = get_int_param(spec, "ntree", 500);
        TreeParams p;
        // Forest members are grown deep, as is conventional.
        p.max_depth = 30;
        p.min_split = 2;
        p.min_leaf = 1;
        auto it = spec.hyperparameters.find("mtry");
        if (it == spec.hyperparameters.end() || it->second == "auto") {
            p.mtry = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_feat))));
            p.mtry = std::max(1, p.mtry);
        } else {
            p.mtry = get_int_param(spec, "mtry", 0);
        }
        if (p.mtry > n_feat) {
            throw ValidationError("mtry=" + std::to_string(p.mtry) + " exceeds the " +
                                  std::to_string(n_feat) + " available predictor features");
        }
        return {train_bagging(view, rows, p, ntree, rng)};
    }
    if (spec.name == kMajorityName) {
        return {train_majority(view, rows)};
    }
    throw ValidationError("unknown learner '" + spec.name + "'");
}

}  // namespace mlhub
