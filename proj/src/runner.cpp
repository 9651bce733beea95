#include "mlhub/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mlhub/errors.hpp"
#include "mlhub/rng.hpp"

namespace mlhub {

namespace {

void shuffle_ids(std::vector<Id>& ids, Rng& rng) {
    for (std::size_t i = ids.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(ids[i - 1], ids[j]);
    }
}

}  // namespace

Splits make_cv_splits(std::size_t n_rows, std::span<const std::int32_t> labels, int folds,
                      int repeats, bool stratified, std::uint64_t seed) {
    if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
    if (repeats < 1) throw ValidationError("cross-validation needs at least 1 repeat");
    if (n_rows < static_cast<std::size_t>(folds)) {
        throw ValidationError("cannot split " + std::to_string(n_rows) + " rows into " +
                              std::to_string(folds) + " folds");
    }
    if (stratified && labels.size() != n_rows) {
        throw ValidationError("stratified splitting needs one label per row");
    }

    Rng root(seed);
    Splits splits;
    splits.reserve(static_cast<std::size_t>(repeats));
    for (int rep = 0; rep < repeats; ++rep) {
        Rng rep_rng = root.split(static_cast<std::uint64_t>(rep));
        std::vector<std::vector<Id>> test_rows(static_cast<std::size_t>(folds));

        if (stratified) {
            std::int32_t n_classes = 0;
            for (std::int32_t l : labels) n_classes = std::max(n_classes, l + 1);
            std::size_t cursor = 0;
            for (std::int32_t c = 0; c < n_classes; ++c) {
                std::vector<Id> members;
                for (std::size_t i = 0; i < n_rows; ++i) {
                    if (labels[i] == c) members.push_back(static_cast<Id>(i));
                }
                shuffle_ids(members, rep_rng);
                for (Id m : members) {
                    test_rows[cursor % static_cast<std::size_t>(folds)].push_back(m);
                    ++cursor;
                }
            }
        } else {
            std::vector<Id> perm(n_rows);
            std::iota(perm.begin(), perm.end(), 0);
            shuffle_ids(perm, rep_rng);
            // First n_rows % folds folds take the extra row.
            std::size_t base = n_rows / static_cast<std::size_t>(folds);
            std::size_t extra = n_rows % static_cast<std::size_t>(folds);
            std::size_t start = 0;
            for (int f = 0; f < folds; ++f) {
                std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
                test_rows[static_cast<std::size_t>(f)].assign(perm.begin() + start,
                                                              perm.begin() + start + size);
                start += size;
            }
        }

        std::vector<FoldSplit> rep_splits(static_cast<std::size_t>(folds));
        std::vector<char> in_test(n_rows, 0);
        for (int f = 0; f < folds; ++f) {
            FoldSplit& fs = rep_splits[static_cast<std::size_t>(f)];
            fs.test = test_rows[static_cast<std::size_t>(f)];
            std::sort(fs.test.begin(), fs.test.end());
            std::fill(in_test.begin(), in_test.end(), 0);
            for (Id r : fs.test) in_test[static_cast<std::size_t>(r)] = 1;
            fs.train.reserve(n_rows - fs.test.size());
            for (std::size_t i = 0; i < n_rows; ++i) {
                if (!in_test[i]) fs.train.push_back(static_cast<Id>(i));
            }
        }
        splits.push_back(std::move(rep_splits));
    }
    return splits;
}

Run run_task(const Task& task, const DataSet& dataset, const LearnerSpec& spec,
             std::uint64_t seed) {
    if (task.task_type != TaskType::SupervisedClassification) {
        throw ValidationError("only supervised classification tasks are supported");
    }
    if (task.data_id != dataset.desc.data_id) {
        throw ValidationError("task " + std::to_string(task.task_id) + " references dataset " +
                              std::to_string(task.data_id) + ", got dataset " +
                              std::to_string(dataset.desc.data_id));
    }
    if (task.splits.empty()) {
        throw ValidationError("task " + std::to_string(task.task_id) + " carries no splits");
    }
    const LearnerInfo* info = find_learner(spec.name);
    if (!info) throw ValidationError("unknown learner '" + spec.name + "'");

    TrainingView view = build_training_view(dataset.relation, task.target_feature);

    Run run;
    run.task_id = task.task_id;
    for (const auto& p : info->parameters) {
        auto it = spec.hyperparameters.find(p.name);
        std::string value = it != spec.hyperparameters.end() ? it->second : p.default_value;
        run.parameter_settings.push_back(
            {p.name, value, spec.explicit_params.count(p.name) == 0});
    }
    run.seed_settings.emplace_back("generator", std::string(Rng::kGeneratorName));
    run.seed_settings.emplace_back("seed", std::to_string(seed));

    Rng root(seed);
    const int folds = static_cast<int>(task.splits.front().size());
    for (std::size_t rep = 0; rep < task.splits.size(); ++rep) {
        for (std::size_t fold = 0; fold < task.splits[rep].size(); ++fold) {
            const FoldSplit& fs = task.splits[rep][fold];
            Rng cell_rng = root.split(rep * static_cast<std::size_t>(folds) + fold);
            FittedModel fitted = fit_learner(spec, view, fs.train, cell_rng);
            std::vector<Prediction> preds = fitted.predict(view, fs.test);
            for (std::size_t i = 0; i < fs.test.size(); ++i) {
                PredictionRow row;
                row.repeat = static_cast<int>(rep);
                row.fold = static_cast<int>(fold);
                row.row_id = fs.test[i];
                row.predicted = view.classes[static_cast<std::size_t>(preds[i].label)];
                row.truth = view.classes[static_cast<std::size_t>(
                    view.target[static_cast<std::size_t>(fs.test[i])])];
                row.confidences.reserve(view.classes.size());
                for (std::size_t k = 0; k < view.classes.size(); ++k) {
                    row.confidences.emplace_back(view.classes[k], preds[i].confidences[k]);
                }
                run.predictions.push_back(std::move(row));
            }
        }
    }

    run.evaluations = evaluate_predictions(run.predictions, task);
    return run;
}

double auc_rank_statistic(std::span<const double> scores, const std::vector<bool>& is_positive) {
    if (scores.size() != is_positive.size()) {
        throw ValidationError("scores and labels must have equal length");
    }
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (bool p : is_positive) n_pos += p ? 1 : 0;
    std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw ValidationError("AUC needs at least one positive and one negative example");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks: tied scores share the average of their rank range.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (is_positive[order[k]]) rank_sum_pos += midrank;
        }
        i = j;
    }
    double np = static_cast<double>(n_pos);
    double nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

namespace {

struct FoldedPredictions {
    int folds = 0;
    int repeats = 0;
    // cell index = repeat * folds + fold
    std::vector<std::vector<const PredictionRow*>> cells;
    std::vector<std::string> classes;  // from confidences when present
};

FoldedPredictions group_by_fold(std::span<const PredictionRow> preds, const Task& task) {
    FoldedPredictions out;
    out.folds = task.estimation_procedure.folds;
    out.repeats = task.estimation_procedure.repeats;
    out.cells.resize(static_cast<std::size_t>(out.folds) * static_cast<std::size_t>(out.repeats));
    if (preds.empty()) throw ValidationError("no predictions to evaluate");

    for (const PredictionRow& row : preds) {
        if (row.repeat < 0 || row.repeat >= out.repeats || row.fold < 0 ||
            row.fold >= out.folds) {
            throw ValidationError("prediction row references repeat " +
                                  std::to_string(row.repeat) + ", fold " +
                                  std::to_string(row.fold) + " outside the task's " +
                                  std::to_string(out.repeats) + "x" + std::to_string(out.folds) +
                                  " scheme");
        }
        out.cells[static_cast<std::size_t>(row.repeat) * static_cast<std::size_t>(out.folds) +
                  static_cast<std::size_t>(row.fold)]
            .push_back(&row);
    }
    for (std::size_t c = 0; c < out.cells.size(); ++c) {
        if (out.cells[c].empty()) {
            throw ValidationError(
                "predictions are missing fold " + std::to_string(c % static_cast<std::size_t>(out.folds)) +
                " of repeat " + std::to_string(c / static_cast<std::size_t>(out.folds)));
        }
    }

    for (const auto& [label, conf] : preds.front().confidences) {
        (void)conf;
        out.classes.push_back(label);
    }
    if (!out.classes.empty()) {
        for (const PredictionRow& row : preds) {
            if (row.confidences.size() != out.classes.size()) {
                throw ValidationError("inconsistent confidence columns across prediction rows");
            }
            bool predicted_known = false;
            bool truth_known = false;
            for (std::size_t k = 0; k < out.classes.size(); ++k) {
                if (row.confidences[k].first != out.classes[k]) {
                    throw ValidationError("inconsistent confidence columns across prediction rows");
                }
                predicted_known = predicted_known || row.predicted == out.classes[k];
                truth_known = truth_known || row.truth == out.classes[k];
            }
            if (!predicted_known || !truth_known) {
                throw ValidationError("prediction row carries label '" +
                                      (predicted_known ? row.truth : row.predicted) +
                                      "' outside the declared classes");
            }
        }
    }
    return out;
}

MeasureValues accuracy_measure(const FoldedPredictions& folded) {
    MeasureValues mv;
    mv.per_fold.reserve(folded.cells.size());
    for (const auto& cell : folded.cells) {
        std::size_t correct = 0;
        for (const PredictionRow* row : cell) {
            if (row->predicted == row->truth) ++correct;
        }
        mv.per_fold.push_back(static_cast<double>(correct) / static_cast<double>(cell.size()));
    }
    mv.aggregate = std::accumulate(mv.per_fold.begin(), mv.per_fold.end(), 0.0) /
                   static_cast<double>(mv.per_fold.size());
    return mv;
}

/// AUC per fold; positive class = second declared level. Returns nothing when
/// any fold lacks one of the classes (per-fold AUC would be undefined).
std::optional<MeasureValues> try_auc_measure(const FoldedPredictions& folded) {
    if (folded.classes.size() != 2) return std::nullopt;
    const std::string& positive = folded.classes[1];
    MeasureValues mv;
    mv.per_fold.reserve(folded.cells.size());
    for (const auto& cell : folded.cells) {
        std::vector<double> scores;
        std::vector<bool> is_pos;
        scores.reserve(cell.size());
        is_pos.reserve(cell.size());
        for (const PredictionRow* row : cell) {
            scores.push_back(row->confidences[1].second);
            is_pos.push_back(row->truth == positive);
        }
        std::size_t n_pos = static_cast<std::size_t>(
            std::count(is_pos.begin(), is_pos.end(), true));
        if (n_pos == 0 || n_pos == is_pos.size()) return std::nullopt;
        mv.per_fold.push_back(auc_rank_statistic(scores, is_pos));
    }
    mv.aggregate = std::accumulate(mv.per_fold.begin(), mv.per_fold.end(), 0.0) /
                   static_cast<double>(mv.per_fold.size());
    return mv;
}

}  // namespace

std::map<std::string, MeasureValues> evaluate_predictions(std::span<const PredictionRow> preds,
                                                          const Task& task) {
    FoldedPredictions folded = group_by_fold(preds, task);
    std::map<std::string, MeasureValues> out;
    out["predictive_accuracy"] = accuracy_measure(folded);
    if (auto auc = try_auc_measure(folded)) out["area_under_roc_curve"] = *auc;
    return out;
}

MeasureValues evaluate_single_measure(std::span<const PredictionRow> preds, const Task& task,
                                      std::string_view measure) {
    FoldedPredictions folded = group_by_fold(preds, task);
    if (measure == "predictive_accuracy") return accuracy_measure(folded);
    if (measure == "area_under_roc_curve") {
        if (folded.classes.empty()) {
            throw ValidationError("area_under_roc_curve needs prediction confidences");
        }
        if (folded.classes.size() != 2) {
            throw ValidationError("area_under_roc_curve is only defined for binary targets; "
                                  "this target has " + std::to_string(folded.classes.size()) +
                                  " classes");
        }
        auto auc = try_auc_measure(folded);
        if (!auc) {
            throw ValidationError(
                "area_under_roc_curve is undefined: some fold lacks one of the classes");
        }
        return *auc;
    }
    throw ValidationError("unknown evaluation measure '" + std::string(measure) + "'");
}

BenchmarkResult convert_runs_to_benchmark(std::span<const RunContext> runs) {
    if (runs.empty()) throw ValidationError("no runs to tabulate");
    BenchmarkResult result;
    result.measure = runs.front().measure;
    for (const RunContext& ctx : runs) {
        if (ctx.measure != result.measure) {
            throw Error("cannot tabulate mixed measures: '" + result.measure + "' vs '" +
                        ctx.measure + "'");
        }
        auto it = ctx.run.evaluations.find(ctx.measure);
        if (it == ctx.run.evaluations.end()) {
            throw Error("run on task " + std::to_string(ctx.run.task_id) +
                        " has no evaluation for measure '" + ctx.measure + "'");
        }
        auto key = std::make_pair(ctx.run.task_id, ctx.learner_label);
        if (result.cells.count(key)) {
            throw Error("duplicate benchmark cell for task " + std::to_string(ctx.run.task_id) +
                        ", learner '" + ctx.learner_label + "'");
        }
        BenchmarkCell cell;
        cell.fold_values = it->second.per_fold;
        cell.aggregate = it->second.aggregate;
        result.cells.emplace(std::move(key), std::move(cell));
    }
    return result;
}

std::map<std::string, double> compute_data_qualities(const arff::Relation& rel,
                                                     std::string_view target) {
    std::map<std::string, double> q;
    q["NumberOfInstances"] = static_cast<double>(rel.n_rows());
    q["NumberOfFeatures"] = static_cast<double>(rel.n_attributes());
    q["NumberOfMissingValues"] = static_cast<double>(rel.missing_count());

    std::size_t numeric = 0;
    std::size_t symbolic = 0;
    for (const auto& attr : rel.attributes) {
        if (attr.kind == arff::Kind::Numeric) ++numeric;
        if (attr.kind == arff::Kind::Nominal) ++symbolic;
    }
    q["NumberOfNumericFeatures"] = static_cast<double>(numeric);
    q["NumberOfSymbolicFeatures"] = static_cast<double>(symbolic);

    std::ptrdiff_t target_idx = rel.attribute_index(target);
    if (target_idx >= 0 &&
        rel.attributes[static_cast<std::size_t>(target_idx)].kind == arff::Kind::Nominal) {
        const auto& levels = rel.attributes[static_cast<std::size_t>(target_idx)].levels;
        std::vector<std::size_t> counts(levels.size(), 0);
        std::size_t total = 0;
        for (const auto& row : rel.rows) {
            const arff::Value& v = row[static_cast<std::size_t>(target_idx)];
            if (std::holds_alternative<arff::MissingValue>(v)) continue;
            counts[static_cast<std::size_t>(std::get<arff::NominalValue>(v).index)]++;
            ++total;
        }
        q["NumberOfClasses"] = static_cast<double>(levels.size());
        if (total > 0) {
            std::size_t majority = 0;
            std::size_t minority = total;
            double entropy = 0.0;
            for (std::size_t c : counts) {
                majority = std::max(majority, c);
                if (c > 0) {
                    minority = std::min(minority, c);
                    double p = static_cast<double>(c) / static_cast<double>(total);
                    entropy -= p * std::log2(p);
                }
            }
            q["MajorityClassSize"] = static_cast<double>(majority);
            q["MinorityClassSize"] = static_cast<double>(minority);
            q["ClassEntropy"] = entropy;
        }
    }
    return q;
}

}  // namespace mlhub
