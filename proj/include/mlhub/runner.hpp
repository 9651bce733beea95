#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlhub/arff.hpp"
#include "mlhub/learners.hpp"
#include "mlhub/model.hpp"

namespace mlhub {

/// k-fold cross-validation splits, [repeat][fold]. Stratification deals each
/// class's shuffled members to the folds in turn with a cursor that continues
/// across classes, so fold sizes differ by at most one both overall and
/// within every class. `labels` (class index per row) is only consulted when
/// `stratified` is true. Deterministic in `seed`.
Splits make_cv_splits(std::size_t n_rows, std::span<const std::int32_t> labels, int folds,
                      int repeats, bool stratified, std::uint64_t seed);

/// Train and evaluate `spec` on every (repeat, fold) of the task's splits.
/// The returned local Run (run_id 0) carries predictions in (repeat, fold,
/// row) order, parameter_settings with defaulted flags, seed_settings naming
/// the generator and seed, and locally computed evaluations. The fold at
/// (repeat r, fold f) trains from the generator seed split r*folds+f, so any
/// execution order produces identical output.
Run run_task(const Task& task, const DataSet& dataset, const LearnerSpec& spec,
             std::uint64_t seed);

/// Per-fold and aggregate predictive_accuracy, plus area_under_roc_curve for
/// binary targets when confidences are present and every fold contains both
/// classes. Throws on empty folds or labels outside the prediction scheme.
std::map<std::string, MeasureValues> evaluate_predictions(std::span<const PredictionRow> preds,
                                                          const Task& task);

/// One named measure; unlike evaluate_predictions this throws when the
/// measure cannot be computed (e.g. AUC on a >2-class target).
MeasureValues evaluate_single_measure(std::span<const PredictionRow> preds, const Task& task,
                                      std::string_view measure);

/// Midrank AUC of `scores` against binary ground truth; exactly equal to the
/// fraction of (positive, negative) pairs ranked correctly, ties half.
double auc_rank_statistic(std::span<const double> scores, const std::vector<bool>& is_positive);

/// A finished run plus the context a benchmark table needs.
struct RunContext {
    Run run;
    std::string learner_label;
    std::string measure = "predictive_accuracy";
};

/// Collect runs into a (task, learner) results table. All runs must carry the
/// same measure and fold count; duplicates of a cell are an error.
BenchmarkResult convert_runs_to_benchmark(std::span<const RunContext> runs);

/// Dataset meta-quality statistics (NumberOfInstances, NumberOfFeatures,
/// NumberOfClasses, MajorityClassSize, MinorityClassSize, ClassEntropy,
/// NumberOfMissingValues, NumberOfNumericFeatures, NumberOfSymbolicFeatures).
/// Class statistics require a nominal target and skip rows whose target is
/// missing; ClassEntropy is in bits.
std::map<std::string, double> compute_data_qualities(const arff::Relation& rel,
                                                     std::string_view target);

}  // namespace mlhub
