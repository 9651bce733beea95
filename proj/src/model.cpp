#include "mlhub/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace mlhub {

std::string to_string(DataStatus status) {
    switch (status) {
        case DataStatus::Active: return "active";
        case DataStatus::Deactivated: return "deactivated";
        case DataStatus::InPreparation: return "in_preparation";
    }
    return "active";
}

std::optional<DataStatus> data_status_from_string(const std::string& s) {
    if (s == "active") return DataStatus::Active;
    if (s == "deactivated") return DataStatus::Deactivated;
    if (s == "in_preparation") return DataStatus::InPreparation;
    return std::nullopt;
}

std::string to_string(TaskType type) {
    switch (type) {
        case TaskType::SupervisedClassification: return "Supervised Classification";
    }
    return "Supervised Classification";
}

std::optional<TaskType> task_type_from_string(const std::string& s) {
    if (s == "Supervised Classification" || s == "SupervisedClassification") {
        return TaskType::SupervisedClassification;
    }
    return std::nullopt;
}

std::string EstimationProcedure::name() const {
    std::string base = std::to_string(folds) + "-fold Crossvalidation";
    if (repeats > 1) {
        base = std::to_string(repeats) + " times " + base;
    }
    return base;
}

std::vector<std::pair<Id, std::string>> BenchmarkResult::missing_cells(
    const std::vector<Id>& task_ids, const std::vector<std::string>& learners) const {
    std::vector<std::pair<Id, std::string>> missing;
    for (const Id task : task_ids) {
        for (const auto& learner : learners) {
            if (!cells.contains({task, learner})) {
                missing.emplace_back(task, learner);
            }
        }
    }
    return missing;
}

namespace {

void check(std::vector<Violation>& out, bool ok, const std::string& field, const std::string& rule) {
    if (!ok) {
        out.push_back({field, rule});
    }
}

}  // namespace

std::vector<Violation> validate(const DataSetDescription& desc) {
    std::vector<Violation> v;
    check(v, desc.data_id > 0, "data_id", "must be a positive integer");
    check(v, !desc.name.empty(), "name", "must be non-empty");
    check(v, desc.version >= 1, "version", "must be >= 1");
    return v;
}

std::vector<Violation> validate(const DataSet& ds) {
    std::vector<Violation> v = validate(ds.desc);
    const auto idx = ds.relation.attribute_index(ds.desc.default_target_attribute);
    check(v, idx >= 0, "default_target_attribute",
          "must name an attribute of the relation ('" + ds.desc.default_target_attribute + "')");
    check(v, ds.target_index == idx, "target_index", "must match the default target attribute");
    if (idx >= 0) {
        check(v, ds.relation.attributes[static_cast<std::size_t>(idx)].kind == arff::Kind::Nominal,
              "default_target_attribute", "target column must be nominal for classification");
    }
    return v;
}

std::vector<Violation> validate(const EstimationProcedure& ep) {
    std::vector<Violation> v;
    check(v, ep.folds >= 2, "folds", "must be >= 2");
    check(v, ep.repeats >= 1, "repeats", "must be >= 1");
    return v;
}

std::vector<Violation> validate(const Task& task) {
    std::vector<Violation> v;
    check(v, task.task_id > 0, "task_id", "must be a positive integer");
    check(v, task.data_id > 0, "data_id", "must be a positive integer");
    check(v, !task.target_feature.empty(), "target_feature", "must be non-empty");
    for (auto violation : validate(task.estimation_procedure)) {
        v.push_back({"estimation_procedure." + violation.field, violation.rule});
    }
    check(v, !task.splits.empty(), "splits", "must define at least one repeat");
    check(v, static_cast<int>(task.splits.size()) == task.estimation_procedure.repeats, "splits",
          "repeat count must match the estimation procedure");

    // Per repeat: test sets partition the row-id universe and each train set is
    // exactly the complement of its test set.
    std::set<Id> universe;
    for (const auto& repeat : task.splits) {
        for (const auto& fold : repeat) {
            universe.insert(fold.test.begin(), fold.test.end());
            universe.insert(fold.train.begin(), fold.train.end());
        }
    }
    for (std::size_t r = 0; r < task.splits.size(); ++r) {
        const auto& repeat = task.splits[r];
        check(v, static_cast<int>(repeat.size()) == task.estimation_procedure.folds,
              "splits[" + std::to_string(r) + "]", "fold count must match the estimation procedure");
        std::set<Id> seen_test;
        for (std::size_t f = 0; f < repeat.size(); ++f) {
            const auto& fold = repeat[f];
            const std::string where = "splits[" + std::to_string(r) + "][" + std::to_string(f) + "]";
            std::set<Id> test(fold.test.begin(), fold.test.end());
            std::set<Id> train(fold.train.begin(), fold.train.end());
            check(v, test.size() == fold.test.size(), where + ".test", "row ids must be distinct");
            check(v, train.size() == fold.train.size(), where + ".train", "row ids must be distinct");
            for (const Id id : fold.test) {
                if (!seen_test.insert(id).second) {
                    v.push_back({where + ".test",
                                 "row " + std::to_string(id) + " appears in more than one test fold"});
                }
            }
            std::vector<Id> overlap;
            std::set_intersection(test.begin(), test.end(), train.begin(), train.end(),
                                  std::back_inserter(overlap));
            check(v, overlap.empty(), where, "train and test must be disjoint");
            check(v, test.size() + train.size() == universe.size(), where,
                  "train and test together must cover all rows");
        }
        check(v, seen_test.size() == universe.size(),
              "splits[" + std::to_string(r) + "]", "test folds must cover every row");
    }
    return v;
}

std::vector<Violation> validate(const Flow& flow) {
    std::vector<Violation> v;
    check(v, flow.flow_id > 0, "flow_id", "must be a positive integer");
    check(v, !flow.name.empty(), "name", "must be non-empty");
    check(v, flow.version >= 1, "version", "must be >= 1");
    std::unordered_set<std::string> names;
    for (const auto& p : flow.parameters) {
        if (!names.insert(p.name).second) {
            v.push_back({"parameters", "duplicate parameter name '" + p.name + "'"});
        }
    }
    return v;
}

namespace {

void validate_prediction_rows(std::vector<Violation>& v, const Run& run) {
    for (std::size_t i = 0; i < run.predictions.size(); ++i) {
        const auto& p = run.predictions[i];
        const std::string where = "predictions[" + std::to_string(i) + "]";
        if (p.confidences.empty()) {
            continue;  // confidences are optional
        }
        double sum = 0.0;
        bool non_negative = true;
        for (const auto& [label, prob] : p.confidences) {
            sum += prob;
            non_negative = non_negative && prob >= 0.0;
        }
        check(v, non_negative, where + ".confidences", "must be >= 0");
        check(v, std::abs(sum - 1.0) <= 1e-9, where + ".confidences", "must sum to 1 +/- 1e-9");
        // argmax with ties broken by declaration order
        std::size_t best = 0;
        for (std::size_t k = 1; k < p.confidences.size(); ++k) {
            if (p.confidences[k].second > p.confidences[best].second) {
                best = k;
            }
        }
        check(v, p.predicted == p.confidences[best].first, where + ".predicted",
              "must equal the argmax of the confidences");
    }
}

}  // namespace

std::vector<Violation> validate(const Run& run) {
    std::vector<Violation> v;
    check(v, run.run_id >= 0, "run_id", "must be >= 0 (0 = not yet uploaded)");
    check(v, run.task_id > 0, "task_id", "must be a positive integer");
    check(v, run.flow_id > 0, "flow_id", "must be a positive integer");
    validate_prediction_rows(v, run);
    return v;
}

std::vector<Violation> validate(const Run& run, const Task& task) {
    std::vector<Violation> v = validate(run);

    // Every (repeat, fold, row_id) of the task's test splits exactly once.
    std::map<std::pair<int, int>, std::map<Id, int>> counts;
    for (const auto& p : run.predictions) {
        counts[{p.repeat, p.fold}][p.row_id] += 1;
    }
    for (std::size_t r = 0; r < task.splits.size(); ++r) {
        for (std::size_t f = 0; f < task.splits[r].size(); ++f) {
            const auto block = counts.find({static_cast<int>(r), static_cast<int>(f)});
            const std::string where =
                "predictions(repeat=" + std::to_string(r) + ",fold=" + std::to_string(f) + ")";
            if (block == counts.end()) {
                v.push_back({where, "block is missing entirely"});
                continue;
            }
            for (const Id id : task.splits[r][f].test) {
                const auto it = block->second.find(id);
                if (it == block->second.end()) {
                    v.push_back({where, "row " + std::to_string(id) + " has no prediction"});
                } else if (it->second != 1) {
                    v.push_back({where, "row " + std::to_string(id) + " predicted " +
                                            std::to_string(it->second) + " times"});
                }
            }
            if (block->second.size() != task.splits[r][f].test.size()) {
                v.push_back({where, "contains predictions for rows outside the test split"});
            }
        }
    }
    for (const auto& [key, rows] : counts) {
        const auto [r, f] = key;
        const bool known = r >= 0 && static_cast<std::size_t>(r) < task.splits.size() && f >= 0 &&
                           static_cast<std::size_t>(f) < task.splits[r].size();
        if (!known) {
            v.push_back({"predictions", "block (repeat=" + std::to_string(r) + ",fold=" +
                                            std::to_string(f) + ") is not part of the task"});
        }
    }
    return v;
}

std::vector<Violation> validate(const BenchmarkResult& bmr) {
    std::vector<Violation> v;
    check(v, !bmr.measure.empty(), "measure", "must be non-empty");
    std::size_t folds = 0;
    bool first = true;
    for (const auto& [key, cell] : bmr.cells) {
        if (first) {
            folds = cell.fold_values.size();
            first = false;
        } else if (cell.fold_values.size() != folds) {
            v.push_back({"cells", "cell (" + std::to_string(key.first) + ", " + key.second +
                                      ") has a different fold count"});
        }
    }
    return v;
}

}  // namespace mlhub
