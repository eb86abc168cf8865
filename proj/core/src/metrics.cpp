#include "czsl/metrics.hpp"

#include "czsl/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

namespace czsl {

double harmonic_mean(double seen, double unseen) {
    if (seen + unseen == 0.0) return 0.0;
    return 2.0 * seen * unseen / (seen + unseen);
}

double per_class_accuracy(const std::vector<std::uint32_t>& predicted,
                          const std::vector<std::uint32_t>& actual,
                          const std::vector<std::uint32_t>& class_set) {
    if (predicted.size() != actual.size()) {
        throw ShapeError("prediction count " + std::to_string(predicted.size()) +
                         " does not match label count " +
                         std::to_string(actual.size()));
    }
    if (class_set.empty()) throw EvalError("empty class set");
    std::map<std::uint32_t, std::pair<std::size_t, std::size_t>> hits;
    for (std::uint32_t cls : class_set) hits[cls] = {0, 0};
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const auto it = hits.find(actual[i]);
        if (it == hits.end()) {
            throw EvalError("label " + std::to_string(actual[i]) +
                            " is outside the evaluated class set");
        }
        ++it->second.second;
        if (predicted[i] == actual[i]) ++it->second.first;
    }
    double sum = 0.0;
    for (const auto& [cls, counts] : hits) {
        if (counts.second == 0) {
            throw EvalError("class " + std::to_string(cls) +
                            " has no test samples");
        }
        sum += static_cast<double>(counts.first) /
               static_cast<double>(counts.second);
    }
    return sum / static_cast<double>(hits.size());
}

namespace {

StreamAggregates aggregate(const std::vector<TaskEval>& evals) {
    if (evals.empty()) throw EvalError("no task evaluations to aggregate");
    StreamAggregates agg;
    double seen_sum = 0.0, unseen_sum = 0.0, h_sum = 0.0;
    std::size_t unseen_count = 0;
    for (const TaskEval& e : evals) {
        seen_sum += e.seen_accuracy;
        if (e.unseen_accuracy.has_value()) {
            unseen_sum += *e.unseen_accuracy;
            h_sum += e.harmonic.value_or(
                harmonic_mean(e.seen_accuracy, *e.unseen_accuracy));
            ++unseen_count;
        }
    }
    agg.mean_seen_accuracy = seen_sum / static_cast<double>(evals.size());
    if (unseen_count > 0) {
        agg.mean_unseen_accuracy =
            unseen_sum / static_cast<double>(unseen_count);
        agg.mean_harmonic = h_sum / static_cast<double>(unseen_count);
    }
    return agg;
}

} // namespace

StreamAggregates aggregate_setting1(const std::vector<TaskEval>& evals) {
    return aggregate(evals);
}

StreamAggregates aggregate_setting2(const std::vector<TaskEval>& evals) {
    for (const TaskEval& e : evals) {
        if (!e.unseen_accuracy.has_value()) {
            throw EvalError("task " + std::to_string(e.task_id) +
                            " lacks an unseen accuracy");
        }
    }
    return aggregate(evals);
}

std::optional<double>
forgetting_measure(const std::vector<std::vector<double>>& acc) {
    const std::size_t total = acc.size();
    if (total < 2) return std::nullopt;
    for (std::size_t l = 0; l < total; ++l) {
        if (acc[l].size() != l + 1) {
            throw ShapeError("accuracy matrix row " + std::to_string(l) +
                             " has " + std::to_string(acc[l].size()) +
                             " entries, expected " + std::to_string(l + 1));
        }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < total; ++j) {
        double best = acc[j][j];
        for (std::size_t l = j; l + 1 < total; ++l) {
            best = std::max(best, acc[l][j]);
        }
        sum += best - acc[total - 1][j];
    }
    return sum / static_cast<double>(total - 1);
}

EvalPools build_eval_pools(const TaskStream& stream, std::size_t t) {
    const TaskSplit& current = stream.task(t); // validates t
    EvalPools pools;
    pools.seen_classes = current.seen_classes;
    pools.unseen_classes = current.unseen_classes_visible;

    for (std::size_t i = 1; i <= t; ++i) {
        const TaskSplit& task = stream.task(i);
        pools.seen_indices.insert(pools.seen_indices.end(),
                                  task.test_seen_indices.begin(),
                                  task.test_seen_indices.end());
        pools.unseen_indices.insert(pools.unseen_indices.end(),
                                    task.test_unseen_indices.begin(),
                                    task.test_unseen_indices.end());
    }
    if (stream.setting == Setting::setting1) {
        // Future classes are the unseen pool; all of their samples count.
        for (std::size_t i = t + 1; i <= stream.total_tasks(); ++i) {
            const TaskSplit& task = stream.task(i);
            pools.unseen_indices.insert(pools.unseen_indices.end(),
                                        task.train_indices.begin(),
                                        task.train_indices.end());
            pools.unseen_indices.insert(pools.unseen_indices.end(),
                                        task.test_seen_indices.begin(),
                                        task.test_seen_indices.end());
        }
    }
    std::sort(pools.seen_indices.begin(), pools.seen_indices.end());
    std::sort(pools.unseen_indices.begin(), pools.unseen_indices.end());

    std::set<std::uint32_t> space(pools.seen_classes.begin(),
                                  pools.seen_classes.end());
    space.insert(pools.unseen_classes.begin(), pools.unseen_classes.end());
    pools.label_space.assign(space.begin(), space.end());
    return pools;
}

namespace {

Matrix gather_rows(const FeatureDataset& dataset,
                   const std::vector<std::size_t>& indices) {
    Matrix out(indices.size(), dataset.feature_dim());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        auto src = dataset.features.row(indices[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

std::vector<std::uint32_t>
gather_labels(const FeatureDataset& dataset,
              const std::vector<std::size_t>& indices) {
    std::vector<std::uint32_t> out(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        out[r] = dataset.labels[indices[r]];
    }
    return out;
}

} // namespace

TaskEval evaluate_task(const PredictFn& predict, const FeatureDataset& dataset,
                       const TaskStream& stream, std::size_t t) {
    const EvalPools pools = build_eval_pools(stream, t);
    TaskEval eval;
    eval.task_id = t;
    {
        const Matrix features = gather_rows(dataset, pools.seen_indices);
        eval.seen_accuracy =
            per_class_accuracy(predict(features),
                               gather_labels(dataset, pools.seen_indices),
                               pools.seen_classes);
    }
    if (!pools.unseen_indices.empty()) {
        const Matrix features = gather_rows(dataset, pools.unseen_indices);
        eval.unseen_accuracy =
            per_class_accuracy(predict(features),
                               gather_labels(dataset, pools.unseen_indices),
                               pools.unseen_classes);
        eval.harmonic = harmonic_mean(eval.seen_accuracy, *eval.unseen_accuracy);
    }
    return eval;
}

double seen_pool_accuracy(const PredictFn& predict,
                          const FeatureDataset& dataset,
                          const TaskStream& stream, std::size_t j) {
    const TaskSplit& task = stream.task(j);
    const Matrix features = gather_rows(dataset, task.test_seen_indices);
    return per_class_accuracy(predict(features),
                              gather_labels(dataset, task.test_seen_indices),
                              stream.classes_introduced_at(j));
}

} // namespace czsl
