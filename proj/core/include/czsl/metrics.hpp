#pragma once

#include "czsl/task_stream.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace czsl {

// 2su / (s + u), and 0 when both rates are 0.
double harmonic_mean(double seen, double unseen);

// Mean over class_set of the per-class hit rates. Every class in class_set
// must have at least one sample in `actual`; accuracy is never inflated by
// absent classes.
double per_class_accuracy(const std::vector<std::uint32_t>& predicted,
                          const std::vector<std::uint32_t>& actual,
                          const std::vector<std::uint32_t>& class_set);

struct TaskEval {
    std::size_t task_id = 0;
    double seen_accuracy = 0.0;
    // Absent when the task has no unseen pool (last task under setting-1).
    std::optional<double> unseen_accuracy;
    std::optional<double> harmonic;
};

struct StreamAggregates {
    double mean_seen_accuracy = 0.0;
    std::optional<double> mean_unseen_accuracy;
    std::optional<double> mean_harmonic;
};

// Setting-1 averages: seen over all T tasks, unseen and harmonic over the
// tasks that have an unseen pool (the first T-1).
StreamAggregates aggregate_setting1(const std::vector<TaskEval>& evals);

// Setting-2 averages run over all T tasks; every entry must carry an
// unseen accuracy.
StreamAggregates aggregate_setting2(const std::vector<TaskEval>& evals);

// acc[l][j]: accuracy on task j+1's own seen test pool after training task
// l+1 (0-based, lower triangle). Average over the earlier tasks of the gap
// between their best historic accuracy and their final accuracy. Absent for
// single-task streams.
std::optional<double>
forgetting_measure(const std::vector<std::vector<double>>& acc);

// Cumulative evaluation pools after task t. Seen indices collect the
// held-out test samples of every class met so far. Under setting-1 the
// unseen pool is every sample of the not-yet-trained classes; under
// setting-2 it is the cumulative unseen-class test pool. label_space is the
// sorted union of both class sets.
struct EvalPools {
    std::vector<std::size_t> seen_indices;
    std::vector<std::uint32_t> seen_classes;
    std::vector<std::size_t> unseen_indices;
    std::vector<std::uint32_t> unseen_classes;
    std::vector<std::uint32_t> label_space;
};
EvalPools build_eval_pools(const TaskStream& stream, std::size_t t);

using PredictFn =
    std::function<std::vector<std::uint32_t>(const Matrix& features)>;

// Runs the predictor over both pools of task t and scores per-class.
TaskEval evaluate_task(const PredictFn& predict, const FeatureDataset& dataset,
                       const TaskStream& stream, std::size_t t);

// Accuracy on task j's own seen test pool (classes introduced at j), for
// the forgetting matrix.
double seen_pool_accuracy(const PredictFn& predict,
                          const FeatureDataset& dataset,
                          const TaskStream& stream, std::size_t j);

struct MetricsReport {
    std::string model;    // "cada" | "cvae"
    std::string strategy; // memory strategy name
    Setting setting = Setting::setting1;
    std::uint64_t seed = 0;
    std::string config_hash; // hex digest of the canonical config
    std::vector<TaskEval> tasks;
    StreamAggregates aggregates;
    std::optional<double> forgetting;
    std::vector<std::vector<double>> accuracy_matrix;
};

} // namespace czsl
