#pragma once

// Shared batch-assembly plumbing for the two model trainers. Internal to
// the library; not installed.

#include "czsl/dataset.hpp"
#include "czsl/memory.hpp"
#include "czsl/task_stream.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace czsl::detail {

// Feature spans point into the dataset and into `replay`; the struct must
// therefore stay put (move is fine, copy is not).
struct TrainingRows {
    std::vector<std::span<const double>> features;
    std::vector<std::uint32_t> labels;
    std::vector<MemoryEntry> replay;

    TrainingRows() = default;
    TrainingRows(const TrainingRows&) = delete;
    TrainingRows& operator=(const TrainingRows&) = delete;
    TrainingRows(TrainingRows&&) = default;
    TrainingRows& operator=(TrainingRows&&) = default;

    std::size_t size() const { return features.size(); }
};

TrainingRows collect_training_rows(const TaskSplit& task,
                                   const FeatureDataset& dataset,
                                   const EpisodicMemory& memory,
                                   bool replay_enabled, std::size_t d_x);

// Offers every current-task training sample to the memory, in index order.
void offer_task_to_memory(const TaskSplit& task, const FeatureDataset& dataset,
                          EpisodicMemory& memory, Rng& rng);

} // namespace czsl::detail
