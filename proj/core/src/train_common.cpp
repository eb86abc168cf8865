#include "train_common.hpp"

#include "czsl/errors.hpp"

#include <string>

namespace czsl::detail {

TrainingRows collect_training_rows(const TaskSplit& task,
                                   const FeatureDataset& dataset,
                                   const EpisodicMemory& memory,
                                   bool replay_enabled, std::size_t d_x) {
    TrainingRows rows;
    for (std::size_t idx : task.train_indices) {
        if (idx >= dataset.num_samples()) {
            throw DataError("task " + std::to_string(task.task_id) +
                            " references sample " + std::to_string(idx) +
                            " beyond dataset size");
        }
        rows.features.push_back(dataset.features.row(idx));
        rows.labels.push_back(dataset.labels[idx]);
    }
    if (replay_enabled) {
        rows.replay = memory.snapshot();
        for (const MemoryEntry& entry : rows.replay) {
            if (entry.feature.size() != d_x) {
                throw ShapeError("memory entry feature width " +
                                 std::to_string(entry.feature.size()) +
                                 " does not match model input " +
                                 std::to_string(d_x));
            }
            rows.features.push_back(entry.feature);
            rows.labels.push_back(entry.label);
        }
    }
    if (rows.features.empty()) {
        throw ConfigError("task " + std::to_string(task.task_id) +
                          " has no training samples");
    }
    for (std::uint32_t label : rows.labels) {
        if (label >= dataset.num_classes()) {
            throw DataError("training label " + std::to_string(label) +
                            " has no attribute row");
        }
    }
    return rows;
}

void offer_task_to_memory(const TaskSplit& task, const FeatureDataset& dataset,
                          EpisodicMemory& memory, Rng& rng) {
    for (std::size_t idx : task.train_indices) {
        MemoryEntry entry;
        auto feat = dataset.features.row(idx);
        entry.feature.assign(feat.begin(), feat.end());
        entry.label = dataset.labels[idx];
        auto attr = dataset.attributes.row(entry.label);
        entry.attribute.assign(attr.begin(), attr.end());
        entry.task_id = task.task_id;
        memory.offer(entry, rng);
    }
}

} // namespace czsl::detail
