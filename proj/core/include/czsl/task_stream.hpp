#pragma once

#include "czsl/dataset.hpp"

#include <cstdint>
#include <vector>

namespace czsl {

enum class Setting { setting1 = 1, setting2 = 2 };

// One task of a continual stream. seen_classes is cumulative over tasks
// 1..t; unseen_classes_visible are the classes whose attributes may be used
// for generation at task t (disjoint from seen_classes).
struct TaskSplit {
    std::size_t task_id = 0; // 1-based
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_seen_indices;
    std::vector<std::size_t> test_unseen_indices; // empty under setting-1
    std::vector<std::uint32_t> seen_classes;
    std::vector<std::uint32_t> unseen_classes_visible;
};

struct TaskStream {
    Setting setting = Setting::setting1;
    std::vector<TaskSplit> tasks;

    std::size_t total_tasks() const { return tasks.size(); }
    const TaskSplit& task(std::size_t t) const; // 1-based, checked

    // Classes first seen at task t: seen(t) minus seen(t-1).
    std::vector<std::uint32_t> classes_introduced_at(std::size_t t) const;
};

// Classes are shuffled by class_order_seed and cut into num_tasks contiguous
// groups, near-equal with remainders going to earlier tasks. Per class,
// max(1, floor(test_fraction * n)) samples are held out for test. All
// classes after task t are unseen-but-attribute-visible: this setting
// assumes every class attribute is known up front.
TaskStream split_setting1(const FeatureDataset& dataset, std::size_t num_tasks,
                          std::uint64_t class_order_seed, double test_fraction);

// Seen and unseen classes come from a fixed standard split and keep their
// role in every task. Each task gets a near-equal share of both groups;
// seen classes contribute 80% train / 20% test (at least one test sample),
// unseen classes contribute all their samples as test. The cumulative pools
// after the last task equal the provided standard split.
TaskStream split_setting2(const FeatureDataset& dataset, std::size_t num_tasks,
                          const std::vector<std::uint32_t>& seen_classes,
                          const std::vector<std::uint32_t>& unseen_classes,
                          std::uint64_t seed);

} // namespace czsl
