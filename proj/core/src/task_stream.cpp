#include "czsl/task_stream.hpp"

#include "czsl/errors.hpp"
#include "czsl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace czsl {

const TaskSplit& TaskStream::task(std::size_t t) const {
    if (t < 1 || t > tasks.size()) {
        throw UsageError("task stream: task id " + std::to_string(t) +
                         " out of range 1.." + std::to_string(tasks.size()));
    }
    return tasks[t - 1];
}

std::vector<std::uint32_t> TaskStream::classes_introduced_at(std::size_t t) const {
    const TaskSplit& cur = task(t);
    if (t == 1) return cur.seen_classes;
    const TaskSplit& prev = task(t - 1);
    std::vector<std::uint32_t> out;
    std::set_difference(cur.seen_classes.begin(), cur.seen_classes.end(),
                        prev.seen_classes.begin(), prev.seen_classes.end(),
                        std::back_inserter(out));
    return out;
}

namespace {

// Near-equal contiguous groups; the first (size % groups) groups get one
// extra element.
std::vector<std::vector<std::uint32_t>> partition_groups(
    const std::vector<std::uint32_t>& items, std::size_t groups) {
    std::vector<std::vector<std::uint32_t>> out(groups);
    const std::size_t base = items.size() / groups;
    const std::size_t rem = items.size() % groups;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t take = base + (g < rem ? 1 : 0);
        out[g].assign(items.begin() + pos, items.begin() + pos + take);
        pos += take;
    }
    return out;
}

struct ClassHoldout {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Per-class holdout of max(1, floor(fraction * n)) test samples, chosen by
// a seeded shuffle of the class's ascending sample indices.
ClassHoldout hold_out(const std::vector<std::size_t>& samples, double fraction,
                      std::uint32_t cls, Rng& rng) {
    if (samples.size() < 2) {
        throw ConfigError("split: class " + std::to_string(cls) + " has " +
                          std::to_string(samples.size()) +
                          " samples; need at least 2 to hold out a test set");
    }
    std::vector<std::size_t> shuffled = samples;
    rng.shuffle(shuffled);
    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::floor(fraction * static_cast<double>(samples.size()))));
    ClassHoldout h;
    h.test.assign(shuffled.begin(), shuffled.begin() + n_test);
    h.train.assign(shuffled.begin() + n_test, shuffled.end());
    std::sort(h.test.begin(), h.test.end());
    std::sort(h.train.begin(), h.train.end());
    return h;
}

std::vector<std::uint32_t> sorted_union(std::vector<std::uint32_t> a,
                                        const std::vector<std::uint32_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    return a;
}

} // namespace

TaskStream split_setting1(const FeatureDataset& dataset, std::size_t num_tasks,
                          std::uint64_t class_order_seed, double test_fraction) {
    const std::size_t c = dataset.num_classes();
    if (num_tasks < 1 || num_tasks > c) {
        throw ConfigError("split_setting1: num_tasks " + std::to_string(num_tasks) +
                          " not in 1.." + std::to_string(c));
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("split_setting1: test_fraction must be in (0,1)");
    }

    Rng rng(class_order_seed);
    std::vector<std::uint32_t> order(c);
    for (std::size_t i = 0; i < c; ++i) order[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(order);
    const auto groups = partition_groups(order, num_tasks);

    const auto by_class = dataset.indices_by_class();
    std::vector<ClassHoldout> holdouts(c);
    for (std::size_t cls = 0; cls < c; ++cls) {
        holdouts[cls] = hold_out(by_class[cls], test_fraction,
                                 static_cast<std::uint32_t>(cls), rng);
    }

    TaskStream stream;
    stream.setting = Setting::setting1;
    std::vector<std::uint32_t> seen_so_far;
    for (std::size_t t = 0; t < num_tasks; ++t) {
        TaskSplit split;
        split.task_id = t + 1;
        for (std::uint32_t cls : groups[t]) {
            const ClassHoldout& h = holdouts[cls];
            split.train_indices.insert(split.train_indices.end(), h.train.begin(),
                                       h.train.end());
            split.test_seen_indices.insert(split.test_seen_indices.end(),
                                           h.test.begin(), h.test.end());
        }
        seen_so_far = sorted_union(std::move(seen_so_far), groups[t]);
        split.seen_classes = seen_so_far;
        for (std::size_t f = t + 1; f < num_tasks; ++f) {
            split.unseen_classes_visible.insert(split.unseen_classes_visible.end(),
                                                groups[f].begin(), groups[f].end());
        }
        std::sort(split.unseen_classes_visible.begin(),
                  split.unseen_classes_visible.end());
        stream.tasks.push_back(std::move(split));
    }
    return stream;
}

TaskStream split_setting2(const FeatureDataset& dataset, std::size_t num_tasks,
                          const std::vector<std::uint32_t>& seen_classes,
                          const std::vector<std::uint32_t>& unseen_classes,
                          std::uint64_t seed) {
    const std::size_t c = dataset.num_classes();
    {
        std::set<std::uint32_t> seen_set(seen_classes.begin(), seen_classes.end());
        std::set<std::uint32_t> unseen_set(unseen_classes.begin(),
                                           unseen_classes.end());
        if (seen_set.size() != seen_classes.size() ||
            unseen_set.size() != unseen_classes.size()) {
            throw ConfigError("split_setting2: duplicate class in split lists");
        }
        std::set<std::uint32_t> all;
        all.insert(seen_set.begin(), seen_set.end());
        all.insert(unseen_set.begin(), unseen_set.end());
        if (all.size() != seen_set.size() + unseen_set.size()) {
            throw ConfigError("split_setting2: seen and unseen classes overlap");
        }
        if (all.size() != c || (c > 0 && *all.rbegin() != c - 1)) {
            throw ConfigError(
                "split_setting2: seen+unseen must cover all dataset classes");
        }
    }
    if (num_tasks < 1 || num_tasks > seen_classes.size() ||
        num_tasks > unseen_classes.size()) {
        throw ConfigError(
            "split_setting2: need at least one seen and one unseen class per task");
    }

    Rng rng(seed);
    std::vector<std::uint32_t> seen = seen_classes;
    std::vector<std::uint32_t> unseen = unseen_classes;
    rng.shuffle(seen);
    rng.shuffle(unseen);
    const auto seen_groups = partition_groups(seen, num_tasks);
    const auto unseen_groups = partition_groups(unseen, num_tasks);

    const auto by_class = dataset.indices_by_class();
    TaskStream stream;
    stream.setting = Setting::setting2;
    std::vector<std::uint32_t> cum_seen;
    std::vector<std::uint32_t> cum_unseen;
    for (std::size_t t = 0; t < num_tasks; ++t) {
        TaskSplit split;
        split.task_id = t + 1;
        std::vector<std::uint32_t> task_seen = seen_groups[t];
        std::sort(task_seen.begin(), task_seen.end());
        for (std::uint32_t cls : task_seen) {
            const ClassHoldout h = hold_out(by_class[cls], 0.2, cls, rng);
            split.train_indices.insert(split.train_indices.end(), h.train.begin(),
                                       h.train.end());
            split.test_seen_indices.insert(split.test_seen_indices.end(),
                                           h.test.begin(), h.test.end());
        }
        std::vector<std::uint32_t> task_unseen = unseen_groups[t];
        std::sort(task_unseen.begin(), task_unseen.end());
        for (std::uint32_t cls : task_unseen) {
            if (by_class[cls].empty()) {
                throw ConfigError("split_setting2: unseen class " +
                                  std::to_string(cls) + " has no samples to test");
            }
            split.test_unseen_indices.insert(split.test_unseen_indices.end(),
                                             by_class[cls].begin(),
                                             by_class[cls].end());
        }
        cum_seen = sorted_union(std::move(cum_seen), task_seen);
        cum_unseen = sorted_union(std::move(cum_unseen), task_unseen);
        split.seen_classes = cum_seen;
        split.unseen_classes_visible = cum_unseen;
        stream.tasks.push_back(std::move(split));
    }
    return stream;
}

} // namespace czsl
