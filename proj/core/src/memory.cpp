#include "czsl/memory.hpp"

#include "czsl/binio.hpp"
#include "czsl/errors.hpp"

#include <algorithm>

namespace czsl {

MemoryStrategy memory_strategy_from_string(const std::string& name) {
    if (name == "none") return MemoryStrategy::none;
    if (name == "reservoir") return MemoryStrategy::reservoir;
    if (name == "ring_buffer") return MemoryStrategy::ring_buffer;
    if (name == "mean_of_features") return MemoryStrategy::mean_of_features;
    throw ConfigError("unknown memory strategy '" + name + "'");
}

std::string to_string(MemoryStrategy strategy) {
    switch (strategy) {
        case MemoryStrategy::none: return "none";
        case MemoryStrategy::reservoir: return "reservoir";
        case MemoryStrategy::ring_buffer: return "ring_buffer";
        case MemoryStrategy::mean_of_features: return "mean_of_features";
    }
    return "unknown";
}

EpisodicMemory::EpisodicMemory(MemoryStrategy strategy, std::size_t capacity)
    : strategy_(strategy), capacity_(capacity) {
    if (strategy != MemoryStrategy::none && capacity == 0) {
        throw ConfigError("episodic memory: capacity must be >= 1");
    }
}

std::size_t EpisodicMemory::size() const {
    if (strategy_ == MemoryStrategy::reservoir) return reservoir_.size();
    std::size_t n = 0;
    for (const auto& [cls, state] : per_class_) n += state.slots.size();
    return n;
}

void EpisodicMemory::require_strategy(MemoryStrategy expected,
                                      const char* op) const {
    if (strategy_ != expected) {
        throw UsageError(std::string(op) + " called on memory with strategy " +
                         to_string(strategy_));
    }
}

void EpisodicMemory::reservoir_offer(const MemoryEntry& entry, Rng& rng) {
    require_strategy(MemoryStrategy::reservoir, "reservoir_offer");
    ++stream_count_;
    Slot slot{entry, next_order_++};
    if (reservoir_.size() < capacity_) {
        reservoir_.push_back(std::move(slot));
        return;
    }
    // Replace a random slot with probability mem_size / n.
    const std::size_t j = rng.uniform_index(stream_count_);
    if (j < capacity_) {
        reservoir_[j] = std::move(slot);
    }
}

void EpisodicMemory::ring_buffer_offer(const MemoryEntry& entry) {
    require_strategy(MemoryStrategy::ring_buffer, "ring_buffer_offer");
    ++stream_count_;
    ClassState& cs = per_class_[entry.label];
    cs.slots.push_back(Slot{entry, next_order_++});
    if (cs.slots.size() > capacity_) {
        cs.slots.erase(cs.slots.begin()); // oldest out
    }
}

double EpisodicMemory::squared_distance_to_mean(
    const ClassState& cs, const std::vector<double>& feature) const {
    double acc = 0.0;
    const double count = static_cast<double>(cs.count);
    for (std::size_t i = 0; i < feature.size(); ++i) {
        const double d = feature[i] - cs.feature_sum[i] / count;
        acc += d * d;
    }
    return acc;
}

void EpisodicMemory::mof_offer(const MemoryEntry& entry) {
    require_strategy(MemoryStrategy::mean_of_features, "mof_offer");
    ++stream_count_;
    ClassState& cs = per_class_[entry.label];
    if (cs.feature_sum.empty()) {
        cs.feature_sum.assign(entry.feature.size(), 0.0);
    }
    if (cs.feature_sum.size() != entry.feature.size()) {
        throw ShapeError("mof_offer: feature dim changed for class " +
                         std::to_string(entry.label));
    }
    for (std::size_t i = 0; i < entry.feature.size(); ++i) {
        cs.feature_sum[i] += entry.feature[i];
    }
    cs.count += 1;
    cs.slots.push_back(Slot{entry, next_order_++});
    if (cs.slots.size() > capacity_) {
        // Re-rank every candidate against the updated mean; drop the worst.
        // Ties keep the newer entry.
        std::size_t worst = 0;
        double worst_d = -1.0;
        for (std::size_t i = 0; i < cs.slots.size(); ++i) {
            const double d = squared_distance_to_mean(cs, cs.slots[i].entry.feature);
            if (d > worst_d || (d == worst_d && cs.slots[i].order <
                                                    cs.slots[worst].order)) {
                worst = i;
                worst_d = d;
            }
        }
        cs.slots.erase(cs.slots.begin() + static_cast<std::ptrdiff_t>(worst));
    }
}

void EpisodicMemory::offer(const MemoryEntry& entry, Rng& rng) {
    switch (strategy_) {
        case MemoryStrategy::none: return;
        case MemoryStrategy::reservoir: reservoir_offer(entry, rng); return;
        case MemoryStrategy::ring_buffer: ring_buffer_offer(entry); return;
        case MemoryStrategy::mean_of_features: mof_offer(entry); return;
    }
}

std::vector<MemoryEntry> EpisodicMemory::snapshot() const {
    std::vector<const Slot*> slots;
    if (strategy_ == MemoryStrategy::reservoir) {
        for (const Slot& s : reservoir_) slots.push_back(&s);
    } else {
        for (const auto& [cls, state] : per_class_) {
            for (const Slot& s : state.slots) slots.push_back(&s);
        }
    }
    std::sort(slots.begin(), slots.end(), [](const Slot* a, const Slot* b) {
        if (a->entry.label != b->entry.label) return a->entry.label < b->entry.label;
        return a->order < b->order;
    });
    std::vector<MemoryEntry> out;
    out.reserve(slots.size());
    for (const Slot* s : slots) out.push_back(s->entry);
    return out;
}

namespace {

void write_entry(std::ostream& out, const MemoryEntry& e) {
    write_f64_vec(out, e.feature);
    write_le<std::uint32_t>(out, e.label);
    write_f64_vec(out, e.attribute);
    write_le<std::uint64_t>(out, e.task_id);
}

MemoryEntry read_entry(std::istream& in) {
    MemoryEntry e;
    e.feature = read_f64_vec(in);
    e.label = read_le<std::uint32_t>(in);
    e.attribute = read_f64_vec(in);
    e.task_id = static_cast<std::size_t>(read_le<std::uint64_t>(in));
    return e;
}

} // namespace

void EpisodicMemory::serialize(std::ostream& out) const {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(strategy_));
    write_le<std::uint64_t>(out, capacity_);
    write_le<std::uint64_t>(out, stream_count_);
    write_le<std::uint64_t>(out, next_order_);
    write_le<std::uint64_t>(out, reservoir_.size());
    for (const Slot& s : reservoir_) {
        write_entry(out, s.entry);
        write_le<std::uint64_t>(out, s.order);
    }
    write_le<std::uint64_t>(out, per_class_.size());
    for (const auto& [cls, state] : per_class_) {
        write_le<std::uint32_t>(out, cls);
        write_le<std::uint64_t>(out, state.slots.size());
        for (const Slot& s : state.slots) {
            write_entry(out, s.entry);
            write_le<std::uint64_t>(out, s.order);
        }
        write_f64_vec(out, state.feature_sum);
        write_le<std::uint64_t>(out, state.count);
    }
}

EpisodicMemory EpisodicMemory::deserialize(std::istream& in) {
    EpisodicMemory mem;
    mem.strategy_ = static_cast<MemoryStrategy>(read_le<std::uint32_t>(in));
    mem.capacity_ = static_cast<std::size_t>(read_le<std::uint64_t>(in));
    mem.stream_count_ = static_cast<std::size_t>(read_le<std::uint64_t>(in));
    mem.next_order_ = read_le<std::uint64_t>(in);
    const auto n_res = read_le<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < n_res; ++i) {
        Slot s;
        s.entry = read_entry(in);
        s.order = read_le<std::uint64_t>(in);
        mem.reservoir_.push_back(std::move(s));
    }
    const auto n_classes = read_le<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < n_classes; ++i) {
        const auto cls = read_le<std::uint32_t>(in);
        ClassState state;
        const auto n_slots = read_le<std::uint64_t>(in);
        for (std::uint64_t s = 0; s < n_slots; ++s) {
            Slot slot;
            slot.entry = read_entry(in);
            slot.order = read_le<std::uint64_t>(in);
            state.slots.push_back(std::move(slot));
        }
        state.feature_sum = read_f64_vec(in);
        state.count = read_le<std::uint64_t>(in);
        mem.per_class_[cls] = std::move(state);
    }
    return mem;
}

} // namespace czsl
