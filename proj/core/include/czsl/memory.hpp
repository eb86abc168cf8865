#pragma once

#include "czsl/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace czsl {

struct MemoryEntry {
    std::vector<double> feature;
    std::uint32_t label = 0;
    std::vector<double> attribute;
    std::size_t task_id = 0;
};

enum class MemoryStrategy { none, reservoir, ring_buffer, mean_of_features };

MemoryStrategy memory_strategy_from_string(const std::string& name);
std::string to_string(MemoryStrategy strategy);

// Bounded replay store. One strategy per instance:
//  - reservoir: classic algorithm-R over the joint stream, mem_size slots.
//  - ring_buffer: per-class FIFO of queue_size, keeps the most recent.
//  - mean_of_features: per-class running feature mean; the queue_size kept
//    entries are those closest to the current mean among the stored
//    candidates plus the incoming entry, re-ranked on every offer. Only
//    stored candidates compete (true streaming, no full history); distance
//    ties prefer the newer entry.
// Single-writer; snapshots are immutable copies.
class EpisodicMemory {
public:
    EpisodicMemory() = default;
    EpisodicMemory(MemoryStrategy strategy, std::size_t capacity);

    MemoryStrategy strategy() const { return strategy_; }
    // mem_size for reservoir, queue_size for the per-class strategies.
    std::size_t capacity() const { return capacity_; }
    std::size_t stream_count() const { return stream_count_; }
    std::size_t size() const;

    void reservoir_offer(const MemoryEntry& entry, Rng& rng);
    void ring_buffer_offer(const MemoryEntry& entry);
    void mof_offer(const MemoryEntry& entry);

    // Dispatches on the configured strategy; no-op for `none`.
    void offer(const MemoryEntry& entry, Rng& rng);

    // Copy of the contents ordered by (class, insertion order).
    std::vector<MemoryEntry> snapshot() const;

    void serialize(std::ostream& out) const;
    static EpisodicMemory deserialize(std::istream& in);

private:
    struct Slot {
        MemoryEntry entry;
        std::uint64_t order = 0; // global offer sequence number
    };
    struct ClassState {
        std::vector<Slot> slots;
        // mean-of-features running statistics
        std::vector<double> feature_sum;
        std::uint64_t count = 0;
    };

    void require_strategy(MemoryStrategy expected, const char* op) const;
    double squared_distance_to_mean(const ClassState& cs,
                                    const std::vector<double>& feature) const;

    MemoryStrategy strategy_ = MemoryStrategy::none;
    std::size_t capacity_ = 0;
    std::size_t stream_count_ = 0;
    std::uint64_t next_order_ = 0;
    std::vector<Slot> reservoir_;
    std::map<std::uint32_t, ClassState> per_class_;
};

} // namespace czsl
