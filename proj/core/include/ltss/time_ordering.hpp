// Copyright 2026 The LTSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ltss/composite_time.hpp"
#include "ltss/slab.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace ltss {

struct OrderingConfig {
    EpochMicros quantum_us = 100'000;
    /// Quanta a bucket stays open after its own window has ended.
    std::uint32_t linger = 2;
    /// Upper bound on simultaneously open buckets; the oldest is closed early.
    std::size_t max_open = 16;
};

/// In-flight reference to a slab slot, keyed by its primary time.
struct SlotRef {
    EpochMicros time = 0;
    SlotId slot = 0;
};

struct QuantumBucket {
    EpochMicros start = 0;
    EpochMicros quantum = 0;
    std::vector<SlotRef> records;
    bool closed = false;

    EpochMicros end() const noexcept { return start + quantum; }
};

/// floor(t / quantum) * quantum
constexpr EpochMicros bucket_start(EpochMicros t, EpochMicros quantum) noexcept { return t - t % quantum; }

enum class RouteResult : std::uint8_t { placed, delinquent };

/// Quantum-bucket staging for one pipeline. Owned by a single thread.
///
/// A bucket closes once `now` reaches its end plus `linger` quanta; closing
/// advances the watermark to the bucket's end. Records whose bucket starts
/// below the watermark are delinquent.
class OrderingState {
public:
    explicit OrderingState(OrderingConfig config);

    /// On `delinquent` the caller still owns the slot and must release it.
    RouteResult route(SlotRef record);

    /// Closes every bucket that is due at `now`, plus any forced out by
    /// max_open, in ascending start order.
    std::vector<QuantumBucket> expire(EpochMicros now);

    /// Closes everything regardless of time (shutdown flush).
    std::vector<QuantumBucket> close_all();

    EpochMicros watermark() const noexcept { return watermark_; }
    std::uint64_t delinquent_count() const noexcept { return delinquent_; }
    std::size_t open_buckets() const noexcept { return open_.size(); }
    std::size_t pending_records() const noexcept;
    const OrderingConfig& config() const noexcept { return config_; }

    /// Earliest `now` at which the oldest open bucket becomes due.
    std::optional<EpochMicros> next_deadline() const noexcept;

    /// Hands an emptied record vector back for reuse.
    void recycle(std::vector<SlotRef>&& records);

private:
    void close_front(std::vector<QuantumBucket>& out);

    OrderingConfig config_;
    std::deque<QuantumBucket> open_;
    std::vector<QuantumBucket> forced_;
    std::vector<std::vector<SlotRef>> spare_; // recycled record vectors
    EpochMicros watermark_ = 0;
    std::uint64_t delinquent_ = 0;
};

/// Stable ascending insertion sort by time. Returns the number of key
/// comparisons performed (n - 1 for already-sorted input).
std::size_t insertion_sort(std::span<SlotRef> records) noexcept;

/// Sorts a closed bucket and hands it to `sink` as one batch.
/// Returns the number of records passed on.
template <typename Sink>
std::size_t sort_and_store(QuantumBucket& bucket, Sink&& sink) {
    insertion_sort(bucket.records);
    if (!bucket.records.empty()) sink(std::span<const SlotRef>(bucket.records));
    return bucket.records.size();
}

} // namespace ltss
