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
#include "ltss/ring_queue.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ltss {

using SlotId = std::uint32_t;

/// Fixed pool of record slots. The free list is a lock-free MPMC ring, so
/// slots may be acquired by receiver threads and released from the ordering
/// (delinquent) or sorter (stored) threads.
///
/// Each slot holds the record bytes plus the epoch key and composite time
/// computed at ingest.
class SlabAllocator {
public:
    SlabAllocator(std::size_t slot_count, std::size_t record_size)
        : slot_count_(slot_count),
          record_size_(record_size),
          arena_(slot_count * record_size),
          times_(slot_count),
          ctimes_(slot_count),
          free_(std::bit_ceil(slot_count)) {
        for (std::size_t i = 0; i < slot_count; ++i) free_.try_push(static_cast<SlotId>(i));
    }

    std::optional<SlotId> acquire() noexcept {
        SlotId id;
        if (!free_.try_pop(id)) return std::nullopt;
        return id;
    }

    void release(SlotId id) noexcept { free_.try_push(id); }

    std::span<std::byte> bytes(SlotId id) noexcept { return {arena_.data() + std::size_t{id} * record_size_, record_size_}; }
    std::span<const std::byte> bytes(SlotId id) const noexcept {
        return {arena_.data() + std::size_t{id} * record_size_, record_size_};
    }

    EpochMicros& time(SlotId id) noexcept { return times_[id]; }
    EpochMicros time(SlotId id) const noexcept { return times_[id]; }
    CompositeTime& ctime(SlotId id) noexcept { return ctimes_[id]; }
    CompositeTime ctime(SlotId id) const noexcept { return ctimes_[id]; }

    std::size_t capacity() const noexcept { return slot_count_; }
    std::size_t record_size() const noexcept { return record_size_; }
    /// Exact only when no thread is acquiring or releasing.
    std::size_t free_count() const noexcept { return free_.size_approx(); }

    std::size_t memory_bytes() const noexcept {
        return arena_.size() + times_.size() * sizeof(EpochMicros) + ctimes_.size() * sizeof(CompositeTime) +
               free_.capacity() * 2 * sizeof(std::size_t);
    }

private:
    std::size_t slot_count_;
    std::size_t record_size_;
    std::vector<std::byte> arena_;
    std::vector<EpochMicros> times_;
    std::vector<CompositeTime> ctimes_;
    MpmcRing<SlotId> free_;
};

} // namespace ltss
