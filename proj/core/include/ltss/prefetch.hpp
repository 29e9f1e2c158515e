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

#include "ltss/query.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace ltss {

/// Main-memory copy of the candidate ranges of previously seen plans,
/// bounded by a byte budget. Segments whose records have been overwritten
/// by roll-around are dropped on lookup.
class PrefetchCache {
public:
    explicit PrefetchCache(std::size_t budget_bytes) : budget_(budget_bytes) {}

    /// Materializes the plan's candidate ranges until the budget is spent.
    /// Returns the bytes cached for this plan.
    std::size_t prefetch(const LogicalTable& table, const QueryPlan& plan);

    bool contains(const std::string& plan_key) const;

    /// Copies a cached record; false on a miss.
    bool read(const std::string& plan_key, std::size_t partition, const RecordStore& store, std::uint64_t seq,
              std::span<std::byte> out, CompositeTime& ctime);

    std::size_t budget() const noexcept { return budget_; }
    std::size_t bytes_used() const noexcept;
    std::uint64_t hits() const noexcept { return hits_; }
    std::uint64_t misses() const noexcept { return misses_; }
    std::uint64_t invalidations() const noexcept { return invalidations_; }
    void clear();

private:
    struct Segment {
        std::uint64_t begin = 0;
        std::uint64_t end = 0;
        std::vector<std::byte> records;
        std::vector<CompositeTime> ctimes;
    };
    using Key = std::pair<std::string, std::size_t>; // plan key, partition

    std::size_t budget_;
    std::size_t used_ = 0;
    mutable std::mutex mutex_;
    std::map<Key, std::vector<Segment>> segments_;
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
    std::uint64_t invalidations_ = 0;
};

} // namespace ltss
