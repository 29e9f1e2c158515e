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

#include "ltss/prefetch.hpp"

#include <algorithm>
#include <cstring>

namespace ltss {

std::size_t PrefetchCache::prefetch(const LogicalTable& table, const QueryPlan& plan) {
    std::lock_guard lock(mutex_);
    const std::string key = plan.key();
    const std::size_t record_size = table.schema().record_size();
    const std::size_t per_record = record_size + sizeof(CompositeTime);
    std::size_t added = 0;

    Table& t = table.table();
    for (std::size_t i = 0; i < t.partition_count(); ++i) {
        const Partition& part = t.partition(i);
        const RecordStore& store = part.store();
        auto& segs = segments_[{key, part.id()}];
        for (const RecordRange& r : resolve(*part.view(), store, plan.index)) {
            // Skip what an earlier prefetch of this plan already holds.
            const bool cached = std::any_of(segs.begin(), segs.end(),
                                            [&](const Segment& s) { return s.begin <= r.begin && r.end <= s.end; });
            if (cached) continue;
            const std::size_t room = (budget_ - used_) / per_record;
            if (room == 0) return added;
            Segment seg;
            seg.begin = r.begin;
            seg.end = r.begin + std::min<std::uint64_t>(r.size(), room);
            const auto n = static_cast<std::size_t>(seg.end - seg.begin);
            seg.records.resize(n * record_size);
            seg.ctimes.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                std::memcpy(seg.records.data() + k * record_size, store.record_ptr(seg.begin + k), record_size);
                seg.ctimes[k] = store.ctime_at(seg.begin + k);
            }
            store.count_storage_reads(n);
            if (!store.is_live(seg.begin)) continue; // overwritten while copying
            used_ += n * per_record;
            added += n * per_record;
            segs.push_back(std::move(seg));
        }
        std::sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) { return a.begin < b.begin; });
    }
    return added;
}

bool PrefetchCache::contains(const std::string& plan_key) const {
    std::lock_guard lock(mutex_);
    auto it = segments_.lower_bound({plan_key, 0});
    return it != segments_.end() && it->first.first == plan_key;
}

bool PrefetchCache::read(const std::string& plan_key, std::size_t partition, const RecordStore& store,
                         std::uint64_t seq, std::span<std::byte> out, CompositeTime& ctime) {
    std::lock_guard lock(mutex_);
    auto it = segments_.find({plan_key, partition});
    if (it == segments_.end()) {
        ++misses_;
        return false;
    }
    auto& segs = it->second;
    auto s = std::upper_bound(segs.begin(), segs.end(), seq,
                              [](std::uint64_t x, const Segment& seg) { return x < seg.begin; });
    if (s == segs.begin() || seq >= std::prev(s)->end) {
        ++misses_;
        return false;
    }
    --s;
    if (s->begin < store.live_window().begin) {
        // Roll-around reached this segment; its copy no longer matches the log.
        used_ -= s->ctimes.size() * (out.size() + sizeof(CompositeTime));
        segs.erase(s);
        ++invalidations_;
        ++misses_;
        return false;
    }
    const std::size_t k = static_cast<std::size_t>(seq - s->begin);
    std::memcpy(out.data(), s->records.data() + k * out.size(), out.size());
    ctime = s->ctimes[k];
    ++hits_;
    return true;
}

std::size_t PrefetchCache::bytes_used() const noexcept {
    std::lock_guard lock(mutex_);
    return used_;
}

void PrefetchCache::clear() {
    std::lock_guard lock(mutex_);
    segments_.clear();
    used_ = 0;
}

} // namespace ltss
