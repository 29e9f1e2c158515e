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

#include "ltss/time_ordering.hpp"

#include "ltss/error.hpp"

#include <algorithm>

namespace ltss {

OrderingState::OrderingState(OrderingConfig config) : config_(config) {
    if (config_.quantum_us == 0) throw ConfigError("quantum must be positive");
    if (config_.max_open == 0) throw ConfigError("max_open must be positive");
}

RouteResult OrderingState::route(SlotRef record) {
    const EpochMicros start = bucket_start(record.time, config_.quantum_us);
    if (start < watermark_) {
        ++delinquent_;
        return RouteResult::delinquent;
    }

    // Common case: the newest bucket.
    if (!open_.empty() && open_.back().start == start) {
        open_.back().records.push_back(record);
        return RouteResult::placed;
    }

    auto it = std::lower_bound(open_.begin(), open_.end(), start,
                               [](const QuantumBucket& b, EpochMicros s) { return b.start < s; });
    if (it == open_.end() || it->start != start) {
        QuantumBucket bucket{start, config_.quantum_us, {}, false};
        if (!spare_.empty()) {
            bucket.records = std::move(spare_.back());
            spare_.pop_back();
        }
        it = open_.insert(it, std::move(bucket));
    }
    it->records.push_back(record);

    while (open_.size() > config_.max_open) close_front(forced_);
    return RouteResult::placed;
}

void OrderingState::close_front(std::vector<QuantumBucket>& out) {
    QuantumBucket b = std::move(open_.front());
    open_.pop_front();
    b.closed = true;
    watermark_ = std::max(watermark_, b.end());
    out.push_back(std::move(b));
}

std::vector<QuantumBucket> OrderingState::expire(EpochMicros now) {
    std::vector<QuantumBucket> closed = std::move(forced_);
    forced_.clear();
    const EpochMicros hold = config_.quantum_us * config_.linger;
    while (!open_.empty() && open_.front().end() + hold <= now) close_front(closed);
    return closed;
}

std::vector<QuantumBucket> OrderingState::close_all() {
    std::vector<QuantumBucket> closed = std::move(forced_);
    forced_.clear();
    while (!open_.empty()) close_front(closed);
    return closed;
}

std::size_t OrderingState::pending_records() const noexcept {
    std::size_t n = 0;
    for (const auto& b : open_) n += b.records.size();
    for (const auto& b : forced_) n += b.records.size();
    return n;
}

std::optional<EpochMicros> OrderingState::next_deadline() const noexcept {
    if (!forced_.empty()) return EpochMicros{0};
    if (open_.empty()) return std::nullopt;
    return open_.front().end() + config_.quantum_us * config_.linger;
}

void OrderingState::recycle(std::vector<SlotRef>&& records) {
    records.clear();
    if (spare_.size() < config_.max_open) spare_.push_back(std::move(records));
}

std::size_t insertion_sort(std::span<SlotRef> records) noexcept {
    std::size_t comparisons = 0;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const SlotRef key = records[i];
        std::size_t j = i;
        while (j > 0) {
            ++comparisons;
            if (records[j - 1].time <= key.time) break;
            records[j] = records[j - 1];
            --j;
        }
        records[j] = key;
    }
    return comparisons;
}

} // namespace ltss
