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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ltss {

/// Half-open interval [lo, hi) tagged with a caller-supplied id.
struct Interval {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    std::uint64_t id = 0;
};

/// Static balanced interval tree. The intervals are kept sorted by `lo` in a
/// flat array and the tree is implicit: the node for a subrange is its
/// midpoint. Each node carries the maximum `hi` of its subtree, so stabbing
/// and overlap queries prune whole subtrees.
class StaticIntervalTree {
public:
    StaticIntervalTree() = default;

    explicit StaticIntervalTree(std::vector<Interval> intervals) : nodes_(std::move(intervals)) {
        std::stable_sort(nodes_.begin(), nodes_.end(),
                         [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        max_hi_.resize(nodes_.size());
        if (!nodes_.empty()) build(0, nodes_.size());
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }
    std::uint64_t min_lo() const noexcept { return nodes_.empty() ? 0 : nodes_.front().lo; }
    std::uint64_t max_hi() const noexcept { return nodes_.empty() ? 0 : max_hi_[(nodes_.size() - 1) / 2]; }

    /// Calls `fn(interval)` for every interval containing `x`.
    template <typename Fn>
    void stab(std::uint64_t x, Fn&& fn) const {
        if (!nodes_.empty()) stab(0, nodes_.size(), x, fn);
    }

    /// Calls `fn(interval)` for every interval overlapping [lo, hi).
    template <typename Fn>
    void overlap(std::uint64_t lo, std::uint64_t hi, Fn&& fn) const {
        if (!nodes_.empty() && lo < hi) overlap(0, nodes_.size(), lo, hi, fn);
    }

    const std::vector<Interval>& intervals() const noexcept { return nodes_; }

private:
    std::uint64_t build(std::size_t lo, std::size_t hi) {
        const std::size_t mid = lo + (hi - lo - 1) / 2;
        std::uint64_t m = nodes_[mid].hi;
        if (mid > lo) m = std::max(m, build(lo, mid));
        if (mid + 1 < hi) m = std::max(m, build(mid + 1, hi));
        max_hi_[mid] = m;
        return m;
    }

    template <typename Fn>
    void stab(std::size_t lo, std::size_t hi, std::uint64_t x, Fn& fn) const {
        if (lo >= hi) return;
        const std::size_t mid = lo + (hi - lo - 1) / 2;
        if (max_hi_[mid] <= x) return;
        stab(lo, mid, x, fn);
        if (nodes_[mid].lo > x) return;
        if (x < nodes_[mid].hi) fn(nodes_[mid]);
        stab(mid + 1, hi, x, fn);
    }

    template <typename Fn>
    void overlap(std::size_t lo, std::size_t hi, std::uint64_t qlo, std::uint64_t qhi, Fn& fn) const {
        if (lo >= hi) return;
        const std::size_t mid = lo + (hi - lo - 1) / 2;
        if (max_hi_[mid] <= qlo) return;
        overlap(lo, mid, qlo, qhi, fn);
        if (nodes_[mid].lo >= qhi) return;
        if (qlo < nodes_[mid].hi) fn(nodes_[mid]);
        overlap(mid + 1, hi, qlo, qhi, fn);
    }

    std::vector<Interval> nodes_;
    std::vector<std::uint64_t> max_hi_;
};

} // namespace ltss
