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

#include "ltss/directory_index.hpp"
#include "ltss/logical_table.hpp"
#include "ltss/value.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ltss {

class PrefetchCache;

struct Constraint {
    std::string column;
    CompareOp op = CompareOp::eq;
    Value value;
};

/// Constraint with its column resolved against a LogicalTable.
struct BoundConstraint {
    std::size_t column = 0;
    CompareOp op = CompareOp::eq;
    Value value;
};

struct QueryPlan {
    std::vector<Constraint> consumed;
    std::vector<Constraint> residual;
    double estimated_cost = 0.0;
    /// Cursors always walk each partition in log (time) order.
    bool ordered_by_time = true;

    IndexQuery index;
    std::vector<BoundConstraint> residual_bound;
    std::string table;

    /// Canonical text of the index-side work; identical plans share it.
    std::string key() const;
};

/// Splits constraints into those the directory index consumes (CTIME_*
/// comparisons and TIMESTAMP ranges with non-negative integral values) and
/// residual per-record filters. Throws QueryError for an unknown column.
QueryPlan best_index(const LogicalTable& table, std::span<const Constraint> constraints);

enum class CombineMode : std::uint8_t { append, sort_merge };
enum class ScanDirection : std::uint8_t { forward, reverse };

const char* to_string(CombineMode m) noexcept;

struct ScanOptions {
    CombineMode combine = CombineMode::sort_merge;
    ScanDirection direction = ScanDirection::forward;
    PrefetchCache* cache = nullptr;
};

/// Iterator over the live records matching a plan across all partitions.
///
/// Each partition is read through the index view current at construction,
/// so records appended later are not returned. Records overwritten by
/// roll-around while the cursor is open are skipped.
class Cursor {
public:
    Cursor(const LogicalTable& table, const QueryPlan& plan, ScanOptions options = {});

    bool eof() const noexcept { return current_ == kNone; }
    /// Throws QueryError at eof.
    void next();
    Value column(std::size_t column) const;
    Value column(std::string_view name) const;
    /// Partition id in the top 16 bits, record sequence number below.
    std::uint64_t rowid() const;
    EpochMicros time() const;
    CompositeTime ctime() const;
    std::span<const std::byte> record() const;
    std::size_t partition() const;

    /// Records examined (read and tested) so far.
    std::uint64_t examined() const noexcept { return examined_; }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    struct Sub {
        std::size_t partition = 0;
        const RecordStore* store = nullptr;
        std::vector<RecordRange> ranges;
        std::size_t range_pos = 0;
        std::uint64_t cursor = 0; // forward: next seq to read; reverse: one past it
        bool started = false;
        bool has_row = false;
        std::uint64_t seq = 0;
        EpochMicros time = 0;
        CompositeTime ctime;
        std::vector<std::byte> buf;
    };

    void advance(Sub& s);
    bool load(Sub& s, std::uint64_t seq);
    bool matches(const Sub& s) const;
    void pick();
    const Sub& cur() const;

    const LogicalTable* table_;
    QueryPlan plan_;
    std::string plan_key_;
    ScanOptions options_;
    std::vector<Sub> subs_;
    std::size_t current_ = kNone;
    std::uint64_t examined_ = 0;
};

/// Count of matching records (all partitions) without materializing rows.
std::uint64_t count_matching(const LogicalTable& table, const QueryPlan& plan);

} // namespace ltss
