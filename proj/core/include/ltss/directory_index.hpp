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
#include "ltss/interval_tree.hpp"
#include "ltss/record_store.hpp"
#include "ltss/value.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ltss {

/// Indexed calendar levels, most significant first.
enum class Granularity : std::uint8_t { year, month, day, hour, min, sec };
inline constexpr std::size_t kGranularityCount = 6;

CalendarField to_calendar_field(Granularity g) noexcept;
/// Level at which constraints on `f` are evaluated (wday at day); nullopt
/// for usec, which is resolved by binary search instead.
std::optional<Granularity> granularity_of(CalendarField f) noexcept;

/// Start of one run: the record that began it and its composite time.
struct IndexEntry {
    std::uint64_t first_seq = 0;
    CompositeTime first_time;
};

/// Constraint on one calendar field of the composite time.
struct IndexConstraint {
    CalendarField field = CalendarField::year;
    CompareOp op = CompareOp::eq;
    unsigned value = 0;
};

/// Half-open epoch window [lo, hi).
struct TimeWindow {
    EpochMicros lo = 0;
    EpochMicros hi = std::numeric_limits<EpochMicros>::max();

    bool unbounded() const noexcept { return lo == 0 && hi == std::numeric_limits<EpochMicros>::max(); }
    bool empty() const noexcept { return hi <= lo; }
    void intersect(const TimeWindow& o) noexcept {
        lo = std::max(lo, o.lo);
        hi = std::min(hi, o.hi);
    }
};

/// Everything the index can consume from a query.
struct IndexQuery {
    std::vector<IndexConstraint> calendar;
    TimeWindow window;
};

inline constexpr std::size_t kIndexChunkEntries = 1024;

namespace detail {

struct IndexChunk {
    std::array<IndexEntry, kIndexChunkEntries> entries;
};

struct ChunkTable {
    std::uint64_t first_chunk = 0;
    std::vector<std::shared_ptr<IndexChunk>> chunks;
};

struct LevelView {
    std::shared_ptr<const ChunkTable> table;
    std::uint64_t base = 0;  // logical index of the oldest retained entry
    std::uint64_t count = 0; // logical end
    std::vector<std::shared_ptr<const StaticIntervalTree>> forest; // closed entries, oldest first
};

} // namespace detail

/// Immutable published state of a DirectoryIndex. Readers hold it through a
/// shared_ptr; the writer never modifies entries a view can see.
class IndexView {
public:
    /// Records [start, high_water) have been indexed.
    std::uint64_t high_water() const noexcept { return high_water_; }
    std::uint64_t start() const noexcept { return start_; }

    std::uint64_t base(Granularity g) const noexcept { return levels_[idx(g)].base; }
    std::uint64_t end(Granularity g) const noexcept { return levels_[idx(g)].count; }
    std::size_t entry_count(Granularity g) const noexcept { return static_cast<std::size_t>(end(g) - base(g)); }
    const IndexEntry& entry(Granularity g, std::uint64_t logical) const noexcept;

    /// Logical index of the run containing `seq`, via the interval forest.
    std::optional<std::uint64_t> stab(Granularity g, std::uint64_t seq) const;

    /// Calls fn(entry, clipped_range) for each run at `g` overlapping `range`,
    /// in log order.
    template <typename Fn>
    void for_each_run(Granularity g, RecordRange range, Fn&& fn) const {
        if (range.empty() || entry_count(g) == 0) return;
        std::uint64_t i = stab(g, range.begin).value_or(base(g));
        const std::uint64_t n = end(g);
        for (; i < n; ++i) {
            const IndexEntry& e = entry(g, i);
            if (e.first_seq >= range.end) break;
            const std::uint64_t run_end = i + 1 < n ? entry(g, i + 1).first_seq : high_water_;
            const RecordRange r{std::max(e.first_seq, range.begin), std::min(run_end, range.end)};
            if (!r.empty()) fn(e, r);
        }
    }

    std::size_t memory_bytes() const noexcept;

private:
    friend class DirectoryIndex;
    static std::size_t idx(Granularity g) noexcept { return static_cast<std::size_t>(g); }

    std::array<detail::LevelView, kGranularityCount> levels_;
    std::uint64_t start_ = 0;
    std::uint64_t high_water_ = 0;
};

enum class SnapshotLoad : std::uint8_t { loaded, missing, corrupt, stale, ahead_of_store, schema_mismatch };
const char* to_string(SnapshotLoad s) noexcept;

class DirectoryIndex;

struct LoadedIndex {
    std::unique_ptr<DirectoryIndex> index;
    SnapshotLoad status = SnapshotLoad::missing;
    std::uint64_t replayed = 0; ///< Records re-indexed from the log after loading.
};

/// Per-calendar-field run lists over one record log.
///
/// A new entry is appended at a level whenever the calendar prefix down to
/// that level changes between consecutive records, so every run has a
/// single (year, ..., level) value. Each level keeps its closed runs in a
/// forest of static interval trees (logarithmic method: a new tree per
/// publish, merged with its predecessor while no larger than it).
///
/// Single writer; readers use view().
class DirectoryIndex {
public:
    explicit DirectoryIndex(std::uint64_t start_seq = 0);

    /// Throws IndexError if `seq` is not the next record or time goes back.
    void append(std::uint64_t seq, CompositeTime ctime);
    void append_batch(std::uint64_t first_seq, std::span<const CompositeTime> ctimes, std::uint64_t live_begin = 0);

    /// Makes appended entries visible to readers. Runs that end at or before
    /// `live_begin` are dropped.
    void publish(std::uint64_t live_begin = 0);

    std::shared_ptr<const IndexView> view() const noexcept;

    std::uint64_t high_water() const noexcept { return high_water_; }
    std::uint64_t start() const noexcept { return start_; }
    std::size_t memory_bytes() const noexcept;

    /// Atomic write (temp file + rename) of the published view.
    void snapshot(const std::string& path, std::uint64_t schema_hash, std::uint64_t store_generation) const;

    /// Loads `path` and re-indexes records appended since; falls back to a
    /// full rebuild from the store when the snapshot is missing, corrupt,
    /// older than the live window or ahead of the store.
    static LoadedIndex load_snapshot(const std::string& path, const RecordStore& store);
    static std::unique_ptr<DirectoryIndex> rebuild(const RecordStore& store);

private:
    struct Level {
        std::shared_ptr<detail::ChunkTable> table = std::make_shared<detail::ChunkTable>();
        std::uint64_t base = 0;
        std::uint64_t count = 0;
        std::uint64_t forest_end = 0; // closed entries below this are in the forest
        std::vector<std::shared_ptr<const StaticIntervalTree>> forest;
    };

    void push_entry(Level& level, IndexEntry e);
    const IndexEntry& entry_at(const Level& level, std::uint64_t logical) const noexcept;
    void extend_forest(Level& level);
    void compact(Level& level, std::uint64_t live_begin);

    std::array<Level, kGranularityCount> levels_;
    std::uint64_t start_ = 0;
    std::uint64_t high_water_ = 0;
    std::optional<CompositeTime> last_;
    std::shared_ptr<const IndexView> published_;
};

/// Record ranges whose runs satisfy every calendar constraint (usec
/// excepted), within `window`. Ranges are disjoint, ascending, and adjacent
/// matches are merged.
std::vector<RecordRange> narrow(const IndexView& view, std::span<const IndexConstraint> constraints,
                                RecordRange window);

/// Largest subrange of the time-sorted `range` with lo <= time < hi.
RecordRange subsecond_seek(const RecordStore& store, RecordRange range, EpochMicros lo, EpochMicros hi);

/// Full index resolution: live-window clip, TIMESTAMP window, calendar
/// narrowing and usec seeks.
std::vector<RecordRange> resolve(const IndexView& view, const RecordStore& store, const IndexQuery& query);

} // namespace ltss
