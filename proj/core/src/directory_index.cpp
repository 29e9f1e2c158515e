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

#include "ltss/directory_index.hpp"

#include "ltss/bytes.hpp"
#include "ltss/checksum.hpp"
#include "ltss/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace ltss {

namespace {

constexpr std::array<char, 4> kSnapshotMagic{'L', 'T', 'S', 'I'};
constexpr std::uint32_t kSnapshotVersion = 1;

constexpr std::array<Granularity, kGranularityCount> kLevels{Granularity::year, Granularity::month,
                                                             Granularity::day,  Granularity::hour,
                                                             Granularity::min,  Granularity::sec};

// First level whose calendar prefix differs between a and b, or
// kGranularityCount if they share the same second.
std::size_t first_changed_level(CompositeTime a, CompositeTime b) noexcept {
    for (std::size_t i = 0; i < kGranularityCount; ++i) {
        const CalendarField f = to_calendar_field(kLevels[i]);
        if (a.extract(f) != b.extract(f)) return i;
    }
    return kGranularityCount;
}

bool satisfies(unsigned actual, CompareOp op, unsigned value) noexcept {
    switch (op) {
    case CompareOp::eq: return actual == value;
    case CompareOp::ne: return actual != value;
    case CompareOp::lt: return actual < value;
    case CompareOp::le: return actual <= value;
    case CompareOp::gt: return actual > value;
    case CompareOp::ge: return actual >= value;
    }
    return false;
}

void push_merged(std::vector<RecordRange>& out, RecordRange r) {
    if (r.empty()) return;
    if (!out.empty() && out.back().end == r.begin) {
        out.back().end = r.end;
    } else {
        out.push_back(r);
    }
}

template <typename Level>
std::optional<std::uint64_t> stab_level(const Level& level, std::uint64_t seq, std::uint64_t tail_first) {
    if (level.count == level.base) return std::nullopt;
    if (seq >= tail_first) return level.count - 1;
    for (const auto& tree : level.forest) {
        if (seq < tree->min_lo() || seq >= tree->max_hi()) continue;
        std::optional<std::uint64_t> hit;
        tree->stab(seq, [&](const Interval& iv) { hit = iv.id; });
        if (hit && *hit >= level.base) return hit;
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace

CalendarField to_calendar_field(Granularity g) noexcept {
    switch (g) {
    case Granularity::year: return CalendarField::year;
    case Granularity::month: return CalendarField::month;
    case Granularity::day: return CalendarField::day;
    case Granularity::hour: return CalendarField::hour;
    case Granularity::min: return CalendarField::min;
    case Granularity::sec: return CalendarField::sec;
    }
    return CalendarField::year;
}

std::optional<Granularity> granularity_of(CalendarField f) noexcept {
    switch (f) {
    case CalendarField::year: return Granularity::year;
    case CalendarField::month: return Granularity::month;
    case CalendarField::day: return Granularity::day;
    case CalendarField::wday: return Granularity::day;
    case CalendarField::hour: return Granularity::hour;
    case CalendarField::min: return Granularity::min;
    case CalendarField::sec: return Granularity::sec;
    case CalendarField::usec: return std::nullopt;
    }
    return std::nullopt;
}

const char* to_string(SnapshotLoad s) noexcept {
    switch (s) {
    case SnapshotLoad::loaded: return "loaded";
    case SnapshotLoad::missing: return "missing";
    case SnapshotLoad::corrupt: return "corrupt";
    case SnapshotLoad::stale: return "stale";
    case SnapshotLoad::ahead_of_store: return "ahead_of_store";
    case SnapshotLoad::schema_mismatch: return "schema_mismatch";
    }
    return "?";
}

// IndexView

const IndexEntry& IndexView::entry(Granularity g, std::uint64_t logical) const noexcept {
    const auto& level = levels_[idx(g)];
    const auto& table = *level.table;
    return table.chunks[logical / kIndexChunkEntries - table.first_chunk]->entries[logical % kIndexChunkEntries];
}

std::optional<std::uint64_t> IndexView::stab(Granularity g, std::uint64_t seq) const {
    const auto& level = levels_[idx(g)];
    if (level.count == level.base) return std::nullopt;
    return stab_level(level, seq, entry(g, level.count - 1).first_seq);
}

std::size_t IndexView::memory_bytes() const noexcept {
    std::size_t bytes = sizeof(*this);
    for (const auto& level : levels_) {
        bytes += level.table->chunks.size() * sizeof(detail::IndexChunk);
        for (const auto& tree : level.forest) bytes += tree->size() * (sizeof(Interval) + sizeof(std::uint64_t));
    }
    return bytes;
}

// DirectoryIndex

DirectoryIndex::DirectoryIndex(std::uint64_t start_seq) : start_(start_seq), high_water_(start_seq) {
    publish(start_seq);
}

const IndexEntry& DirectoryIndex::entry_at(const Level& level, std::uint64_t logical) const noexcept {
    const auto& table = *level.table;
    return table.chunks[logical / kIndexChunkEntries - table.first_chunk]->entries[logical % kIndexChunkEntries];
}

void DirectoryIndex::push_entry(Level& level, IndexEntry e) {
    const std::uint64_t chunk = level.count / kIndexChunkEntries;
    if (chunk - level.table->first_chunk >= level.table->chunks.size()) {
        // Readers may hold the current table; grow a copy.
        auto grown = std::make_shared<detail::ChunkTable>(*level.table);
        grown->chunks.push_back(std::make_shared<detail::IndexChunk>());
        level.table = std::move(grown);
    }
    level.table->chunks[chunk - level.table->first_chunk]->entries[level.count % kIndexChunkEntries] = e;
    ++level.count;
}

void DirectoryIndex::append(std::uint64_t seq, CompositeTime ctime) {
    if (seq != high_water_) {
        throw IndexError("index_append out of order: expected record " + std::to_string(high_water_) + ", got " +
                         std::to_string(seq));
    }
    std::size_t from = 0;
    if (last_) {
        if (ctime < *last_) throw IndexError("index_append: time went backwards at record " + std::to_string(seq));
        from = first_changed_level(*last_, ctime);
    }
    for (std::size_t i = from; i < kGranularityCount; ++i) push_entry(levels_[i], IndexEntry{seq, ctime});
    last_ = ctime;
    ++high_water_;
}

void DirectoryIndex::append_batch(std::uint64_t first_seq, std::span<const CompositeTime> ctimes,
                                  std::uint64_t live_begin) {
    for (std::size_t i = 0; i < ctimes.size(); ++i) append(first_seq + i, ctimes[i]);
    publish(live_begin);
}

void DirectoryIndex::extend_forest(Level& level) {
    if (level.count == 0 || level.forest_end >= level.count - 1) return;
    const std::uint64_t closed_end = level.count - 1;
    std::vector<Interval> fresh;
    fresh.reserve(static_cast<std::size_t>(closed_end - level.forest_end));
    for (std::uint64_t i = level.forest_end; i < closed_end; ++i) {
        fresh.push_back(Interval{entry_at(level, i).first_seq, entry_at(level, i + 1).first_seq, i});
    }
    while (!level.forest.empty() && level.forest.back()->size() <= fresh.size()) {
        const auto& older = level.forest.back()->intervals();
        std::vector<Interval> merged;
        merged.reserve(older.size() + fresh.size());
        merged.insert(merged.end(), older.begin(), older.end());
        merged.insert(merged.end(), fresh.begin(), fresh.end());
        fresh = std::move(merged);
        level.forest.pop_back();
    }
    level.forest.push_back(std::make_shared<const StaticIntervalTree>(std::move(fresh)));
    level.forest_end = closed_end;
}

void DirectoryIndex::compact(Level& level, std::uint64_t live_begin) {
    if (level.count == 0) return;
    std::size_t dead = 0;
    while (dead < level.forest.size() && level.forest[dead]->max_hi() <= live_begin) ++dead;
    if (dead > 0) level.forest.erase(level.forest.begin(), level.forest.begin() + static_cast<std::ptrdiff_t>(dead));
    std::uint64_t base = level.forest.empty() ? level.count - 1 : level.forest.front()->intervals().front().id;
    // Within the oldest surviving tree, skip runs that are fully dead.
    while (base + 1 < level.count && entry_at(level, base + 1).first_seq <= live_begin) ++base;
    level.base = std::max(level.base, base);

    const std::uint64_t droppable = level.base / kIndexChunkEntries - level.table->first_chunk;
    if (droppable > 0) {
        auto trimmed = std::make_shared<detail::ChunkTable>();
        trimmed->first_chunk = level.table->first_chunk + droppable;
        trimmed->chunks.assign(level.table->chunks.begin() + static_cast<std::ptrdiff_t>(droppable),
                               level.table->chunks.end());
        level.table = std::move(trimmed);
    }
}

void DirectoryIndex::publish(std::uint64_t live_begin) {
    auto view = std::make_shared<IndexView>();
    for (std::size_t i = 0; i < kGranularityCount; ++i) {
        Level& level = levels_[i];
        extend_forest(level);
        compact(level, live_begin);
        view->levels_[i] = detail::LevelView{level.table, level.base, level.count, level.forest};
    }
    view->start_ = std::max(start_, live_begin);
    view->high_water_ = high_water_;
    std::atomic_store_explicit(&published_, std::shared_ptr<const IndexView>(std::move(view)),
                               std::memory_order_release);
}

std::shared_ptr<const IndexView> DirectoryIndex::view() const noexcept {
    return std::atomic_load_explicit(&published_, std::memory_order_acquire);
}

std::size_t DirectoryIndex::memory_bytes() const noexcept {
    std::size_t bytes = sizeof(*this);
    for (const auto& level : levels_) {
        bytes += level.table->chunks.size() * sizeof(detail::IndexChunk);
        for (const auto& tree : level.forest) bytes += tree->size() * (sizeof(Interval) + sizeof(std::uint64_t));
    }
    return bytes;
}

void DirectoryIndex::snapshot(const std::string& path, std::uint64_t schema_hash,
                              std::uint64_t store_generation) const {
    const auto v = view();
    std::vector<std::byte> out;
    auto put64 = [&out](std::uint64_t x) {
        std::byte b[8];
        store_le(b, x);
        out.insert(out.end(), b, b + 8);
    };
    out.insert(out.end(), reinterpret_cast<const std::byte*>(kSnapshotMagic.data()),
               reinterpret_cast<const std::byte*>(kSnapshotMagic.data()) + 4);
    put64(kSnapshotVersion);
    put64(schema_hash);
    put64(store_generation);
    put64(v->start());
    put64(v->high_water());
    for (Granularity g : kLevels) {
        put64(v->entry_count(g));
        for (std::uint64_t i = v->base(g); i < v->end(g); ++i) {
            put64(v->entry(g, i).first_seq);
            put64(v->entry(g, i).first_time.bits());
        }
    }
    std::byte crc[4];
    store_le(crc, crc32(out));
    out.insert(out.end(), crc, crc + 4);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("write index snapshot '" + tmp + "'", errno);
        f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
        if (!f) throw IoError("write index snapshot '" + tmp + "'", errno);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("publish index snapshot '" + path + "'", errno);
}

std::unique_ptr<DirectoryIndex> DirectoryIndex::rebuild(const RecordStore& store) {
    const RecordRange live = store.live_window();
    auto idx = std::make_unique<DirectoryIndex>(live.begin);
    for (std::uint64_t seq = live.begin; seq < live.end; ++seq) idx->append(seq, store.ctime_at(seq));
    idx->publish(live.begin);
    return idx;
}

LoadedIndex DirectoryIndex::load_snapshot(const std::string& path, const RecordStore& store) {
    LoadedIndex result;
    auto fallback = [&](SnapshotLoad why) {
        result.status = why;
        result.index = rebuild(store);
        result.replayed = store.live_window().size();
        return std::move(result);
    };

    std::ifstream f(path, std::ios::binary);
    if (!f) return fallback(SnapshotLoad::missing);
    std::vector<std::byte> data;
    {
        std::vector<char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        data.resize(raw.size());
        std::memcpy(data.data(), raw.data(), raw.size());
    }
    constexpr std::size_t kFixed = 4 + 5 * 8;
    if (data.size() < kFixed + 4 ||
        std::memcmp(data.data(), kSnapshotMagic.data(), kSnapshotMagic.size()) != 0 ||
        load_le<std::uint32_t>(data.data() + data.size() - 4) != crc32(std::span(data).first(data.size() - 4))) {
        return fallback(SnapshotLoad::corrupt);
    }
    std::size_t pos = 4;
    auto get64 = [&]() -> std::optional<std::uint64_t> {
        if (pos + 8 > data.size() - 4) return std::nullopt;
        const auto x = load_le<std::uint64_t>(data.data() + pos);
        pos += 8;
        return x;
    };
    const auto version = get64();
    const auto schema_hash = get64();
    const auto generation = get64();
    const auto start = get64();
    const auto high_water = get64();
    if (!version || *version != kSnapshotVersion) return fallback(SnapshotLoad::corrupt);
    if (*schema_hash != store.schema().layout_hash()) return fallback(SnapshotLoad::schema_mismatch);

    const RecordRange live = store.live_window();
    if (*high_water > store.total() || *generation > store.generation() || *start > *high_water) {
        return fallback(SnapshotLoad::ahead_of_store);
    }
    if (!live.empty() && *high_water <= live.begin) return fallback(SnapshotLoad::stale);

    auto idx = std::make_unique<DirectoryIndex>(*start);
    for (std::size_t i = 0; i < kGranularityCount; ++i) {
        const auto count = get64();
        if (!count) return fallback(SnapshotLoad::corrupt);
        std::uint64_t prev = 0;
        for (std::uint64_t k = 0; k < *count; ++k) {
            const auto seq = get64();
            const auto bits = get64();
            if (!seq || !bits || *seq < prev || *seq >= *high_water) return fallback(SnapshotLoad::corrupt);
            prev = *seq;
            idx->push_entry(idx->levels_[i], IndexEntry{*seq, CompositeTime::from_bits(*bits)});
        }
    }
    idx->high_water_ = *high_water;
    if (*high_water > *start) idx->last_ = store.ctime_at(*high_water - 1);

    for (std::uint64_t seq = *high_water; seq < live.end; ++seq) {
        idx->append(seq, store.ctime_at(seq));
        ++result.replayed;
    }
    idx->publish(live.begin);
    result.index = std::move(idx);
    result.status = SnapshotLoad::loaded;
    return result;
}

// Narrowing

std::vector<RecordRange> narrow(const IndexView& view, std::span<const IndexConstraint> constraints,
                                RecordRange window) {
    window.begin = std::max(window.begin, view.start());
    window.end = std::min(window.end, view.high_water());
    if (window.empty()) return {};

    std::array<std::vector<IndexConstraint>, kGranularityCount> by_level;
    for (const auto& c : constraints) {
        if (auto g = granularity_of(c.field)) by_level[static_cast<std::size_t>(*g)].push_back(c);
    }

    std::vector<RecordRange> ranges{window};
    for (std::size_t i = 0; i < kGranularityCount && !ranges.empty(); ++i) {
        const auto& cs = by_level[i];
        if (cs.empty()) continue;
        std::vector<RecordRange> next;
        for (const RecordRange& r : ranges) {
            view.for_each_run(kLevels[i], r, [&](const IndexEntry& e, RecordRange run) {
                for (const auto& c : cs) {
                    if (!satisfies(e.first_time.extract(c.field), c.op, c.value)) return;
                }
                push_merged(next, run);
            });
        }
        ranges = std::move(next);
    }
    return ranges;
}

RecordRange subsecond_seek(const RecordStore& store, RecordRange range, EpochMicros lo, EpochMicros hi) {
    if (range.empty() || hi <= lo) return {range.begin, range.begin};
    auto lower_bound = [&](EpochMicros t) {
        std::uint64_t first = range.begin;
        std::uint64_t count = range.size();
        while (count > 0) {
            const std::uint64_t step = count / 2;
            const std::uint64_t mid = first + step;
            if (store.time_at(mid) < t) {
                first = mid + 1;
                count -= step + 1;
            } else {
                count = step;
            }
        }
        return first;
    };
    const std::uint64_t b = lower_bound(lo);
    const std::uint64_t e = hi == std::numeric_limits<EpochMicros>::max() ? range.end : lower_bound(hi);
    return {b, std::max(b, e)};
}

std::vector<RecordRange> resolve(const IndexView& view, const RecordStore& store, const IndexQuery& query) {
    const RecordRange live = store.live_window();
    RecordRange window{std::max(live.begin, view.start()), std::min(live.end, view.high_water())};
    if (window.empty()) return {};
    if (!query.window.unbounded()) {
        window = subsecond_seek(store, window, query.window.lo, query.window.hi);
        if (window.empty()) return {};
    }

    std::vector<RecordRange> ranges = narrow(view, query.calendar, window);

    // usec bounds as a half-open offset window within each second.
    std::uint64_t ulo = 0;
    std::uint64_t uhi = kMicrosPerSecond;
    bool has_usec = false;
    for (const auto& c : query.calendar) {
        if (c.field != CalendarField::usec) continue;
        has_usec = true;
        switch (c.op) {
        case CompareOp::eq:
            ulo = std::max<std::uint64_t>(ulo, c.value);
            uhi = std::min<std::uint64_t>(uhi, std::uint64_t{c.value} + 1);
            break;
        case CompareOp::lt: uhi = std::min<std::uint64_t>(uhi, c.value); break;
        case CompareOp::le: uhi = std::min<std::uint64_t>(uhi, std::uint64_t{c.value} + 1); break;
        case CompareOp::gt: ulo = std::max<std::uint64_t>(ulo, std::uint64_t{c.value} + 1); break;
        case CompareOp::ge: ulo = std::max<std::uint64_t>(ulo, c.value); break;
        case CompareOp::ne: break; // left to the residual filter
        }
    }
    if (!has_usec) return ranges;
    if (uhi <= ulo) return {};

    std::vector<RecordRange> out;
    for (const RecordRange& r : ranges) {
        view.for_each_run(Granularity::sec, r, [&](const IndexEntry& e, RecordRange run) {
            const EpochMicros second = e.first_time.to_epoch() - e.first_time.extract(CalendarField::usec);
            push_merged(out, subsecond_seek(store, run, second + ulo, second + uhi));
        });
    }
    return out;
}

} // namespace ltss
