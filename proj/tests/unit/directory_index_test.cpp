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

#include "ltss/datasets.hpp"
#include "ltss/directory_index.hpp"
#include "ltss/record_store.hpp"

#include "calendar_oracle.hpp"
#include "temp_dir.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ltss {
namespace {

using testing::oracle_epoch;
using testing::oracle_fields;
using testing::TempDir;

std::unique_ptr<RecordStore> store_with_times(const std::string& path, const std::vector<EpochMicros>& times,
                                              std::uint64_t capacity = 0) {
    const Schema s = seismic_schema();
    auto store = RecordStore::create(path, s, capacity ? capacity : times.size(), StoreOptions{3, false});
    std::vector<std::byte> bytes;
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<Value> v = {Value{static_cast<std::int64_t>(times[i])}, Value{0.0}, Value{0.0}, Value{0.0}, Value{0.0}, Value{0.0}};
        auto r = encode_record(s, v);
        bytes.insert(bytes.end(), r.begin(), r.end());
        if (bytes.size() >= 28 * 4096 || i + 1 == times.size()) {
            store->append_batch(bytes);
            bytes.clear();
        }
    }
    return store;
}

std::set<std::uint64_t> flatten(const std::vector<RecordRange>& ranges) {
    std::set<std::uint64_t> out;
    for (const auto& r : ranges) {
        for (auto s = r.begin; s < r.end; ++s) out.insert(s);
    }
    return out;
}

unsigned oracle_field(const testing::OracleFields& f, CalendarField c) {
    switch (c) {
    case CalendarField::year: return static_cast<unsigned>(f.year - 2000);
    case CalendarField::month: return f.month;
    case CalendarField::day: return f.day;
    case CalendarField::wday: return f.wday;
    case CalendarField::hour: return f.hour;
    case CalendarField::min: return f.min;
    case CalendarField::sec: return f.sec;
    case CalendarField::usec: return f.usec;
    }
    return 0;
}

bool cmp(CompareOp op, unsigned a, unsigned b) {
    return apply_compare(op, Value{std::int64_t{a}}, Value{std::int64_t{b}});
}

TEST(DirectoryIndex, EntryPerValueChange) {
    DirectoryIndex idx;
    idx.append(0, CompositeTime::from_epoch(oracle_epoch(2015, 1, 1)));
    idx.append(1, CompositeTime::from_epoch(oracle_epoch(2016, 1, 1)));
    idx.publish();
    EXPECT_EQ(idx.view()->entry_count(Granularity::year), 2u);

    DirectoryIndex sec;
    for (std::uint64_t i = 0; i < 100; ++i) sec.append(i, CompositeTime::from_epoch(oracle_epoch(2015, 5, 5) + i * 1000));
    sec.publish();
    EXPECT_EQ(sec.view()->entry_count(Granularity::sec), 1u);

    DirectoryIndex roll;
    roll.append(0, CompositeTime::from_epoch(oracle_epoch(2015, 12, 31, 23)));
    roll.append(1, CompositeTime::from_epoch(oracle_epoch(2016, 1, 1, 0)));
    roll.publish();
    EXPECT_EQ(roll.view()->entry_count(Granularity::year), 2u);
    EXPECT_EQ(roll.view()->entry_count(Granularity::month), 2u);
}

TEST(DirectoryIndex, MemoryTracksRunsNotRecords) {
    DirectoryIndex idx;
    const EpochMicros t0 = oracle_epoch(2020, 3, 3);
    for (std::uint64_t i = 0; i < 1'000'000; ++i) idx.append(i, CompositeTime::from_epoch(t0 + static_cast<EpochMicros>(i) * 50'000));
    idx.publish();
    const auto v = idx.view();
    EXPECT_EQ(v->entry_count(Granularity::year), 1u);
    EXPECT_EQ(v->entry_count(Granularity::month), 1u);
    EXPECT_EQ(v->entry_count(Granularity::day), 1u);
    EXPECT_EQ(v->entry_count(Granularity::sec), 50'000u);
    EXPECT_LT(idx.memory_bytes(), 8u << 20);
}

TEST(DirectoryIndex, NarrowBasics) {
    TempDir dir;
    std::vector<EpochMicros> times;
    for (int m = 1; m <= 24; ++m) {
        for (int k = 0; k < 10; ++k) times.push_back(oracle_epoch(2014 + (m - 1) / 12, (m - 1) % 12 + 1, 3, k));
    }
    auto store = store_with_times(dir.file("s.db"), times);
    auto idx = DirectoryIndex::rebuild(*store);
    const auto view = idx->view();
    const RecordRange all = store->live_window();
    const std::vector<IndexConstraint> march15 = {{CalendarField::year, CompareOp::eq, 15},
                                                  {CalendarField::month, CompareOp::eq, 3}};
    EXPECT_EQ(narrow(*view, march15, all), (std::vector<RecordRange>{{140, 150}}));
    EXPECT_EQ(narrow(*view, {}, all), (std::vector<RecordRange>{all}));
    const std::vector<IndexConstraint> absent = {{CalendarField::year, CompareOp::eq, 29}};
    EXPECT_TRUE(narrow(*view, absent, all).empty());
    // hour=9 recurs every month: one run per day.
    const std::vector<IndexConstraint> nine = {{CalendarField::hour, CompareOp::eq, 9}};
    EXPECT_EQ(narrow(*view, nine, all).size(), 24u);
}

TEST(DirectoryIndex, SubsecondSeek) {
    TempDir dir;
    std::vector<EpochMicros> times;
    const EpochMicros t0 = oracle_epoch(2020, 1, 1, 12);
    for (int i = 0; i < 1000; ++i) times.push_back(t0 + i * 1000);
    auto store = store_with_times(dir.file("s.db"), times);
    const RecordRange all{0, 1000};
    const RecordRange r = subsecond_seek(*store, all, t0 + 250'000, t0 + 750'000);
    EXPECT_EQ(r, (RecordRange{250, 750}));
    EXPECT_EQ(subsecond_seek(*store, all, t0, t0 + 1'000'000), all);
    EXPECT_TRUE(subsecond_seek(*store, all, t0 + 5, t0 + 5).empty());
}

// Random constraint sets against a linear scan, including logs whose live
// window has rolled around.
TEST(DirectoryIndex, ResolveMatchesLinearScan) {
    std::mt19937_64 rng(17);
    TempDir dir;
    for (int log = 0; log < 4; ++log) {
        std::vector<EpochMicros> times;
        EpochMicros t = oracle_epoch(2003, 1, 1);
        for (int i = 0; i < 8000; ++i) {
            const EpochMicros scale = EpochMicros{1} << (rng() % 41);
            t += static_cast<EpochMicros>(rng() % (scale + 1));
            times.push_back(std::min<EpochMicros>(t, oracle_epoch(2031, 1, 1)));
        }
        const std::uint64_t capacity = log % 2 ? 5000 : 8000;
        auto store = store_with_times(dir.file("l" + std::to_string(log)), times, capacity);
        auto idx = DirectoryIndex::rebuild(*store);
        const auto view = idx->view();
        const RecordRange live = store->live_window();
        for (int q = 0; q < 200; ++q) {
            IndexQuery query;
            const int n = 1 + static_cast<int>(rng() % 3);
            for (int k = 0; k < n; ++k) {
                const auto field = static_cast<CalendarField>(rng() % 8);
                auto op = static_cast<CompareOp>(rng() % 6);
                if (field == CalendarField::usec && op == CompareOp::ne) op = CompareOp::eq; // residual-only
                const std::uint64_t s = live.begin + rng() % live.size();
                const auto f = oracle_fields(store->time_at(s));
                unsigned value = oracle_field(f, field);
                if (rng() % 4 == 0) value += static_cast<unsigned>(rng() % 3);
                query.calendar.push_back({field, op, value});
            }
            if (rng() % 4 == 0) {
                query.window.lo = store->time_at(live.begin + rng() % live.size());
                query.window.hi = query.window.lo + static_cast<EpochMicros>(rng() % 10'000'000'000LL);
            }
            std::set<std::uint64_t> expected;
            for (auto s = live.begin; s < live.end; ++s) {
                const EpochMicros ts = store->time_at(s);
                const auto f = oracle_fields(ts);
                bool ok = ts >= query.window.lo && ts < query.window.hi;
                for (const auto& c : query.calendar) ok = ok && cmp(c.op, oracle_field(f, c.field), c.value);
                if (ok) expected.insert(s);
            }
            ASSERT_EQ(flatten(resolve(*view, *store, query)), expected) << "log " << log << " query " << q;
        }
    }
}

TEST(DirectoryIndex, SnapshotReloadEquivalent) {
    TempDir dir;
    std::vector<EpochMicros> times;
    EpochMicros t = oracle_epoch(2010, 6, 1);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 5000; ++i) times.push_back(t += static_cast<EpochMicros>(rng() % 600'000'000));
    auto store = store_with_times(dir.file("s.db"), times);
    auto idx = DirectoryIndex::rebuild(*store);
    idx->snapshot(dir.file("s.idx"), store->schema().layout_hash(), store->generation());
    auto loaded = DirectoryIndex::load_snapshot(dir.file("s.idx"), *store);
    EXPECT_EQ(loaded.status, SnapshotLoad::loaded);
    EXPECT_EQ(loaded.replayed, 0u);
    for (int q = 0; q < 100; ++q) {
        IndexQuery query;
        query.calendar.push_back({static_cast<CalendarField>(rng() % 7), static_cast<CompareOp>(rng() % 6),
                                  static_cast<unsigned>(rng() % 24)});
        EXPECT_EQ(resolve(*loaded.index->view(), *store, query), resolve(*idx->view(), *store, query));
    }
    EXPECT_EQ(DirectoryIndex::load_snapshot(dir.file("missing.idx"), *store).status, SnapshotLoad::missing);
}

TEST(DirectoryIndex, SnapshotReplaysNewerRecords) {
    TempDir dir;
    std::vector<EpochMicros> times;
    for (int i = 0; i < 3000; ++i) times.push_back(oracle_epoch(2012, 1, 1) + i * 1'000'000LL);
    auto store = store_with_times(dir.file("s.db"), std::vector<EpochMicros>(times.begin(), times.begin() + 2000), 3000);
    DirectoryIndex::rebuild(*store)->snapshot(dir.file("s.idx"), store->schema().layout_hash(), store->generation());
    std::vector<std::byte> more;
    for (int i = 2000; i < 3000; ++i) {
        std::vector<Value> v = {Value{static_cast<std::int64_t>(times[i])}, Value{0.0}, Value{0.0}, Value{0.0}, Value{0.0}, Value{0.0}};
        auto r = encode_record(store->schema(), v);
        more.insert(more.end(), r.begin(), r.end());
        if (i % 100 == 99) {
            store->append_batch(more);
            more.clear();
        }
    }
    auto loaded = DirectoryIndex::load_snapshot(dir.file("s.idx"), *store);
    EXPECT_EQ(loaded.status, SnapshotLoad::loaded);
    EXPECT_EQ(loaded.replayed, 1000u);
    EXPECT_EQ(loaded.index->high_water(), 3000u);
}

TEST(DirectoryIndex, StaleSnapshotTriggersRebuild) {
    TempDir dir;
    std::vector<EpochMicros> times;
    for (int i = 0; i < 400; ++i) times.push_back(oracle_epoch(2012, 1, 1) + i * 1'000'000LL);
    auto store = store_with_times(dir.file("s.db"), std::vector<EpochMicros>(times.begin(), times.begin() + 100), 100);
    DirectoryIndex::rebuild(*store)->snapshot(dir.file("s.idx"), store->schema().layout_hash(), store->generation());
    std::vector<std::byte> more;
    for (int i = 100; i < 400; ++i) {
        std::vector<Value> v = {Value{static_cast<std::int64_t>(times[i])}, Value{0.0}, Value{0.0}, Value{0.0}, Value{0.0}, Value{0.0}};
        auto r = encode_record(store->schema(), v);
        more.insert(more.end(), r.begin(), r.end());
        if (i % 100 == 99) {
            store->append_batch(more);
            more.clear();
        }
    }
    auto loaded = DirectoryIndex::load_snapshot(dir.file("s.idx"), *store);
    EXPECT_EQ(loaded.status, SnapshotLoad::stale);
    IndexQuery all;
    EXPECT_EQ(flatten(resolve(*loaded.index->view(), *store, all)).size(), 100u);
}

} // namespace
} // namespace ltss
