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
#include "ltss/error.hpp"
#include "ltss/logical_table.hpp"
#include "ltss/partition.hpp"
#include "ltss/prefetch.hpp"
#include "ltss/query.hpp"

#include "calendar_oracle.hpp"
#include "temp_dir.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ltss {
namespace {

using testing::oracle_epoch;
using testing::TempDir;

std::vector<std::byte> seismic(EpochMicros t, double value) {
    std::vector<Value> v = {Value{static_cast<std::int64_t>(t)}, Value{value}, Value{0.0}, Value{0.0}, Value{0.0}, Value{0.0}};
    return encode_record(seismic_schema(), v);
}

void append(Table& table, std::size_t p, const std::vector<EpochMicros>& times) {
    std::vector<std::vector<std::byte>> recs;
    std::vector<std::span<const std::byte>> spans;
    std::vector<CompositeTime> ctimes;
    for (auto t : times) {
        recs.push_back(seismic(t, static_cast<double>(t % 1000)));
        ctimes.push_back(CompositeTime::from_epoch(t));
    }
    for (auto& r : recs) spans.emplace_back(r);
    table.append_batch(p, spans, ctimes);
}

std::unique_ptr<Table> make_table(const TempDir& dir, std::uint32_t partitions, std::uint64_t capacity = 1000) {
    TableOptions opts;
    opts.partitions = partitions;
    opts.capacity_records = capacity;
    opts.store.sync_each_batch = false;
    return Table::create(dir.file("t.db"), seismic_schema(), opts);
}

std::vector<EpochMicros> scan_times(const LogicalTable& lt, const QueryPlan& plan, CombineMode mode,
                                    ScanDirection dir = ScanDirection::forward) {
    std::vector<EpochMicros> out;
    for (Cursor c(lt, plan, {mode, dir, nullptr}); !c.eof(); c.next()) out.push_back(c.time());
    return out;
}

TEST(BestIndex, SplitsConstraints) {
    TempDir dir;
    const Dataset data = generate_taxi(100, 1);
    TableOptions opts;
    opts.capacity_records = 1000;
    opts.store.sync_each_batch = false;
    auto table = Table::create(dir.file("t.db"), data.schema(), opts);
    LogicalTable lt(*table);

    std::vector<Constraint> q1 = {{"CTIME_pickup_hour", CompareOp::ge, Value{std::int64_t{20}}}};
    auto p1 = best_index(lt, q1);
    EXPECT_EQ(p1.consumed.size(), 1u);
    EXPECT_TRUE(p1.residual.empty());

    std::vector<Constraint> q2 = {{"medallion", CompareOp::eq, Value{std::string("X")}}};
    auto p2 = best_index(lt, q2);
    EXPECT_TRUE(p2.consumed.empty());
    EXPECT_EQ(p2.residual.size(), 1u);

    std::vector<Constraint> q3 = {{"CTIME_pickup_year", CompareOp::eq, Value{std::int64_t{13}}},
                                  {"CTIME_pickup_month", CompareOp::eq, Value{std::int64_t{11}}},
                                  {"passenger_count", CompareOp::gt, Value{std::int64_t{2}}}};
    auto p3 = best_index(lt, q3);
    EXPECT_EQ(p3.consumed.size(), 2u);
    ASSERT_EQ(p3.residual.size(), 1u);
    EXPECT_EQ(p3.residual[0].column, "passenger_count");

    // Cost falls as finer constraints are consumed.
    std::vector<Constraint> q4(q3.begin(), q3.begin() + 1);
    std::vector<Constraint> q5(q3.begin(), q3.begin() + 2);
    q5.push_back({"CTIME_pickup_day", CompareOp::eq, Value{std::int64_t{25}}});
    std::vector<Constraint> q6(q3.begin(), q3.begin() + 2);
    EXPECT_GT(best_index(lt, q4).estimated_cost, best_index(lt, q6).estimated_cost);
    EXPECT_GT(best_index(lt, q6).estimated_cost, best_index(lt, q5).estimated_cost);

    std::vector<Constraint> bad = {{"nope", CompareOp::eq, Value{std::int64_t{1}}}};
    EXPECT_THROW(best_index(lt, bad), QueryError);
}

TEST(LogicalTable, DerivedColumnNames) {
    EXPECT_EQ(ctime_prefix_for("pickup_datetime"), "pickup");
    EXPECT_EQ(ctime_prefix_for("DATETIME"), "");
    EXPECT_EQ(ctime_prefix_for("time"), "");
    TempDir dir;
    auto table = make_table(dir, 1);
    LogicalTable lt(*table);
    EXPECT_TRUE(lt.resolve("CTIME_hour").has_value());
    EXPECT_TRUE(lt.resolve("timestamp").has_value());
    EXPECT_TRUE(lt.resolve("VALUE").has_value());
}

TEST(Cursor, CombineModes) {
    TempDir dir;
    auto table = make_table(dir, 2);
    const EpochMicros t = oracle_epoch(2020, 1, 1);
    append(*table, 0, {t + 1, t + 3});
    append(*table, 1, {t + 2, t + 4});
    LogicalTable lt(*table);
    const QueryPlan all = best_index(lt, {});
    EXPECT_EQ(scan_times(lt, all, CombineMode::sort_merge), (std::vector<EpochMicros>{t + 1, t + 2, t + 3, t + 4}));
    EXPECT_EQ(scan_times(lt, all, CombineMode::append), (std::vector<EpochMicros>{t + 1, t + 3, t + 2, t + 4}));
    EXPECT_EQ(scan_times(lt, all, CombineMode::sort_merge, ScanDirection::reverse),
              (std::vector<EpochMicros>{t + 4, t + 3, t + 2, t + 1}));
}

TEST(Cursor, SinglePartitionModesAgree) {
    TempDir dir;
    auto table = make_table(dir, 1);
    const EpochMicros t = oracle_epoch(2020, 1, 1);
    append(*table, 0, {t, t + 5, t + 9});
    LogicalTable lt(*table);
    const QueryPlan all = best_index(lt, {});
    EXPECT_EQ(scan_times(lt, all, CombineMode::append), scan_times(lt, all, CombineMode::sort_merge));
}

TEST(Cursor, ColumnsAndRowid) {
    TempDir dir;
    auto table = make_table(dir, 2);
    const EpochMicros t = oracle_epoch(2020, 5, 6, 7, 8, 9);
    append(*table, 0, {t});
    append(*table, 1, {t + 1'000'000});
    LogicalTable lt(*table);
    Cursor c(lt, best_index(lt, {}));
    ASSERT_FALSE(c.eof());
    EXPECT_EQ(c.column("CTIME_hour"), Value{std::int64_t{7}});
    EXPECT_EQ(c.column("TIMESTAMP"), Value{static_cast<std::int64_t>(t)});
    EXPECT_EQ(c.rowid(), 0u);
    c.next();
    EXPECT_EQ(c.rowid(), (std::uint64_t{1} << 48) | 0u);
    EXPECT_EQ(c.column("CTIME_sec"), Value{std::int64_t{10}});
    c.next();
    EXPECT_TRUE(c.eof());
    EXPECT_THROW(c.next(), QueryError);
}

// Index pushdown returns the same rows as a scan with every constraint
// applied as a residual filter.
TEST(Cursor, PushdownEqualsResidualScan) {
    TempDir dir;
    auto table = make_table(dir, 3, 3000);
    std::mt19937_64 rng(9);
    EpochMicros t = oracle_epoch(2019, 12, 20);
    for (int b = 0; b < 30; ++b) {
        for (std::size_t p = 0; p < 3; ++p) {
            std::vector<EpochMicros> times;
            for (int i = 0; i < 50; ++i) times.push_back(t += static_cast<EpochMicros>(rng() % 60'000'000'000LL));
            append(*table, p, times);
        }
    }
    LogicalTable lt(*table);
    const char* cols[] = {"CTIME_year", "CTIME_month", "CTIME_day", "CTIME_wday", "CTIME_hour", "CTIME_min"};
    const unsigned ranges[] = {2, 12, 31, 7, 24, 60};
    for (int q = 0; q < 200; ++q) {
        std::vector<Constraint> cs;
        for (int k = 0; k < 2; ++k) {
            const int f = static_cast<int>(rng() % 6);
            cs.push_back({cols[f], static_cast<CompareOp>(rng() % 6),
                          Value{static_cast<std::int64_t>(f == 0 ? 19 + rng() % 2 : rng() % ranges[f])}});
        }
        const QueryPlan pushed = best_index(lt, cs);
        QueryPlan residual;
        residual.table = lt.name();
        for (const auto& c : cs) residual.residual_bound.push_back({*lt.resolve(c.column), c.op, c.value});
        ASSERT_EQ(scan_times(lt, pushed, CombineMode::sort_merge), scan_times(lt, residual, CombineMode::sort_merge));
        ASSERT_EQ(count_matching(lt, pushed), scan_times(lt, residual, CombineMode::append).size());
    }
}

TEST(Cursor, SortMergeNonDecreasing) {
    TempDir dir;
    auto table = make_table(dir, 4, 500);
    std::mt19937_64 rng(4);
    for (std::size_t p = 0; p < 4; ++p) {
        std::vector<EpochMicros> times;
        EpochMicros t = oracle_epoch(2021, 1, 1);
        for (int i = 0; i < 400; ++i) times.push_back(t += static_cast<EpochMicros>(rng() % 5000));
        append(*table, p, times);
    }
    LogicalTable lt(*table);
    const auto times = scan_times(lt, best_index(lt, {}), CombineMode::sort_merge);
    EXPECT_EQ(times.size(), 1600u);
    EXPECT_TRUE(std::is_sorted(times.begin(), times.end()));
}

TEST(UpdateCallback, FiresPerBoundaryCrossing) {
    TempDir dir;
    auto table = make_table(dir, 1, 10'000);
    std::vector<std::uint64_t> calls;
    auto sub = table->register_update_callback(1000, [&](std::uint64_t n) { calls.push_back(n); });
    const EpochMicros t = oracle_epoch(2020, 1, 1);
    for (int b = 0; b < 25; ++b) {
        std::vector<EpochMicros> times;
        for (int i = 0; i < 100; ++i) times.push_back(t + b * 100 + i);
        append(*table, 0, times);
    }
    EXPECT_EQ(calls, (std::vector<std::uint64_t>{1000, 2000}));

    std::vector<std::uint64_t> each;
    auto sub1 = table->register_update_callback(1, [&](std::uint64_t n) { each.push_back(n); });
    std::vector<EpochMicros> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(t + 10'000 + i);
    append(*table, 0, ten);
    EXPECT_EQ(each, (std::vector<std::uint64_t>{2510}));
    sub1.unsubscribe();
    append(*table, 0, {t + 20'000});
    EXPECT_EQ(each.size(), 1u);
    EXPECT_THROW(table->register_update_callback(0, [](std::uint64_t) {}), ConfigError);
}

TEST(Prefetch, CacheServesRepeatReads) {
    TempDir dir;
    auto table = make_table(dir, 1, 5000);
    const EpochMicros t = oracle_epoch(2020, 1, 1);
    std::vector<EpochMicros> times;
    for (int i = 0; i < 4000; ++i) times.push_back(t + i * 1'000'000LL);
    append(*table, 0, times);
    LogicalTable lt(*table);
    std::vector<Constraint> cs = {{"CTIME_hour", CompareOp::eq, Value{std::int64_t{0}}},
                                  {"CTIME_min", CompareOp::lt, Value{std::int64_t{10}}}};
    const QueryPlan plan = best_index(lt, cs);
    const auto uncached = scan_times(lt, plan, CombineMode::sort_merge);

    PrefetchCache cache(1 << 20);
    EXPECT_GT(cache.prefetch(lt, plan), 0u);
    EXPECT_TRUE(cache.contains(plan.key()));
    const auto reads = table->partition(0).store().storage_reads();
    std::vector<EpochMicros> cached;
    for (Cursor c(lt, plan, {CombineMode::sort_merge, ScanDirection::forward, &cache}); !c.eof(); c.next()) {
        cached.push_back(c.time());
    }
    EXPECT_EQ(cached, uncached);
    EXPECT_EQ(table->partition(0).store().storage_reads(), reads);
    EXPECT_EQ(cache.hits(), uncached.size());

    PrefetchCache none(0);
    EXPECT_EQ(none.prefetch(lt, plan), 0u);
    std::vector<EpochMicros> via_empty;
    for (Cursor c(lt, plan, {CombineMode::sort_merge, ScanDirection::forward, &none}); !c.eof(); c.next()) {
        via_empty.push_back(c.time());
    }
    EXPECT_EQ(via_empty, uncached);
}

TEST(Prefetch, InvalidatedByRollAround) {
    TempDir dir;
    auto table = make_table(dir, 1, 1000);
    const EpochMicros t = oracle_epoch(2020, 1, 1);
    std::vector<EpochMicros> times;
    for (int i = 0; i < 1000; ++i) times.push_back(t + i);
    append(*table, 0, times);
    LogicalTable lt(*table);
    const QueryPlan plan = best_index(lt, {});
    PrefetchCache cache(1 << 20);
    cache.prefetch(lt, plan);
    std::vector<EpochMicros> more;
    for (int i = 0; i < 500; ++i) more.push_back(t + 1000 + i);
    append(*table, 0, more);
    std::vector<EpochMicros> got;
    for (Cursor c(lt, best_index(lt, {}), {CombineMode::sort_merge, ScanDirection::forward, &cache}); !c.eof();
         c.next()) {
        got.push_back(c.time());
    }
    ASSERT_EQ(got.size(), 1000u);
    EXPECT_EQ(got.front(), t + 500);
    EXPECT_GE(cache.invalidations(), 1u);
}

} // namespace
} // namespace ltss
