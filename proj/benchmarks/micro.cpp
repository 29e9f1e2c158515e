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

#include "ltss/composite_time.hpp"
#include "ltss/datasets.hpp"
#include "ltss/directory_index.hpp"
#include "ltss/logical_table.hpp"
#include "ltss/partition.hpp"
#include "ltss/ring_queue.hpp"
#include "ltss/sql.hpp"
#include "ltss/time_ordering.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <unistd.h>

namespace {

using namespace ltss;

constexpr EpochMicros k2013 = 1'356'998'400'000'000; // 2013-01-01T00:00:00Z

std::vector<EpochMicros> random_epochs(std::size_t n) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<EpochMicros> d(946'684'800'000'000, 1'956'441'599'999'999);
    std::vector<EpochMicros> out(n);
    for (auto& t : out) t = d(rng);
    return out;
}

void BM_CompositeFromEpoch(benchmark::State& state) {
    const auto epochs = random_epochs(4096);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(CompositeTime::from_epoch(epochs[i++ & 4095]));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CompositeFromEpoch);

void BM_CompositeToEpoch(benchmark::State& state) {
    std::vector<CompositeTime> ct;
    for (auto t : random_epochs(4096)) ct.push_back(CompositeTime::from_epoch(t));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ct[i++ & 4095].to_epoch());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CompositeToEpoch);

template <typename Ring>
void ring_round_trip(benchmark::State& state) {
    Ring ring(1024);
    std::uint64_t v = 0;
    for (auto _ : state) {
        ring.try_push(v);
        ring.try_pop(v);
        benchmark::DoNotOptimize(v);
    }
    state.SetItemsProcessed(state.iterations());
}

void BM_SpscPushPop(benchmark::State& state) { ring_round_trip<SpscRing<std::uint64_t>>(state); }
void BM_MpmcPushPop(benchmark::State& state) { ring_round_trip<MpmcRing<std::uint64_t>>(state); }
BENCHMARK(BM_SpscPushPop);
BENCHMARK(BM_MpmcPushPop);

void BM_OrderingRoute(benchmark::State& state) {
    // 10 ms spacing, one in 10 records arriving 80 ms late.
    OrderingConfig cfg;
    OrderingState ordering(cfg);
    EpochMicros now = k2013;
    SlotId slot = 0;
    for (auto _ : state) {
        now += 10'000;
        const EpochMicros t = (slot % 10 == 9) ? now - 80'000 : now;
        ordering.route({t, slot++});
        auto closed = ordering.expire(now);
        for (auto& b : closed) ordering.recycle(std::move(b.records));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_OrderingRoute);

void BM_IndexAppend(benchmark::State& state) {
    const std::int64_t step = state.range(0);
    for (auto _ : state) {
        DirectoryIndex index;
        EpochMicros t = k2013;
        for (std::uint64_t seq = 0; seq < 100'000; ++seq, t += step) index.append(seq, CompositeTime::from_epoch(t));
        index.publish();
        benchmark::DoNotOptimize(index.memory_bytes());
    }
    state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_IndexAppend)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

// Shared taxi table for the narrowing and SQL benchmarks.
struct TaxiFixture {
    std::string path;
    std::unique_ptr<Table> table;
    std::unique_ptr<LogicalTable> logical;
    Catalog catalog;

    TaxiFixture() {
        path = (std::filesystem::temp_directory_path() / ("ltss-micro-" + std::to_string(::getpid()) + ".db")).string();
        const Dataset data = generate_taxi(100'000, 42);
        TableOptions opts;
        opts.capacity_records = data.size();
        opts.partitions = 1;
        opts.store.sync_each_batch = false;
        table = Table::create(path, data.schema(), opts);
        load_into(*table, data);
        logical = std::make_unique<LogicalTable>(*table);
        catalog.add(*logical);
    }
    ~TaxiFixture() {
        catalog = Catalog();
        logical.reset();
        table.reset();
        std::error_code ec;
        std::filesystem::remove(path, ec);
        std::filesystem::remove(path + ".idx", ec);
    }
};

TaxiFixture& taxi() {
    static TaxiFixture f;
    return f;
}

void BM_IndexNarrow(benchmark::State& state) {
    auto& f = taxi();
    const Partition& p = f.table->partition(0);
    IndexQuery q;
    q.calendar = {{CalendarField::month, CompareOp::eq, 6}, {CalendarField::hour, CompareOp::ge, 18}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(resolve(*p.view(), p.store(), q));
    }
}
BENCHMARK(BM_IndexNarrow)->Unit(benchmark::kMicrosecond);

void BM_SqlCountNarrow(benchmark::State& state) {
    auto& f = taxi();
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute_sql(
            "SELECT count(*) FROM TAXI WHERE CTIME_pickup_month = 6 AND CTIME_pickup_day = 15", f.catalog));
    }
}
BENCHMARK(BM_SqlCountNarrow)->Unit(benchmark::kMicrosecond);

void BM_SqlGroupBy(benchmark::State& state) {
    auto& f = taxi();
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute_sql(
            "SELECT CTIME_pickup_hour, avg(fare_amount) FROM TAXI WHERE CTIME_pickup_month = 3 "
            "GROUP BY CTIME_pickup_hour",
            f.catalog));
    }
}
BENCHMARK(BM_SqlGroupBy)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
