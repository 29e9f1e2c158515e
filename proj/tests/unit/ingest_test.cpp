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

#include "ltss/bench.hpp"
#include "ltss/datasets.hpp"
#include "ltss/error.hpp"
#include "ltss/ingest.hpp"
#include "ltss/partition.hpp"
#include "ltss/replay.hpp"
#include "ltss/schema.hpp"

#include "temp_dir.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <cstring>
#include <random>
#include <set>
#include <thread>

namespace ltss {
namespace {

using testing::TempDir;

std::unique_ptr<Table> make_table(const TempDir& dir, const Schema& schema, std::uint32_t partitions,
                                  std::uint64_t capacity = 100'000) {
    TableOptions opts;
    opts.partitions = partitions;
    opts.capacity_records = capacity;
    opts.store.sync_each_batch = false;
    return Table::create(dir.file("t.db"), schema, opts);
}

PipelineConfig offline(std::uint32_t pipelines = 1) {
    PipelineConfig cfg;
    cfg.pipeline_count = pipelines;
    cfg.udp = false;
    cfg.queue_capacity = 1024;
    return cfg;
}

bool store_sorted(const RecordStore& store) {
    const RecordRange live = store.live_window();
    for (std::uint64_t s = live.begin + 1; s < live.end; ++s) {
        if (store.time_at(s) < store.time_at(s - 1)) return false;
    }
    return true;
}

TEST(Ingest, InjectedRecordsAreStoredInOrder) {
    TempDir dir;
    const Dataset data = generate_seismic(20'000, 3);
    auto table = make_table(dir, data.schema(), 1);
    IngestService svc(*table, offline());
    svc.start();
    for (std::size_t i = 0; i < data.size(); ++i) {
        ASSERT_EQ(svc.inject_wait(data.record(i)), EnqueueResult::accepted);
    }
    const IngestCounters c = svc.stop_and_flush();
    EXPECT_TRUE(c.conserved()) << to_string(c);
    EXPECT_EQ(c.received, 20'000u);
    EXPECT_EQ(c.stored, 20'000u);
    EXPECT_EQ(table->partition(0).store().total(), 20'000u);
    EXPECT_TRUE(store_sorted(table->partition(0).store()));
    EXPECT_EQ(svc.slab_free(0), svc.config().effective_slab_capacity());
}

TEST(Ingest, MalformedAndOutOfRangeAreCounted) {
    TempDir dir;
    const Schema schema = seismic_schema();
    auto table = make_table(dir, schema, 1);
    IngestService svc(*table, offline());
    svc.start();
    const std::array<std::byte, 3> runt{};
    EXPECT_EQ(svc.inject(runt), EnqueueResult::rejected_invalid);
    const std::vector<Value> ancient{Value{std::int64_t{0}}, Value{1.0}, Value{0.0}, Value{0.0}, Value{0.0},
                                     Value{0.0}};
    std::vector<std::byte> rec = encode_record(schema, ancient); // 1970 is outside the representable range
    EXPECT_EQ(svc.inject(rec), EnqueueResult::rejected_invalid);
    const IngestCounters c = svc.stop_and_flush();
    EXPECT_EQ(c.received, 2u);
    EXPECT_EQ(c.malformed, 1u);
    EXPECT_EQ(c.out_of_range, 1u);
    EXPECT_EQ(c.stored, 0u);
    EXPECT_TRUE(c.conserved());
    EXPECT_EQ(table->partition(0).store().total(), 0u);
}

TEST(Ingest, ZeroRecordRun) {
    TempDir dir;
    auto table = make_table(dir, seismic_schema(), 2);
    IngestService svc(*table, offline(2));
    svc.start();
    const IngestCounters c = svc.stop_and_flush();
    EXPECT_EQ(c, IngestCounters{});
    EXPECT_EQ(svc.stop_and_flush(), c); // idempotent
}

TEST(Ingest, LateRecordIsDelinquent) {
    TempDir dir;
    const Dataset data = sequenced_seismic(3000, 1'577'836'800'000'000, 1000);
    auto table = make_table(dir, data.schema(), 1);
    PipelineConfig cfg = offline();
    cfg.ordering = OrderingConfig{100'000, 2, 16};
    IngestService svc(*table, cfg);
    svc.start();
    for (std::size_t i = 1; i < data.size(); ++i) svc.inject_wait(data.record(i));
    svc.inject_wait(data.record(0)); // almost 3 s late against a 200 ms hold
    const IngestCounters c = svc.stop_and_flush();
    EXPECT_EQ(c.delinquent, 1u);
    EXPECT_EQ(c.stored, 2999u);
    EXPECT_TRUE(c.conserved());
    EXPECT_TRUE(store_sorted(table->partition(0).store()));
}

TEST(Ingest, BackpressureDropsAreCounted) {
    TempDir dir;
    const Dataset data = generate_seismic(50'000, 4);
    auto table = make_table(dir, data.schema(), 1);
    PipelineConfig cfg = offline();
    cfg.queue_capacity = 16;
    IngestService svc(*table, cfg);
    svc.start();
    std::uint64_t rejected = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        rejected += svc.inject(data.record(i)) == EnqueueResult::rejected_backpressure;
    }
    const IngestCounters c = svc.stop_and_flush();
    EXPECT_EQ(c.dropped_backpressure, rejected);
    EXPECT_TRUE(c.conserved()) << to_string(c);
    EXPECT_EQ(table->partition(0).store().total(), c.stored);
    EXPECT_EQ(svc.slab_free(0), cfg.effective_slab_capacity());
}

TEST(Ingest, PipelineCountMustMatchPartitions) {
    TempDir dir;
    auto table = make_table(dir, seismic_schema(), 2);
    EXPECT_THROW(IngestService(*table, offline(1)), ConfigError);
    PipelineConfig bad = offline(2);
    bad.queue_capacity = 1000;
    EXPECT_THROW(IngestService(*table, bad), ConfigError);
}

TEST(Ingest, KeyHashSpreadsEvenly) {
    const Schema schema = taxi_schema();
    const auto key = schema.find("medallion");
    ASSERT_TRUE(key);
    std::mt19937_64 rng(9);
    for (std::uint32_t n : {2u, 4u}) {
        std::vector<std::size_t> counts(n, 0);
        const Dataset data = generate_taxi(1, 1);
        std::vector<std::byte> rec(data.record(0).begin(), data.record(0).end());
        const std::size_t off = schema.fields()[*key].offset;
        for (int i = 0; i < 100'000; ++i) {
            const std::string m = std::to_string(rng());
            std::fill(rec.begin() + off, rec.begin() + off + 32, std::byte{0});
            std::memcpy(rec.data() + off, m.data(), m.size());
            ++counts[partition_of(schema, rec, n, key, 0)];
        }
        for (std::size_t c : counts) {
            EXPECT_NEAR(static_cast<double>(c) / 100'000, 1.0 / n, 0.05) << n;
        }
    }
}

TEST(Ingest, SameKeySamePipeline) {
    TempDir dir;
    const Dataset data = generate_taxi(5000, 12);
    auto table = make_table(dir, data.schema(), 3);
    PipelineConfig cfg = offline(3);
    cfg.partition_key = "medallion";
    cfg.discipline = QueueDiscipline::mpmc;
    IngestService svc(*table, cfg);
    svc.start();
    for (std::size_t i = 0; i < data.size(); ++i) svc.inject_wait(data.record(i));
    const IngestCounters c = svc.stop_and_flush();
    ASSERT_TRUE(c.conserved());
    std::map<std::string, std::set<std::size_t>> where;
    for (std::size_t p = 0; p < 3; ++p) {
        const RecordStore& s = table->partition(p).store();
        for (std::uint64_t q = s.live_window().begin; q < s.live_window().end; ++q) {
            where[std::get<std::string>(read_field(s.schema(), s.read_at(q), "medallion"))].insert(p);
        }
    }
    for (const auto& [k, ps] : where) EXPECT_EQ(ps.size(), 1u) << k;
    EXPECT_EQ(c.stored + c.delinquent, data.size());
}

TEST(Ingest, UdpEndToEnd) {
    TempDir dir;
    const Dataset data = generate_seismic(5000, 21);
    auto table = make_table(dir, data.schema(), 1);
    PipelineConfig cfg;
    cfg.udp = true;
    IngestService svc(*table, cfg);
    svc.start();
    ASSERT_EQ(svc.ports().size(), 1u);
    ReplaySpec spec;
    spec.rate_mode = RateMode::fixed;
    spec.rate = 20'000;
    const ReplayStats sent = replay(data, spec, "127.0.0.1", svc.ports());
    EXPECT_EQ(sent.sent, 5000u);
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    const IngestCounters c = svc.stop_and_flush();
    EXPECT_EQ(c.received, 5000u);
    EXPECT_EQ(c.stored, 5000u);
    EXPECT_TRUE(store_sorted(table->partition(0).store()));
    EXPECT_GT(svc.memory_bytes(), 0u);
}

TEST(Ingest, PerPipelinePorts) {
    TempDir dir;
    const Dataset data = generate_seismic(2000, 22);
    auto table = make_table(dir, data.schema(), 2);
    PipelineConfig cfg;
    cfg.pipeline_count = 2;
    cfg.per_pipeline_ports = true;
    cfg.port = 0;
    IngestService svc(*table, cfg);
    svc.start();
    ASSERT_EQ(svc.ports().size(), 2u);
    ReplaySpec spec;
    spec.rate_mode = RateMode::fixed;
    spec.rate = 20'000;
    replay(data, spec, "127.0.0.1", svc.ports());
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    const IngestCounters c = svc.stop_and_flush();
    EXPECT_EQ(c.stored, 2000u);
    EXPECT_GT(table->partition(0).store().total(), 0u);
    EXPECT_GT(table->partition(1).store().total(), 0u);
}

TEST(Ingest, ConfigDefaultsFromSchema) {
    SchemaOptions o;
    o.pipelines = 3;
    o.quantum_ms = 50;
    o.linger_windows = 4;
    const PipelineConfig cfg = pipeline_config_for(seismic_schema(o));
    EXPECT_EQ(cfg.pipeline_count, 3u);
    EXPECT_EQ(cfg.ordering.quantum_us, 50'000u);
    EXPECT_EQ(cfg.ordering.linger, 4u);
}

} // namespace
} // namespace ltss
