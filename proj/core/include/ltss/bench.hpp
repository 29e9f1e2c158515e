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

#include "ltss/datasets.hpp"
#include "ltss/ingest.hpp"
#include "ltss/replay.hpp"
#include "ltss/sql.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace ltss {

/// CPU seconds (user + system) consumed by this process, children excluded.
double process_cpu_seconds() noexcept;

struct MemoryUsage {
    std::size_t rss_bytes = 0;
    std::size_t rss_anon_bytes = 0; ///< resident memory not backed by files
};
MemoryUsage process_memory();

/// Samples process CPU every `interval` and reports the mean load index:
/// CPU seconds per wall second, so 2.0 means two cores fully busy.
class LoadSampler {
public:
    explicit LoadSampler(std::chrono::milliseconds interval = std::chrono::milliseconds(100))
        : interval_(interval) {}
    ~LoadSampler();
    LoadSampler(const LoadSampler&) = delete;
    LoadSampler& operator=(const LoadSampler&) = delete;

    void start();
    /// Mean over the samples taken; whole-run average for short runs.
    double stop();

private:
    std::chrono::milliseconds interval_;
    std::thread thread_;
    std::atomic<bool> running_{false};
    std::vector<double> samples_;
    double cpu_start_ = 0;
    std::chrono::steady_clock::time_point wall_start_;
};

/// Lowers the calling thread's scheduling priority (Linux nice value).
void lower_thread_priority(int nice_increment = 10) noexcept;

enum class IngestBackend : std::uint8_t { ltss, sqlite };
const char* to_string(IngestBackend b) noexcept;

struct IngestBenchConfig {
    IngestBackend backend = IngestBackend::ltss;
    std::uint32_t pipelines = 1;
    std::string work_dir = "ltss-bench";
    PipelineConfig pipeline;  ///< pipeline_count, udp and ports are overridden
    StoreOptions store;
    ReplaySpec replay;        ///< rate fields are overridden by the search
    /// Per-trial send budget; 0 sends the whole dataset every trial.
    double trial_seconds = 0.0;
    std::size_t min_trial_records = 20'000;

    double start_rate = 25'000;
    double max_rate = 4'000'000;
    double precision = 0.05; ///< stop bisecting when (fail - ok) / fail falls below
    int confirm_runs = 3;

    std::size_t sqlite_batch = 10'000;
};

struct IngestTrial {
    double target_rate = 0;
    std::size_t records = 0;
    ReplayStats sent;
    IngestCounters counters;
    double load_index = 0;
    double seconds = 0;
    /// Every sent record stored: no loss, no backpressure, no delinquents.
    bool zero_loss() const noexcept;
};

/// One run: fresh store, a forked sender process replaying `records`
/// records at `rate` over loopback, then stop-and-flush. The load index
/// covers the receiving process only.
IngestTrial run_ingest_trial(const Dataset& data, const IngestBenchConfig& cfg, double rate, std::size_t records = 0);

struct BenchReport {
    std::string label;
    IngestBackend backend = IngestBackend::ltss;
    std::uint32_t pipelines = 1;
    double max_throughput_rps = 0; ///< mean achieved send rate of the confirming zero-loss runs
    double load_index = 0;
    IngestCounters counters;       ///< of the last confirming run
    std::vector<IngestTrial> trials;
};

/// Exponential ramp from start_rate until a trial loses records, bisection
/// down to `precision`, then `confirm_runs` trials at the candidate (stepping
/// down on failure).
BenchReport bench_ingest(const Dataset& data, const IngestBenchConfig& cfg);

std::string bench_report_csv_header();
std::string bench_report_csv_row(const BenchReport& r);

// Query benchmarks

struct NamedQuery {
    std::string id;
    std::string sql;
};

const std::vector<NamedQuery>& taxi_queries();
const std::vector<NamedQuery>& energy_queries();
/// Average over the last 1000 inserted seismic records.
const std::string& sliding_window_query();

struct QueryTiming {
    std::string id;
    std::size_t rows = 0;
    int reps = 0;
    double mean_ms = 0;
    double p50_ms = 0;
    double p99_ms = 0;
    double min_ms = 0;
    std::uint64_t rows_examined = 0; ///< per execution
};

std::vector<QueryTiming> bench_query(const Catalog& catalog, const std::vector<NamedQuery>& queries, int reps);
std::string query_timing_csv_header();
std::string query_timing_csv_row(const QueryTiming& t);

// Read-write contention

struct ContentionConfig {
    std::vector<double> rates = {0, 50'000, 100'000, 200'000};
    int runs = 40;
    int windows = 20;
    std::chrono::milliseconds window{50};
    std::string query = sliding_window_query();
    std::uint64_t capacity = 1'000'000;
    std::string work_dir = "ltss-bench";
    std::size_t preload = 10'000; ///< records stored before measuring
    StoreOptions store;
    /// Run queries at reduced priority so ingest keeps its share of CPU.
    bool deprioritize_queries = true;
};

struct ContentionRow {
    double rate = 0;
    double mean_qps = 0;
    double fluctuation = 0; ///< stddev / mean of per-window QPS
    std::uint64_t queries = 0;
    std::uint64_t inconsistent = 0; ///< results that are not a 1000-record window
    ReplayStats sent;
    IngestCounters counters;
};

/// Seismic records whose `value` field is the record's sequence number.
Dataset sequenced_seismic(std::size_t count, EpochMicros start, EpochMicros interval = 10);

/// For each rate: ingest sequenced seismic records over loopback while
/// running the window query back to back. A result is consistent when it
/// averages 1000 consecutive sequence numbers.
std::vector<ContentionRow> bench_contention(const ContentionConfig& cfg);
std::string contention_csv_header();
std::string contention_csv_row(const ContentionRow& r);

} // namespace ltss
