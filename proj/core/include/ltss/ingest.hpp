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

#include "ltss/partition.hpp"
#include "ltss/ring_queue.hpp"
#include "ltss/schema.hpp"
#include "ltss/slab.hpp"
#include "ltss/time_ordering.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace ltss {

struct PipelineConfig {
    std::uint32_t pipeline_count = 1;
    std::size_t queue_capacity = 65536;
    /// 0 selects 2 x queue_capacity.
    std::size_t slab_capacity = 0;
    QueueDiscipline discipline = QueueDiscipline::spsc;

    /// With `udp` false no sockets are opened and records enter through
    /// IngestService::inject only.
    bool udp = true;
    std::string bind_host = "127.0.0.1";
    /// 0 binds an ephemeral port.
    std::uint16_t port = 0;
    /// One socket per pipeline on port, port+1, ... instead of one shared
    /// socket with hash routing.
    bool per_pipeline_ports = false;
    int receive_buffer_bytes = 32 << 20;

    /// Overrides the schema's partition key; empty means sender address.
    std::optional<std::string> partition_key;
    OrderingConfig ordering;

    std::size_t effective_slab_capacity() const noexcept {
        return slab_capacity ? slab_capacity : 2 * queue_capacity;
    }
    /// Throws ConfigError on violated invariants.
    void validate() const;
};

/// Builds a PipelineConfig from the schema's quantum, linger, max_open,
/// pipelines and partition key settings.
PipelineConfig pipeline_config_for(const Schema& schema);

struct IngestCounters {
    std::uint64_t received = 0;
    std::uint64_t malformed = 0;
    std::uint64_t out_of_range = 0;
    std::uint64_t delinquent = 0;
    std::uint64_t stored = 0;
    std::uint64_t dropped_backpressure = 0;

    std::uint64_t accounted() const noexcept {
        return malformed + out_of_range + delinquent + stored + dropped_backpressure;
    }
    bool conserved() const noexcept { return received == accounted(); }
    IngestCounters& operator+=(const IngestCounters& o) noexcept;
    friend bool operator==(const IngestCounters&, const IngestCounters&) = default;
};

std::string to_string(const IngestCounters& c);

/// 64-bit mix of a partition key's bytes.
std::uint64_t partition_hash(std::span<const std::byte> key) noexcept;

/// Pipeline for a record: hash of the key field when `key_field` is set,
/// otherwise of the sender identity.
std::uint32_t partition_of(const Schema& schema, std::span<const std::byte> record, std::uint32_t pipeline_count,
                           std::optional<std::size_t> key_field, std::uint64_t sender) noexcept;

/// Outcome of admitting one datagram. Invalid datagrams are counted as
/// malformed or out_of_range.
enum class EnqueueResult : std::uint8_t { accepted, rejected_backpressure, rejected_invalid };

/// Receivers, ordering threads and sorter threads for every partition of a
/// table. Each pipeline p feeds table partition p.
class IngestService {
public:
    IngestService(Table& table, PipelineConfig config);
    ~IngestService();
    IngestService(const IngestService&) = delete;
    IngestService& operator=(const IngestService&) = delete;

    /// Binds sockets (if udp) and starts all threads. Throws IoError on bind
    /// failure and ConfigError on bad configuration.
    void start();

    /// Stops receiving, drains every queue through ordering into the store,
    /// joins all threads. Idempotent.
    IngestCounters stop_and_flush();

    /// Decodes and enqueues one datagram as a receiver would. With SPSC
    /// queues, only one thread may inject and UDP must be off.
    EnqueueResult inject(std::span<const std::byte> datagram, std::uint64_t sender = 0);
    /// Like inject, but waits for queue room instead of dropping.
    EnqueueResult inject_wait(std::span<const std::byte> datagram, std::uint64_t sender = 0);

    IngestCounters counters() const noexcept;
    const PipelineConfig& config() const noexcept { return config_; }
    /// Bound UDP port of receiver socket `i` (one entry per socket).
    const std::vector<std::uint16_t>& ports() const noexcept { return ports_; }

    std::size_t slab_free(std::size_t pipeline) const noexcept;
    std::size_t memory_bytes() const noexcept;
    bool running() const noexcept { return running_.load(std::memory_order_acquire); }

private:
    struct Counters {
        std::atomic<std::uint64_t> received{0};
        std::atomic<std::uint64_t> malformed{0};
        std::atomic<std::uint64_t> out_of_range{0};
        std::atomic<std::uint64_t> delinquent{0};
        std::atomic<std::uint64_t> stored{0};
        std::atomic<std::uint64_t> dropped_backpressure{0};
    };

    struct Pipeline {
        Pipeline(std::size_t index, const PipelineConfig& cfg, std::size_t record_size);
        std::size_t index;
        SlabAllocator slab;
        BoundedQueue<SlotId> queue;
        SpscRing<QuantumBucket*> closed; // ordering -> sorter
        std::atomic<bool> ordering_done{false};
        std::thread ordering;
        std::thread sorter;
        EpochMicros last_stored = 0;
        std::vector<std::span<const std::byte>> batch; // sorter scratch
        std::vector<CompositeTime> batch_ctimes;
    };

    EnqueueResult admit(std::span<const std::byte> datagram, std::uint64_t sender, std::size_t fixed_pipeline,
                        bool wait = false);
    void receive_loop(int fd, std::size_t fixed_pipeline);
    void ordering_loop(Pipeline& p);
    void sorter_loop(Pipeline& p);
    void store_bucket(Pipeline& p, QuantumBucket& bucket);
    void open_sockets();

    Table& table_;
    PipelineConfig config_;
    const Schema& schema_;
    std::optional<std::size_t> key_field_;
    std::vector<std::unique_ptr<Pipeline>> pipelines_;
    std::vector<int> sockets_;
    std::vector<std::uint16_t> ports_;
    std::vector<std::thread> receivers_;
    Counters counters_;
    std::atomic<bool> running_{false};
    std::atomic<bool> receiving_{false};
    bool stopped_ = false;
};

} // namespace ltss
