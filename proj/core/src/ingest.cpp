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

#include "ltss/ingest.hpp"

#include "ltss/error.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <iostream>
#include <sstream>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace ltss {

namespace {

constexpr std::size_t kRecvBatch = 64;
constexpr std::size_t kRecvBufferSize = 2048;
constexpr std::size_t kClosedRingCapacity = 1024;
constexpr std::size_t kPopBurst = 8192;
constexpr auto kIdleSleep = std::chrono::microseconds(200);

EpochMicros elapsed_micros(std::chrono::steady_clock::time_point since) {
    return static_cast<EpochMicros>(
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - since).count());
}

std::uint64_t sender_id(const sockaddr_in& addr) noexcept {
    return (std::uint64_t{ntohl(addr.sin_addr.s_addr)} << 16) | ntohs(addr.sin_port);
}

} // namespace

void PipelineConfig::validate() const {
    if (pipeline_count < 1) throw ConfigError("pipeline_count must be at least 1");
    if (!is_power_of_two(queue_capacity)) throw ConfigError("queue_capacity must be a power of two");
    if (queue_capacity > effective_slab_capacity()) throw ConfigError("queue_capacity must not exceed slab_capacity");
    if (effective_slab_capacity() > std::numeric_limits<SlotId>::max()) throw ConfigError("slab_capacity too large");
    if (ordering.quantum_us == 0) throw ConfigError("quantum must be positive");
    if (ordering.max_open == 0) throw ConfigError("max_open must be positive");
    if (udp && per_pipeline_ports && port != 0 && std::uint32_t{port} + pipeline_count - 1 > 65535) {
        throw ConfigError("per-pipeline ports exceed 65535");
    }
}

PipelineConfig pipeline_config_for(const Schema& schema) {
    PipelineConfig cfg;
    const SchemaOptions& o = schema.options();
    cfg.pipeline_count = o.pipelines;
    cfg.ordering.quantum_us = o.quantum_ms * 1000;
    cfg.ordering.linger = o.linger_windows;
    cfg.ordering.max_open = o.max_open;
    cfg.partition_key = o.partition_key;
    return cfg;
}

IngestCounters& IngestCounters::operator+=(const IngestCounters& o) noexcept {
    received += o.received;
    malformed += o.malformed;
    out_of_range += o.out_of_range;
    delinquent += o.delinquent;
    stored += o.stored;
    dropped_backpressure += o.dropped_backpressure;
    return *this;
}

std::string to_string(const IngestCounters& c) {
    std::ostringstream os;
    os << "received=" << c.received << " malformed=" << c.malformed << " out_of_range=" << c.out_of_range
       << " delinquent=" << c.delinquent << " stored=" << c.stored
       << " dropped_backpressure=" << c.dropped_backpressure;
    return os.str();
}

std::uint64_t partition_hash(std::span<const std::byte> key) noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::byte b : key) {
        h ^= static_cast<std::uint8_t>(b);
        h *= 1099511628211ULL;
    }
    // splitmix64 finalizer so that short keys spread over all bits.
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

std::uint32_t partition_of(const Schema& schema, std::span<const std::byte> record, std::uint32_t pipeline_count,
                           std::optional<std::size_t> key_field, std::uint64_t sender) noexcept {
    if (pipeline_count <= 1) return 0;
    std::uint64_t h;
    if (key_field && record.size() == schema.record_size()) {
        const Field& f = schema.fields()[*key_field];
        h = partition_hash(record.subspan(f.offset, f.type.size()));
    } else {
        std::byte b[8];
        std::memcpy(b, &sender, sizeof b);
        h = partition_hash(b);
    }
    return static_cast<std::uint32_t>(h % pipeline_count);
}

IngestService::Pipeline::Pipeline(std::size_t i, const PipelineConfig& cfg, std::size_t record_size)
    : index(i),
      slab(cfg.effective_slab_capacity(), record_size),
      queue(cfg.discipline, cfg.queue_capacity),
      closed(kClosedRingCapacity) {}

IngestService::IngestService(Table& table, PipelineConfig config)
    : table_(table), config_(std::move(config)), schema_(table.schema()) {
    config_.validate();
    if (config_.pipeline_count != table.partition_count()) {
        throw ConfigError("pipeline_count (" + std::to_string(config_.pipeline_count) +
                          ") must equal the table's partition count (" + std::to_string(table.partition_count()) +
                          ")");
    }
    if (table.mode() != OpenMode::read_write) throw ConfigError("ingest needs a writable table");
    if (config_.partition_key && !config_.partition_key->empty()) {
        key_field_ = schema_.find_ci(*config_.partition_key);
        if (!key_field_) throw ConfigError("partition key '" + *config_.partition_key + "' is not a schema field");
    }
    for (std::size_t i = 0; i < config_.pipeline_count; ++i) {
        auto p = std::make_unique<Pipeline>(i, config_, schema_.record_size());
        const RecordStore& store = table.partition(i).store();
        if (store.total() > 0) p->last_stored = store.metadata().max_time;
        pipelines_.push_back(std::move(p));
    }
}

IngestService::~IngestService() {
    if (running_.load()) stop_and_flush();
    for (int fd : sockets_) ::close(fd);
}

void IngestService::open_sockets() {
    const std::size_t count = config_.per_pipeline_ports ? config_.pipeline_count : 1;
    for (std::size_t i = 0; i < count; ++i) {
        const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
        if (fd < 0) throw IoError("create UDP socket", errno);
        sockets_.push_back(fd);
        int size = config_.receive_buffer_bytes;
        if (::setsockopt(fd, SOL_SOCKET, SO_RCVBUFFORCE, &size, sizeof size) != 0) {
            ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &size, sizeof size);
        }
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(config_.port == 0 ? 0 : static_cast<std::uint16_t>(config_.port + i));
        if (::inet_pton(AF_INET, config_.bind_host.c_str(), &addr.sin_addr) != 1) {
            throw ConfigError("bind address '" + config_.bind_host + "' is not an IPv4 address");
        }
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            throw IoError("bind " + config_.bind_host + ":" + std::to_string(ntohs(addr.sin_port)), errno);
        }
        socklen_t len = sizeof addr;
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        ports_.push_back(ntohs(addr.sin_port));
    }
}

void IngestService::start() {
    if (running_.load() || stopped_) throw ConfigError("ingest service already started");
    if (config_.udp) open_sockets();
    running_.store(true, std::memory_order_release);
    receiving_.store(true, std::memory_order_release);
    for (auto& p : pipelines_) {
        p->ordering = std::thread([this, pp = p.get()] { ordering_loop(*pp); });
        p->sorter = std::thread([this, pp = p.get()] { sorter_loop(*pp); });
    }
    if (!config_.udp) return;
    constexpr std::size_t kAnyPipeline = static_cast<std::size_t>(-1);
    if (config_.per_pipeline_ports) {
        for (std::size_t i = 0; i < sockets_.size(); ++i) {
            receivers_.emplace_back([this, fd = sockets_[i], i] { receive_loop(fd, i); });
        }
    } else {
        // With MPMC queues several receivers may share the socket.
        const std::size_t n = config_.discipline == QueueDiscipline::mpmc ? config_.pipeline_count : 1;
        for (std::size_t i = 0; i < n; ++i) {
            receivers_.emplace_back([this, fd = sockets_[0]] { receive_loop(fd, kAnyPipeline); });
        }
    }
}

EnqueueResult IngestService::inject(std::span<const std::byte> datagram, std::uint64_t sender) {
    return admit(datagram, sender, static_cast<std::size_t>(-1));
}

EnqueueResult IngestService::inject_wait(std::span<const std::byte> datagram, std::uint64_t sender) {
    return admit(datagram, sender, static_cast<std::size_t>(-1), true);
}

EnqueueResult IngestService::admit(std::span<const std::byte> datagram, std::uint64_t sender,
                                   std::size_t fixed_pipeline, bool wait) {
    counters_.received.fetch_add(1, std::memory_order_relaxed);
    const DecodedRecord d = decode_record(schema_, datagram);
    if (d.status == DecodeStatus::malformed) {
        counters_.malformed.fetch_add(1, std::memory_order_relaxed);
        return EnqueueResult::rejected_invalid;
    }
    if (d.status == DecodeStatus::out_of_range) {
        counters_.out_of_range.fetch_add(1, std::memory_order_relaxed);
        return EnqueueResult::rejected_invalid;
    }
    const std::size_t index = fixed_pipeline < pipelines_.size()
                                  ? fixed_pipeline
                                  : partition_of(schema_, datagram, config_.pipeline_count, key_field_, sender);
    Pipeline& p = *pipelines_[index];
    auto slot = p.slab.acquire();
    while (wait && !slot) {
        std::this_thread::sleep_for(kIdleSleep);
        slot = p.slab.acquire();
    }
    if (!slot) {
        counters_.dropped_backpressure.fetch_add(1, std::memory_order_relaxed);
        return EnqueueResult::rejected_backpressure;
    }
    std::memcpy(p.slab.bytes(*slot).data(), datagram.data(), datagram.size());
    p.slab.time(*slot) = d.time;
    p.slab.ctime(*slot) = *CompositeTime::try_from_epoch(d.time);
    bool pushed = p.queue.try_push(*slot);
    while (wait && !pushed) {
        std::this_thread::sleep_for(kIdleSleep);
        pushed = p.queue.try_push(*slot);
    }
    if (!pushed) {
        p.slab.release(*slot);
        counters_.dropped_backpressure.fetch_add(1, std::memory_order_relaxed);
        return EnqueueResult::rejected_backpressure;
    }
    return EnqueueResult::accepted;
}

void IngestService::receive_loop(int fd, std::size_t fixed_pipeline) {
    std::vector<std::array<std::byte, kRecvBufferSize>> buffers(kRecvBatch);
    std::array<iovec, kRecvBatch> iov{};
    std::array<mmsghdr, kRecvBatch> msgs{};
    std::array<sockaddr_in, kRecvBatch> addrs{};

    auto drain_once = [&]() -> int {
        for (std::size_t i = 0; i < kRecvBatch; ++i) {
            iov[i] = {buffers[i].data(), kRecvBufferSize};
            msgs[i].msg_hdr = {};
            msgs[i].msg_hdr.msg_iov = &iov[i];
            msgs[i].msg_hdr.msg_iovlen = 1;
            msgs[i].msg_hdr.msg_name = &addrs[i];
            msgs[i].msg_hdr.msg_namelen = sizeof(sockaddr_in);
        }
        const int n = ::recvmmsg(fd, msgs.data(), kRecvBatch, MSG_DONTWAIT, nullptr);
        for (int i = 0; i < n; ++i) {
            std::size_t len = msgs[i].msg_len;
            if (msgs[i].msg_hdr.msg_flags & MSG_TRUNC) len = kRecvBufferSize + 1; // forces malformed
            const std::span<const std::byte> dgram(buffers[i].data(), std::min(len, kRecvBufferSize));
            if (len > kRecvBufferSize) {
                counters_.received.fetch_add(1, std::memory_order_relaxed);
                counters_.malformed.fetch_add(1, std::memory_order_relaxed);
                continue;
            }
            admit(dgram, sender_id(addrs[i]), fixed_pipeline);
        }
        return n;
    };

    while (receiving_.load(std::memory_order_acquire)) {
        pollfd pfd{fd, POLLIN, 0};
        if (::poll(&pfd, 1, 20) <= 0) continue;
        while (drain_once() == static_cast<int>(kRecvBatch)) {
        }
    }
    // Whatever is already in the socket buffer still counts.
    while (drain_once() > 0) {
    }
}

void IngestService::ordering_loop(Pipeline& p) {
    OrderingState state(config_.ordering);
    std::optional<EpochMicros> latest;
    auto latest_wall = std::chrono::steady_clock::now();
    // Wall time only advances the clock while the queue is drained, so a
    // backlog built up while this thread was descheduled is never late.
    bool idle = false;
    auto idle_since = latest_wall;

    auto hand_off = [&](std::vector<QuantumBucket>&& buckets) {
        for (auto& b : buckets) {
            auto* heap = new QuantumBucket(std::move(b));
            while (!p.closed.try_push(heap)) std::this_thread::sleep_for(kIdleSleep);
        }
    };

    for (;;) {
        const bool stopping = !running_.load(std::memory_order_acquire);
        std::size_t n = 0;
        SlotId id;
        while ((stopping || n < kPopBurst) && p.queue.try_pop(id)) {
            const EpochMicros t = p.slab.time(id);
            if (state.route(SlotRef{t, id}) == RouteResult::delinquent) {
                p.slab.release(id);
                counters_.delinquent.fetch_add(1, std::memory_order_relaxed);
            }
            if (!latest || t > *latest) {
                latest = t;
                latest_wall = std::chrono::steady_clock::now();
            }
            ++n;
        }
        if (stopping) {
            hand_off(state.close_all());
            break;
        }
        if (n == kPopBurst) {
            idle = false;
        } else if (n > 0 || !idle) {
            idle = true;
            idle_since = std::chrono::steady_clock::now();
        }
        if (latest) {
            const EpochMicros waited = idle ? elapsed_micros(std::max(idle_since, latest_wall)) : 0;
            hand_off(state.expire(*latest + waited));
        }
        if (n == 0) std::this_thread::sleep_for(kIdleSleep);
    }
    p.ordering_done.store(true, std::memory_order_release);
}

void IngestService::sorter_loop(Pipeline& p) {
    for (;;) {
        QuantumBucket* b = nullptr;
        if (p.closed.try_pop(b)) {
            store_bucket(p, *b);
            delete b;
            continue;
        }
        if (p.ordering_done.load(std::memory_order_acquire)) {
            while (p.closed.try_pop(b)) {
                store_bucket(p, *b);
                delete b;
            }
            return;
        }
        std::this_thread::sleep_for(kIdleSleep);
    }
}

void IngestService::store_bucket(Pipeline& p, QuantumBucket& bucket) {
    insertion_sort(bucket.records);
    auto first_valid = bucket.records.begin();
    // Only reachable when the store already held newer data at startup.
    while (first_valid != bucket.records.end() && first_valid->time < p.last_stored) {
        p.slab.release(first_valid->slot);
        counters_.delinquent.fetch_add(1, std::memory_order_relaxed);
        ++first_valid;
    }
    const std::span<const SlotRef> records(first_valid, bucket.records.end());
    if (records.empty()) return;

    const std::uint64_t capacity = table_.partition(p.index).store().capacity();
    for (std::size_t done = 0; done < records.size();) {
        const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(records.size() - done, capacity));
        p.batch.clear();
        p.batch_ctimes.clear();
        for (std::size_t i = done; i < done + n; ++i) {
            p.batch.push_back(p.slab.bytes(records[i].slot));
            p.batch_ctimes.push_back(p.slab.ctime(records[i].slot));
        }
        try {
            table_.append_batch(p.index, p.batch, p.batch_ctimes);
            counters_.stored.fetch_add(n, std::memory_order_relaxed);
            p.last_stored = records[done + n - 1].time;
        } catch (const std::exception& e) {
            std::cerr << "ltss: pipeline " << p.index << ": append failed: " << e.what() << "\n";
            counters_.dropped_backpressure.fetch_add(n, std::memory_order_relaxed);
        }
        for (std::size_t i = done; i < done + n; ++i) p.slab.release(records[i].slot);
        done += n;
    }
}

IngestCounters IngestService::stop_and_flush() {
    if (!stopped_ && running_.load()) {
        receiving_.store(false, std::memory_order_release);
        for (auto& t : receivers_) t.join();
        receivers_.clear();
        running_.store(false, std::memory_order_release);
        for (auto& p : pipelines_) {
            p->ordering.join();
            p->sorter.join();
        }
        for (int fd : sockets_) ::close(fd);
        sockets_.clear();
    }
    stopped_ = true;
    return counters();
}

IngestCounters IngestService::counters() const noexcept {
    IngestCounters c;
    c.received = counters_.received.load(std::memory_order_relaxed);
    c.malformed = counters_.malformed.load(std::memory_order_relaxed);
    c.out_of_range = counters_.out_of_range.load(std::memory_order_relaxed);
    c.delinquent = counters_.delinquent.load(std::memory_order_relaxed);
    c.stored = counters_.stored.load(std::memory_order_relaxed);
    c.dropped_backpressure = counters_.dropped_backpressure.load(std::memory_order_relaxed);
    return c;
}

std::size_t IngestService::slab_free(std::size_t pipeline) const noexcept {
    return pipelines_[pipeline]->slab.free_count();
}

std::size_t IngestService::memory_bytes() const noexcept {
    std::size_t n = sizeof(*this);
    for (const auto& p : pipelines_) {
        n += p->slab.memory_bytes();
        n += p->queue.capacity() * 2 * sizeof(std::size_t);
        n += p->closed.capacity() * sizeof(QuantumBucket*);
    }
    return n;
}

} // namespace ltss
