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

#include "ltss/replay.hpp"

#include "ltss/bytes.hpp"
#include "ltss/error.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <queue>
#include <random>
#include <thread>

namespace ltss {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kSendBatch = 64;

EpochMicros micros_since(Clock::time_point start) noexcept {
    return static_cast<EpochMicros>(
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
}

class UdpSender {
public:
    UdpSender(const std::string& host, const std::vector<std::uint16_t>& ports) {
        fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd_ < 0) throw IoError("socket", errno);
        const int sndbuf = 8 << 20;
        ::setsockopt(fd_, SOL_SOCKET, SO_SNDBUF, &sndbuf, sizeof sndbuf);
        in_addr addr{};
        if (::inet_pton(AF_INET, host.c_str(), &addr) != 1) {
            ::close(fd_);
            throw ConfigError("bad IPv4 address '" + host + "'");
        }
        for (std::uint16_t port : ports) {
            sockaddr_in sa{};
            sa.sin_family = AF_INET;
            sa.sin_port = htons(port);
            sa.sin_addr = addr;
            targets_.push_back(sa);
        }
        if (targets_.empty()) {
            ::close(fd_);
            throw ConfigError("replay needs at least one target port");
        }
    }
    ~UdpSender() {
        if (fd_ >= 0) ::close(fd_);
    }
    UdpSender(const UdpSender&) = delete;
    UdpSender& operator=(const UdpSender&) = delete;

    void add(std::span<const std::byte> payload, std::size_t route) {
        Pending p;
        p.bytes.assign(payload.begin(), payload.end());
        p.target = route % targets_.size();
        pending_.push_back(std::move(p));
        if (pending_.size() >= kSendBatch) flush();
    }

    void flush() {
        std::size_t done = 0;
        while (done < pending_.size()) {
            const std::size_t n = std::min(pending_.size() - done, kSendBatch);
            mmsghdr msgs[kSendBatch]{};
            iovec iov[kSendBatch]{};
            for (std::size_t i = 0; i < n; ++i) {
                Pending& p = pending_[done + i];
                iov[i].iov_base = p.bytes.data();
                iov[i].iov_len = p.bytes.size();
                msgs[i].msg_hdr.msg_iov = &iov[i];
                msgs[i].msg_hdr.msg_iovlen = 1;
                msgs[i].msg_hdr.msg_name = &targets_[p.target];
                msgs[i].msg_hdr.msg_namelen = sizeof(sockaddr_in);
            }
            const int rc = ::sendmmsg(fd_, msgs, static_cast<unsigned>(n), 0);
            if (rc < 0) {
                if (errno == EINTR) continue;
                if (errno == ENOBUFS || errno == EAGAIN) {
                    std::this_thread::sleep_for(std::chrono::microseconds(100));
                    continue;
                }
                ++errors_;
                ++done; // skip the datagram that failed
                continue;
            }
            sent_ += static_cast<std::uint64_t>(rc);
            done += static_cast<std::size_t>(rc);
        }
        pending_.clear();
    }

    std::uint64_t sent() const noexcept { return sent_; }
    std::uint64_t errors() const noexcept { return errors_; }

private:
    struct Pending {
        std::vector<std::byte> bytes;
        std::size_t target = 0;
    };
    int fd_ = -1;
    std::vector<sockaddr_in> targets_;
    std::vector<Pending> pending_;
    std::uint64_t sent_ = 0;
    std::uint64_t errors_ = 0;
};

struct Held {
    EpochMicros release;
    std::size_t index;
    std::vector<std::byte> bytes;
    bool operator>(const Held& o) const noexcept {
        return release != o.release ? release > o.release : index > o.index;
    }
};

} // namespace

void ReplaySpec::validate() const {
    if (rate_mode == RateMode::fixed && !(rate > 0)) throw ConfigError("fixed-rate replay needs a positive rate");
    if (rate_mode == RateMode::fidelity && !(speedup > 0)) throw ConfigError("fidelity speedup must be positive");
    if (ooo != OooMode::none && ooo_ratio == 0) throw ConfigError("out-of-order mode needs a ratio (one in K)");
    if (ooo == OooMode::fixed && fixed_delay_ms < 0) throw ConfigError("delay must be non-negative");
    if (ooo == OooMode::random && !(random_lo_ms >= 0 && random_lo_ms <= random_hi_ms)) {
        throw ConfigError("random delay bounds must satisfy 0 <= lo <= hi");
    }
    if (senders == 0) throw ConfigError("at least one sender thread is required");
}

EpochMicros wall_clock_micros() noexcept {
    return static_cast<EpochMicros>(std::chrono::duration_cast<std::chrono::microseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

std::vector<EpochMicros> delay_schedule(std::size_t count, const ReplaySpec& spec) {
    std::vector<EpochMicros> delays(count, 0);
    if (spec.ooo == OooMode::none || spec.ooo_ratio == 0) return delays;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> dist(spec.random_lo_ms, spec.random_hi_ms);
    for (std::size_t i = spec.ooo_ratio - 1; i < count; i += spec.ooo_ratio) {
        const double ms = spec.ooo == OooMode::fixed ? spec.fixed_delay_ms : dist(rng);
        delays[i] = static_cast<EpochMicros>(std::llround(ms * 1000.0));
    }
    return delays;
}

std::vector<EpochMicros> nominal_offsets(const Dataset& data, const ReplaySpec& spec) {
    std::vector<EpochMicros> out(data.size(), 0);
    switch (spec.rate_mode) {
    case RateMode::max: break;
    case RateMode::fixed:
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = static_cast<EpochMicros>(static_cast<double>(i) * 1e6 / spec.rate);
        }
        break;
    case RateMode::fidelity: {
        if (data.empty()) break;
        const EpochMicros first = data.time(0);
        EpochMicros prev = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const EpochMicros t = data.time(i);
            const EpochMicros gap = t > first ? t - first : 0;
            // Source times that step backwards send immediately.
            prev = std::max(prev, static_cast<EpochMicros>(static_cast<double>(gap) / spec.speedup));
            out[i] = prev;
        }
        break;
    }
    }
    return out;
}

std::vector<Emission> plan_emissions(const Dataset& data, const ReplaySpec& spec) {
    spec.validate();
    const auto nominal = nominal_offsets(data, spec);
    const auto delays = delay_schedule(data.size(), spec);
    std::vector<Emission> out(data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {i, nominal[i], nominal[i] + delays[i]};
    std::stable_sort(out.begin(), out.end(), [](const Emission& a, const Emission& b) { return a.emit < b.emit; });
    return out;
}

ReplayStats replay(const Dataset& data, const ReplaySpec& spec, const std::string& host,
                   const std::vector<std::uint16_t>& ports, const std::atomic<bool>* stop) {
    spec.validate();
    const auto nominal = nominal_offsets(data, spec);
    const auto delays = delay_schedule(data.size(), spec);
    const Schema& schema = data.schema();
    const std::size_t time_offset = schema.time_field().offset;
    const std::uint32_t senders = std::min<std::uint32_t>(spec.senders, std::max<std::size_t>(data.size(), 1));

    std::vector<ReplayStats> per(senders);
    const Clock::time_point start = Clock::now();
    const EpochMicros wall_start = wall_clock_micros();

    auto run = [&](std::uint32_t t) {
        UdpSender out(host, ports);
        std::priority_queue<Held, std::vector<Held>, std::greater<>> held;
        std::vector<std::byte> scratch(schema.record_size());
        std::size_t next = t;
        ReplayStats& st = per[t];
        while (next < data.size() || !held.empty()) {
            if (stop && stop->load(std::memory_order_relaxed)) break;
            const EpochMicros now = micros_since(start);
            bool progressed = false;
            while (next < data.size() && nominal[next] <= now) {
                auto rec = data.record(next);
                std::copy(rec.begin(), rec.end(), scratch.begin());
                if (spec.restamp) store_le<std::uint64_t>(scratch.data() + time_offset, wall_start + now);
                if (delays[next] > 0) {
                    held.push(Held{now + delays[next], next, scratch});
                    ++st.delayed;
                } else {
                    out.add(scratch, next);
                }
                next += senders;
                progressed = true;
                if (spec.rate_mode == RateMode::max && (next / senders) % kSendBatch == 0) break;
            }
            while (!held.empty() && held.top().release <= now) {
                out.add(held.top().bytes, held.top().index);
                held.pop();
                progressed = true;
            }
            out.flush();
            if (progressed) continue;
            EpochMicros wake = ~EpochMicros{0};
            if (next < data.size()) wake = nominal[next];
            if (!held.empty()) wake = std::min(wake, held.top().release);
            const EpochMicros now2 = micros_since(start);
            if (wake > now2 + 100) {
                std::this_thread::sleep_for(std::chrono::microseconds(std::min<EpochMicros>(wake - now2 - 50, 10'000)));
            } else {
                std::this_thread::yield();
            }
        }
        out.flush();
        st.sent = out.sent();
        st.send_errors = out.errors();
    };

    if (senders == 1) {
        run(0);
    } else {
        std::vector<std::thread> threads;
        for (std::uint32_t t = 0; t < senders; ++t) threads.emplace_back(run, t);
        for (auto& th : threads) th.join();
    }

    ReplayStats total;
    for (const auto& s : per) {
        total.sent += s.sent;
        total.send_errors += s.send_errors;
        total.delayed += s.delayed;
    }
    total.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return total;
}

} // namespace ltss
