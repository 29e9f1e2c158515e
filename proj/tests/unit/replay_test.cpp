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
#include "ltss/replay.hpp"
#include "ltss/schema.hpp"

#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>

namespace ltss {
namespace {

ReplaySpec ooo(OooMode mode, std::uint32_t ratio, std::uint64_t seed = 42) {
    ReplaySpec s;
    s.ooo = mode;
    s.ooo_ratio = ratio;
    s.seed = seed;
    return s;
}

TEST(Replay, FixedRatioDelaysEveryKth) {
    const auto d = delay_schedule(10'000, ooo(OooMode::fixed, 100));
    EXPECT_EQ(std::count(d.begin(), d.end(), 80'000), 100);
    EXPECT_EQ(std::count(d.begin(), d.end(), 0), 9900);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i] != 0, (i + 1) % 100 == 0) << i;
}

TEST(Replay, RandomDelaysWithinBoundsAndSeeded) {
    const auto a = delay_schedule(10'000, ooo(OooMode::random, 10, 5));
    const auto b = delay_schedule(10'000, ooo(OooMode::random, 10, 5));
    const auto c = delay_schedule(10'000, ooo(OooMode::random, 10, 6));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    std::size_t delayed = 0;
    for (EpochMicros x : a) {
        if (x == 0) continue;
        ++delayed;
        EXPECT_GE(x, 1000u);
        EXPECT_LE(x, 100'000u);
    }
    EXPECT_EQ(delayed, 1000u);
}

TEST(Replay, NoneDelaysNothing) {
    const auto d = delay_schedule(1000, ooo(OooMode::none, 10));
    EXPECT_TRUE(std::all_of(d.begin(), d.end(), [](EpochMicros x) { return x == 0; }));
}

TEST(Replay, NominalOffsets) {
    const Dataset data = generate_seismic(11, 1); // 10 ms apart
    ReplaySpec s;
    s.rate_mode = RateMode::fidelity;
    auto off = nominal_offsets(data, s);
    EXPECT_EQ(off.front(), 0u);
    EXPECT_EQ(off.back(), 100'000u);
    s.speedup = 2;
    EXPECT_EQ(nominal_offsets(data, s).back(), 50'000u);
    s.rate_mode = RateMode::fixed;
    s.rate = 1000;
    off = nominal_offsets(data, s);
    EXPECT_EQ(off[5], 5000u);
    s.rate_mode = RateMode::max;
    off = nominal_offsets(data, s);
    EXPECT_TRUE(std::all_of(off.begin(), off.end(), [](EpochMicros x) { return x == 0; }));
}

TEST(Replay, PlanEmissionsOrdersByEmitTime) {
    const Dataset data = generate_seismic(1000, 1);
    ReplaySpec s = ooo(OooMode::fixed, 10);
    s.rate_mode = RateMode::fixed;
    s.rate = 1000; // 1 ms apart, delayed ones overtaken by 80
    const auto plan = plan_emissions(data, s);
    ASSERT_EQ(plan.size(), 1000u);
    for (std::size_t i = 1; i < plan.size(); ++i) EXPECT_LE(plan[i - 1].emit, plan[i].emit);
    const auto it = std::find_if(plan.begin(), plan.end(), [](const Emission& e) { return e.index == 9; });
    ASSERT_NE(it, plan.end());
    EXPECT_EQ(it->emit, 9000u + 80'000u);
    // 0..88 minus the eight delayed ones (9, 19, ..., 79) go first
    EXPECT_EQ(std::distance(plan.begin(), it), 81);
}

TEST(Replay, ValidateRejects) {
    ReplaySpec s;
    s.rate_mode = RateMode::fixed;
    s.rate = 0;
    EXPECT_THROW(s.validate(), ConfigError);
    ReplaySpec r = ooo(OooMode::random, 10);
    r.random_lo_ms = 50;
    r.random_hi_ms = 10;
    EXPECT_THROW(r.validate(), ConfigError);
    ReplaySpec z;
    z.senders = 0;
    EXPECT_THROW(z.validate(), ConfigError);
}

class UdpSink {
public:
    UdpSink() {
        fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
        sockaddr_in a{};
        a.sin_family = AF_INET;
        a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        ::bind(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a);
        socklen_t len = sizeof a;
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&a), &len);
        port_ = ntohs(a.sin_port);
        const int buf = 8 << 20;
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
        timeval tv{0, 300'000};
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    }
    ~UdpSink() { ::close(fd_); }
    std::uint16_t port() const { return port_; }
    std::vector<std::vector<std::byte>> drain() {
        std::vector<std::vector<std::byte>> out;
        std::vector<std::byte> buf(2048);
        for (;;) {
            const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
            if (n < 0) break;
            out.emplace_back(buf.begin(), buf.begin() + n);
        }
        return out;
    }

private:
    int fd_;
    std::uint16_t port_;
};

TEST(Replay, FidelityPacing) {
    const Dataset data = sequenced_seismic(10, 1'577'836'800'000'000, 100'000); // 100 ms gaps
    UdpSink sink;
    ReplaySpec s;
    s.rate_mode = RateMode::fidelity;
    const auto t0 = std::chrono::steady_clock::now();
    const ReplayStats st = replay(data, s, "127.0.0.1", {sink.port()});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_EQ(st.sent, 10u);
    EXPECT_GE(secs, 0.88);
    EXPECT_LT(secs, 1.5);
    EXPECT_EQ(sink.drain().size(), 10u);
}

TEST(Replay, RestampUsesWallClock) {
    const Dataset data = sequenced_seismic(50, 1'577'836'800'000'000, 1000);
    UdpSink sink;
    ReplaySpec s;
    s.rate_mode = RateMode::fixed;
    s.rate = 1000;
    s.restamp = true;
    const EpochMicros before = wall_clock_micros();
    replay(data, s, "127.0.0.1", {sink.port()});
    const EpochMicros after = wall_clock_micros();
    const auto got = sink.drain();
    ASSERT_EQ(got.size(), 50u);
    for (const auto& rec : got) {
        const EpochMicros t = read_time(data.schema(), rec);
        EXPECT_GE(t, before);
        EXPECT_LE(t, after);
    }
}

TEST(Replay, DelayedRecordsArriveLate) {
    const Dataset data = sequenced_seismic(200, 1'577'836'800'000'000, 1000);
    UdpSink sink;
    ReplaySpec s = ooo(OooMode::fixed, 50);
    s.rate_mode = RateMode::fixed;
    s.rate = 2000;
    s.fixed_delay_ms = 20;
    const ReplayStats st = replay(data, s, "127.0.0.1", {sink.port()});
    EXPECT_EQ(st.delayed, 4u);
    const auto got = sink.drain();
    ASSERT_EQ(got.size(), 200u);
    std::size_t inversions = 0;
    for (std::size_t i = 1; i < got.size(); ++i) {
        inversions += read_time(data.schema(), got[i]) < read_time(data.schema(), got[i - 1]);
    }
    EXPECT_EQ(inversions, 3u); // the last record is delayed too but nothing follows it
}

TEST(Replay, MultipleSendersDeliverEverything) {
    const Dataset data = generate_seismic(3000, 3);
    UdpSink sink;
    ReplaySpec s;
    s.rate_mode = RateMode::fixed;
    s.rate = 30'000;
    s.senders = 3;
    const ReplayStats st = replay(data, s, "127.0.0.1", {sink.port()});
    EXPECT_EQ(st.sent, 3000u);
    EXPECT_EQ(sink.drain().size(), 3000u);
}

} // namespace
} // namespace ltss
