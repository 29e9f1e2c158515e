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

#include "ltss/error.hpp"
#include "ltss/time_ordering.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace ltss {
namespace {

constexpr EpochMicros q = 100'000;

TEST(BucketStart, Floor) {
    EXPECT_EQ(bucket_start(946'684'800'123'456, q), 946'684'800'100'000);
    EXPECT_EQ(bucket_start(946'684'800'100'000, q), 946'684'800'100'000);
    EXPECT_EQ(bucket_start(12345, 1), 12345);
}

TEST(Ordering, RouteCreatesBucketsOnDemand) {
    OrderingState s({q, 2, 16});
    EXPECT_EQ(s.route({150'000, 1}), RouteResult::placed);
    EXPECT_EQ(s.route({160'000, 2}), RouteResult::placed);
    EXPECT_EQ(s.open_buckets(), 1u);
    EXPECT_EQ(s.route({20'000, 3}), RouteResult::placed);
    EXPECT_EQ(s.open_buckets(), 2u);
    EXPECT_EQ(s.pending_records(), 3u);
}

TEST(Ordering, ExpireClosesInOrderAndAdvancesWatermark) {
    OrderingState s({q, 1, 16});
    s.route({0, 0});
    s.route({q, 1});
    s.route({2 * q, 2});
    const auto closed = s.expire(2 * q + q); // end + linger*q <= now
    ASSERT_EQ(closed.size(), 2u);
    EXPECT_EQ(closed[0].start, 0);
    EXPECT_EQ(closed[1].start, q);
    EXPECT_TRUE(closed[0].closed);
    EXPECT_EQ(s.watermark(), 2 * q);
    EXPECT_EQ(s.open_buckets(), 1u);
    // A record for a closed window is delinquent.
    EXPECT_EQ(s.route({q + 5, 3}), RouteResult::delinquent);
    EXPECT_EQ(s.delinquent_count(), 1u);
    // The newest bucket stays open while now is within its window.
    EXPECT_TRUE(s.expire(2 * q + 50).empty());
}

TEST(Ordering, WatermarkIsMonotone) {
    OrderingState s({q, 2, 4});
    std::mt19937_64 rng(1);
    EpochMicros last = 0;
    EpochMicros now = 0;
    for (int i = 0; i < 20'000; ++i) {
        now += static_cast<EpochMicros>(rng() % 20'000);
        s.route({now - static_cast<EpochMicros>(rng() % 400'000), static_cast<SlotId>(i)});
        s.expire(now);
        ASSERT_GE(s.watermark(), last);
        last = s.watermark();
    }
}

TEST(Ordering, MaxOpenForcesEarlyClose) {
    OrderingState s({q, 2, 3});
    for (int i = 0; i < 5; ++i) s.route({i * q, static_cast<SlotId>(i)});
    EXPECT_EQ(s.open_buckets(), 3u);
    const auto closed = s.expire(0);
    ASSERT_EQ(closed.size(), 2u);
    EXPECT_EQ(closed[0].start, 0);
    EXPECT_EQ(s.route({10, 9}), RouteResult::delinquent);
}

TEST(InsertionSort, SortsStably) {
    std::vector<SlotRef> v = {{3, 0}, {1, 1}, {2, 2}, {4, 3}, {1, 4}};
    insertion_sort(v);
    std::vector<EpochMicros> times;
    for (auto& r : v) times.push_back(r.time);
    EXPECT_EQ(times, (std::vector<EpochMicros>{1, 1, 2, 3, 4}));
    EXPECT_EQ(v[0].slot, 1u);
    EXPECT_EQ(v[1].slot, 4u);
}

TEST(InsertionSort, LinearOnSortedInput) {
    std::vector<SlotRef> v(10'000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = {static_cast<EpochMicros>(i), static_cast<SlotId>(i)};
    EXPECT_EQ(insertion_sort(v), v.size() - 1);
}

// Shuffles with displacement below quantum x linger never produce a
// delinquent and always come out sorted.
TEST(Ordering, AbsorbsBoundedDisplacement) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        constexpr int n = 10'000;
        const std::uint32_t linger = 1 + trial % 3;
        std::vector<std::pair<EpochMicros, EpochMicros>> emit; // (emit, time)
        for (int i = 0; i < n; ++i) {
            const EpochMicros t = 1'000'000 + i * 1000;
            const EpochMicros d = (rng() % 3 == 0) ? static_cast<EpochMicros>(rng() % (q * linger)) : 0;
            emit.push_back({t + d, t});
        }
        std::stable_sort(emit.begin(), emit.end(), [](auto& a, auto& b) { return a.first < b.first; });
        OrderingState s({q, linger, 64});
        std::vector<EpochMicros> log;
        auto sink = [&](std::span<const SlotRef> batch) {
            for (auto& r : batch) log.push_back(r.time);
        };
        EpochMicros latest = 0;
        for (auto& [e, t] : emit) {
            ASSERT_EQ(s.route({t, 0}), RouteResult::placed);
            latest = std::max(latest, t);
            for (auto& b : s.expire(latest)) sort_and_store(b, sink);
        }
        for (auto& b : s.close_all()) sort_and_store(b, sink);
        ASSERT_EQ(log.size(), static_cast<std::size_t>(n));
        ASSERT_TRUE(std::is_sorted(log.begin(), log.end()));
    }
}

TEST(Ordering, RejectsBadConfig) {
    EXPECT_THROW(OrderingState({0, 2, 16}), ConfigError);
    EXPECT_THROW(OrderingState({q, 2, 0}), ConfigError);
}

} // namespace
} // namespace ltss
