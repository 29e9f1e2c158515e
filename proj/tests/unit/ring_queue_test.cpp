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
#include "ltss/ring_queue.hpp"
#include "ltss/slab.hpp"

#include <gtest/gtest.h>

#include <set>
#include <thread>
#include <vector>

namespace ltss {
namespace {

template <typename Q>
class RingTest : public ::testing::Test {};
using Rings = ::testing::Types<SpscRing<std::uint64_t>, MpmcRing<std::uint64_t>>;
TYPED_TEST_SUITE(RingTest, Rings);

TYPED_TEST(RingTest, PushPopOne) {
    TypeParam q(8);
    std::uint64_t v = 0;
    EXPECT_FALSE(q.try_pop(v));
    EXPECT_TRUE(q.try_push(42));
    EXPECT_TRUE(q.try_pop(v));
    EXPECT_EQ(v, 42u);
}

TYPED_TEST(RingTest, FullQueueRejects) {
    TypeParam q(16);
    for (std::uint64_t i = 0; i < 16; ++i) ASSERT_TRUE(q.try_push(i));
    EXPECT_FALSE(q.try_push(99));
    EXPECT_EQ(q.size_approx(), 16u);
}

TYPED_TEST(RingTest, FifoAcrossThreads) {
    TypeParam q(64);
    constexpr std::uint64_t n = 10'000;
    std::thread producer([&] {
        for (std::uint64_t i = 1; i <= n; ++i) {
            while (!q.try_push(i)) std::this_thread::yield();
        }
    });
    std::uint64_t expected = 1;
    while (expected <= n) {
        std::uint64_t v;
        if (q.try_pop(v)) {
            ASSERT_EQ(v, expected);
            ++expected;
        } else {
            std::this_thread::yield();
        }
    }
    producer.join();
}

TEST(Ring, CapacityMustBePowerOfTwo) {
    EXPECT_THROW(SpscRing<int>(100), ConfigError);
    EXPECT_THROW(MpmcRing<int>(3), ConfigError);
}

TEST(Ring, MpmcManyProducersConsumers) {
    MpmcRing<std::uint64_t> q(256);
    constexpr int producers = 3;
    constexpr std::uint64_t per = 5000;
    std::vector<std::thread> threads;
    std::vector<std::vector<std::uint64_t>> got(2);
    std::atomic<std::uint64_t> popped{0};
    for (int p = 0; p < producers; ++p) {
        threads.emplace_back([&, p] {
            for (std::uint64_t i = 0; i < per; ++i) {
                while (!q.try_push(p * per + i)) std::this_thread::yield();
            }
        });
    }
    for (int c = 0; c < 2; ++c) {
        threads.emplace_back([&, c] {
            while (popped.load() < producers * per) {
                std::uint64_t v;
                if (q.try_pop(v)) {
                    got[c].push_back(v);
                    popped.fetch_add(1);
                } else {
                    std::this_thread::yield();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    std::set<std::uint64_t> all;
    for (auto& g : got) {
        // Per-producer order is preserved within each consumer.
        std::vector<std::uint64_t> last(producers, 0);
        std::vector<bool> seen(producers, false);
        for (auto v : g) {
            const auto p = v / per;
            if (seen[p]) ASSERT_GT(v, last[p]);
            seen[p] = true;
            last[p] = v;
            all.insert(v);
        }
    }
    EXPECT_EQ(all.size(), producers * per);
}

TEST(Slab, AcquireReleaseExactlyOnce) {
    SlabAllocator slab(100, 28);
    std::vector<SlotId> ids;
    while (auto id = slab.acquire()) ids.push_back(*id);
    EXPECT_EQ(ids.size(), 100u);
    EXPECT_EQ(std::set<SlotId>(ids.begin(), ids.end()).size(), 100u);
    for (auto id : ids) slab.release(id);
    EXPECT_EQ(slab.free_count(), 100u);
}

} // namespace
} // namespace ltss
