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
#include "ltss/error.hpp"

#include "calendar_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ltss {
namespace {

using testing::oracle_epoch;
using testing::oracle_fields;

constexpr EpochMicros kY2K = 946'684'800'000'000;

TEST(CompositeTime, Y2kFields) {
    const CompositeTime c = CompositeTime::from_epoch(kY2K);
    const CalendarFields f = c.fields();
    EXPECT_EQ(f.year, 0u);
    EXPECT_EQ(f.month, 1u);
    EXPECT_EQ(f.day, 1u);
    EXPECT_EQ(f.wday, oracle_fields(kY2K).wday);
    EXPECT_EQ(f.wday, 6u); // Saturday
    EXPECT_EQ(f.hour, 0u);
    EXPECT_EQ(f.usec, 0u);
    EXPECT_FALSE(c.pm());
    EXPECT_EQ(c.timezone(), 0u);
    EXPECT_FALSE(c.dls());
    EXPECT_EQ(CompositeTime::from_epoch(kY2K + 1).extract(CalendarField::usec), 1u);
    EXPECT_EQ(c.to_epoch(), oracle_epoch(2000, 1, 1));
}

TEST(CompositeTime, LastRepresentableMicrosecond) {
    const EpochMicros t = oracle_epoch(2031, 12, 31, 23, 59, 59, 999'999);
    const CompositeTime c = CompositeTime::from_epoch(t);
    const CalendarFields f = c.fields();
    EXPECT_EQ(f.year, 31u);
    EXPECT_EQ(f.month, 12u);
    EXPECT_EQ(f.day, 31u);
    EXPECT_EQ(f.hour, 23u);
    EXPECT_EQ(f.min, 59u);
    EXPECT_EQ(f.sec, 59u);
    EXPECT_EQ(f.usec, 999'999u);
    EXPECT_EQ(f.wday, oracle_fields(t).wday);
    EXPECT_TRUE(c.pm());
    EXPECT_EQ(c.to_epoch(), t);
    EXPECT_THROW(CompositeTime::from_epoch(t + 1), TimeError);
    EXPECT_THROW(CompositeTime::from_epoch(kY2K - 1), TimeError);
    EXPECT_FALSE(CompositeTime::try_from_epoch(t + 1).has_value());
}

TEST(CompositeTime, BitLayout) {
    // 2013-11-25T13:14:15.000016Z is a Monday.
    const CompositeTime c = CompositeTime::from_iso8601("2013-11-25T13:14:15.000016Z");
    const std::uint64_t expected = (std::uint64_t{16} << 0) | (std::uint64_t{15} << 20) | (std::uint64_t{14} << 26) |
                                   (std::uint64_t{13} << 32) | (std::uint64_t{1} << 37) | (std::uint64_t{25} << 40) |
                                   (std::uint64_t{11} << 45) | (std::uint64_t{13} << 49) | (std::uint64_t{1} << 59);
    EXPECT_EQ(c.bits(), expected);
    EXPECT_EQ(sizeof(CompositeTime), 8u);
}

TEST(CompositeTime, Iso8601) {
    const CompositeTime c = CompositeTime::from_iso8601("2012-07-30T09:35:00Z");
    EXPECT_EQ(c.extract(CalendarField::year), 12u);
    EXPECT_EQ(c.extract(CalendarField::month), 7u);
    EXPECT_EQ(c.extract(CalendarField::day), 30u);
    EXPECT_EQ(c.extract(CalendarField::hour), 9u);
    EXPECT_EQ(c.extract(CalendarField::min), 35u);
    EXPECT_EQ(CompositeTime::from_iso8601("2000-01-01T00:00:00.000001Z").extract(CalendarField::usec), 1u);
    EXPECT_THROW(CompositeTime::from_iso8601("1999-12-31T23:59:59Z"), TimeError);
    EXPECT_THROW(CompositeTime::from_iso8601("2012-07-30 09:35:00"), TimeError);
    EXPECT_THROW(CompositeTime::from_iso8601("2012-13-01T00:00:00Z"), TimeError);
    EXPECT_EQ(c.to_iso8601(), "2012-07-30T09:35:00.000000Z");
}

TEST(CompositeTime, QueryFieldConventions) {
    const CompositeTime nov25 = CompositeTime::from_iso8601("2013-11-25T00:00:00Z");
    EXPECT_EQ(nov25.extract(CalendarField::year), 13u);
    EXPECT_EQ(nov25.extract(CalendarField::month), 11u);
    EXPECT_EQ(CompositeTime::from_iso8601("2013-11-24T12:00:00Z").extract(CalendarField::wday), 0u);
}

TEST(CompositeTime, InvalidFieldsRejected) {
    CalendarFields f;
    f.year = 12;
    f.month = 2;
    f.day = 30;
    EXPECT_THROW(CompositeTime::from_fields(f).to_epoch(), TimeError);
    f.day = 29; // 2012 is a leap year
    f.wday = 3;
    const auto t = CompositeTime::from_fields(f).to_epoch();
    EXPECT_EQ(t, oracle_epoch(2012, 2, 29));
    f.year = 13;
    EXPECT_THROW(CompositeTime::from_fields(f).to_epoch(), TimeError);
    f.year = 12;
    f.wday = 4; // wrong weekday
    EXPECT_THROW(CompositeTime::from_fields(f).to_epoch(), TimeError);
    f.month = 16; // wider than the field
    EXPECT_THROW(CompositeTime::from_fields(f), TimeError);
}

TEST(CompositeTime, RandomAgainstOracle) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<EpochMicros> d(kY2K, oracle_epoch(2031, 12, 31, 23, 59, 59, 999'999));
    for (int i = 0; i < 100'000; ++i) {
        const EpochMicros t = d(rng);
        const CompositeTime c = CompositeTime::from_epoch(t);
        const auto o = oracle_fields(t);
        const CalendarFields f = c.fields();
        ASSERT_EQ(f.year + 2000, static_cast<unsigned>(o.year)) << t;
        ASSERT_EQ(f.month, o.month) << t;
        ASSERT_EQ(f.day, o.day) << t;
        ASSERT_EQ(f.wday, o.wday) << t;
        ASSERT_EQ(f.hour, o.hour) << t;
        ASSERT_EQ(f.min, o.min) << t;
        ASSERT_EQ(f.sec, o.sec) << t;
        ASSERT_EQ(f.usec, o.usec) << t;
        ASSERT_EQ(c.pm(), o.hour >= 12);
        ASSERT_EQ(c.to_epoch(), t);
    }
}

TEST(CompositeTime, OrderMatchesEpochOrder) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<EpochMicros> d(kY2K, oracle_epoch(2031, 12, 31));
    for (int i = 0; i < 100'000; ++i) {
        const EpochMicros a = d(rng);
        // Half the pairs are close together to exercise the low fields.
        const EpochMicros b = (i % 2) ? d(rng) : a + static_cast<EpochMicros>(rng() % 3'000'000);
        const auto ca = CompositeTime::from_epoch(a);
        const auto cb = CompositeTime::from_epoch(b);
        ASSERT_EQ(a < b, ca < cb);
        ASSERT_EQ(a == b, ca == cb);
    }
}

TEST(CompositeTime, CivilHelpers) {
    EXPECT_EQ(days_from_civil(1970, 1, 1), 0);
    EXPECT_EQ(days_from_civil(2000, 3, 1) * 86'400'000'000LL, oracle_epoch(2000, 3, 1));
    EXPECT_TRUE(is_leap_year(2000));
    EXPECT_FALSE(is_leap_year(2100));
    EXPECT_EQ(days_in_month(2024, 2), 29u);
    EXPECT_EQ(parse_iso8601_micros("2000-01-01T00:00:00Z"), std::optional<EpochMicros>(kY2K));
    EXPECT_FALSE(parse_iso8601_micros("not a time").has_value());
}

} // namespace
} // namespace ltss
