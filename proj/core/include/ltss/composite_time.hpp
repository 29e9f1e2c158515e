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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ltss {

/// Microseconds since 1970-01-01T00:00:00 UTC.
using EpochMicros = std::uint64_t;

inline constexpr EpochMicros kMicrosPerSecond = 1'000'000;
inline constexpr EpochMicros kMicrosPerDay = 86'400 * kMicrosPerSecond;

/// 2000-01-01T00:00:00.000000Z
inline constexpr EpochMicros kMinEpochMicros = 946'684'800'000'000ULL;
/// 2031-12-31T23:59:59.999999Z
inline constexpr EpochMicros kMaxEpochMicros = 1'956'527'999'999'999ULL;

inline constexpr bool in_composite_range(EpochMicros t) noexcept {
    return t >= kMinEpochMicros && t <= kMaxEpochMicros;
}

/// Calendar fields addressable in queries, most significant first (wday aside).
enum class CalendarField : std::uint8_t { year, month, day, wday, hour, min, sec, usec };

const char* to_string(CalendarField f) noexcept;
std::optional<CalendarField> calendar_field_from_string(std::string_view name) noexcept;

/// Unpacked calendar view. `year` is the offset from 2000, `month` 1-12,
/// `day` 1-31 and `wday` 0-6 with 0 = Sunday.
struct CalendarFields {
    unsigned year = 0;
    unsigned month = 1;
    unsigned day = 1;
    unsigned wday = 0;
    unsigned hour = 0;
    unsigned min = 0;
    unsigned sec = 0;
    unsigned usec = 0;
};

/// 8-byte bit-packed calendar timestamp with microsecond precision.
///
/// Bit layout of the 64-bit word, starting at bit 0:
///
///     usec:20 sec:6 min:6 hour:5 wday:3 day:5 month:4 year:5
///     timezone:5 pm:1 dls:1 reserved:3
///
/// The layout is part of the on-disk format. Values are always UTC, so
/// timezone and dls are stored as zero; pm is derived from the hour.
class CompositeTime {
public:
    constexpr CompositeTime() noexcept = default;

    /// Throws TimeError when `t` falls outside 2000-01-01..2031-12-31 UTC.
    static CompositeTime from_epoch(EpochMicros t);
    static std::optional<CompositeTime> try_from_epoch(EpochMicros t) noexcept;

    /// Accepts `YYYY-MM-DDTHH:MM:SS[.ffffff]Z`. Throws TimeError.
    static CompositeTime from_iso8601(std::string_view text);

    /// Packs fields without calendar validation; only bit widths are checked.
    /// Use to_epoch() to validate.
    static CompositeTime from_fields(const CalendarFields& fields);

    static constexpr CompositeTime from_bits(std::uint64_t bits) noexcept { return CompositeTime(bits); }

    /// Throws TimeError for inconsistent fields (e.g. Feb 30, wrong wday).
    EpochMicros to_epoch() const;

    constexpr unsigned extract(CalendarField f) const noexcept {
        switch (f) {
        case CalendarField::year: return field(kYearShift, 5);
        case CalendarField::month: return field(kMonthShift, 4);
        case CalendarField::day: return field(kDayShift, 5);
        case CalendarField::wday: return field(kWdayShift, 3);
        case CalendarField::hour: return field(kHourShift, 5);
        case CalendarField::min: return field(kMinShift, 6);
        case CalendarField::sec: return field(kSecShift, 6);
        case CalendarField::usec: return field(kUsecShift, 20);
        }
        return 0;
    }

    CalendarFields fields() const noexcept;

    constexpr unsigned timezone() const noexcept { return field(kTimezoneShift, 5); }
    constexpr bool pm() const noexcept { return field(kPmShift, 1) != 0; }
    constexpr bool dls() const noexcept { return field(kDlsShift, 1) != 0; }

    constexpr std::uint64_t bits() const noexcept { return bits_; }

    /// (year, month, day, hour, min, sec, usec) packed so that integer order
    /// equals chronological order.
    constexpr std::uint64_t order_key() const noexcept {
        return (std::uint64_t{extract(CalendarField::year)} << 46) |
               (std::uint64_t{extract(CalendarField::month)} << 42) |
               (std::uint64_t{extract(CalendarField::day)} << 37) |
               (std::uint64_t{extract(CalendarField::hour)} << 32) |
               (std::uint64_t{extract(CalendarField::min)} << 26) |
               (std::uint64_t{extract(CalendarField::sec)} << 20) |
               std::uint64_t{extract(CalendarField::usec)};
    }

    std::string to_iso8601() const;

    friend constexpr bool operator==(CompositeTime a, CompositeTime b) noexcept { return a.bits_ == b.bits_; }
    friend constexpr std::strong_ordering operator<=>(CompositeTime a, CompositeTime b) noexcept {
        return a.order_key() <=> b.order_key();
    }

    static constexpr unsigned kUsecShift = 0;
    static constexpr unsigned kSecShift = 20;
    static constexpr unsigned kMinShift = 26;
    static constexpr unsigned kHourShift = 32;
    static constexpr unsigned kWdayShift = 37;
    static constexpr unsigned kDayShift = 40;
    static constexpr unsigned kMonthShift = 45;
    static constexpr unsigned kYearShift = 49;
    static constexpr unsigned kTimezoneShift = 54;
    static constexpr unsigned kPmShift = 59;
    static constexpr unsigned kDlsShift = 60;
    static constexpr unsigned kReservedShift = 61;

private:
    constexpr explicit CompositeTime(std::uint64_t bits) noexcept : bits_(bits) {}

    constexpr unsigned field(unsigned shift, unsigned width) const noexcept {
        return static_cast<unsigned>((bits_ >> shift) & ((std::uint64_t{1} << width) - 1));
    }

    std::uint64_t bits_ = 0;
};

static_assert(sizeof(CompositeTime) == 8);

/// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t year, unsigned month, unsigned day) noexcept;

bool is_leap_year(std::int64_t year) noexcept;
unsigned days_in_month(std::int64_t year, unsigned month) noexcept;

/// Parses the ISO 8601 form accepted by CompositeTime::from_iso8601 into
/// epoch microseconds (no year-range check).
std::optional<EpochMicros> parse_iso8601_micros(std::string_view text) noexcept;

} // namespace ltss
