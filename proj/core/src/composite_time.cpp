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

#include <array>
#include <cstdio>

namespace ltss {

namespace {

struct Civil {
    std::int64_t year;
    unsigned month;
    unsigned day;
};

// Howard Hinnant's days <-> civil algorithms over 400-year eras.
Civil civil_from_days(std::int64_t z) noexcept {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

constexpr std::uint64_t pack(unsigned value, unsigned shift) noexcept {
    return std::uint64_t{value} << shift;
}

bool fits(unsigned value, unsigned width) noexcept { return value < (1u << width); }

} // namespace

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool is_leap_year(std::int64_t y) noexcept { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t y, unsigned m) noexcept {
    static constexpr std::array<unsigned, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12) return 0;
    return m == 2 && is_leap_year(y) ? 29 : kDays[m - 1];
}

const char* to_string(CalendarField f) noexcept {
    switch (f) {
    case CalendarField::year: return "year";
    case CalendarField::month: return "month";
    case CalendarField::day: return "day";
    case CalendarField::wday: return "wday";
    case CalendarField::hour: return "hour";
    case CalendarField::min: return "min";
    case CalendarField::sec: return "sec";
    case CalendarField::usec: return "usec";
    }
    return "?";
}

std::optional<CalendarField> calendar_field_from_string(std::string_view name) noexcept {
    static constexpr std::array<CalendarField, 8> kAll{
        CalendarField::year, CalendarField::month, CalendarField::day, CalendarField::wday,
        CalendarField::hour, CalendarField::min, CalendarField::sec, CalendarField::usec};
    for (auto f : kAll) {
        std::string_view candidate = to_string(f);
        if (candidate.size() != name.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < name.size(); ++i) {
            char c = name[i];
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            if (c != candidate[i]) {
                same = false;
                break;
            }
        }
        if (same) return f;
    }
    return std::nullopt;
}

std::optional<CompositeTime> CompositeTime::try_from_epoch(EpochMicros t) noexcept {
    if (!in_composite_range(t)) return std::nullopt;
    const auto days = static_cast<std::int64_t>(t / kMicrosPerDay);
    const EpochMicros in_day = t % kMicrosPerDay;
    const Civil c = civil_from_days(days);

    const auto usec = static_cast<unsigned>(in_day % kMicrosPerSecond);
    const auto secs_of_day = static_cast<unsigned>(in_day / kMicrosPerSecond);
    const unsigned hour = secs_of_day / 3600;
    const unsigned min = (secs_of_day / 60) % 60;
    const unsigned sec = secs_of_day % 60;
    // 1970-01-01 was a Thursday.
    const auto wday = static_cast<unsigned>((days + 4) % 7);

    return CompositeTime(pack(usec, kUsecShift) | pack(sec, kSecShift) | pack(min, kMinShift) |
                         pack(hour, kHourShift) | pack(wday, kWdayShift) | pack(c.day, kDayShift) |
                         pack(c.month, kMonthShift) |
                         pack(static_cast<unsigned>(c.year - 2000), kYearShift) |
                         pack(hour >= 12 ? 1u : 0u, kPmShift));
}

CompositeTime CompositeTime::from_epoch(EpochMicros t) {
    if (auto c = try_from_epoch(t)) return *c;
    throw TimeError("epoch " + std::to_string(t) + "us is outside the 2000-2031 composite time range");
}

CompositeTime CompositeTime::from_fields(const CalendarFields& f) {
    if (!fits(f.year, 5) || !fits(f.month, 4) || !fits(f.day, 5) || !fits(f.wday, 3) ||
        !fits(f.hour, 5) || !fits(f.min, 6) || !fits(f.sec, 6) || !fits(f.usec, 20)) {
        throw TimeError("calendar field exceeds its bit width");
    }
    return CompositeTime(pack(f.usec, kUsecShift) | pack(f.sec, kSecShift) | pack(f.min, kMinShift) |
                         pack(f.hour, kHourShift) | pack(f.wday, kWdayShift) | pack(f.day, kDayShift) |
                         pack(f.month, kMonthShift) | pack(f.year, kYearShift) |
                         pack(f.hour >= 12 ? 1u : 0u, kPmShift));
}

CalendarFields CompositeTime::fields() const noexcept {
    return CalendarFields{extract(CalendarField::year), extract(CalendarField::month),
                          extract(CalendarField::day),  extract(CalendarField::wday),
                          extract(CalendarField::hour), extract(CalendarField::min),
                          extract(CalendarField::sec),  extract(CalendarField::usec)};
}

EpochMicros CompositeTime::to_epoch() const {
    const CalendarFields f = fields();
    const std::int64_t year = 2000 + static_cast<std::int64_t>(f.year);
    if (f.month < 1 || f.month > 12) throw TimeError("month out of range: " + std::to_string(f.month));
    if (f.day < 1 || f.day > days_in_month(year, f.month)) {
        throw TimeError("day " + std::to_string(f.day) + " is not valid for " + std::to_string(year) + "-" +
                        std::to_string(f.month));
    }
    if (f.hour > 23 || f.min > 59 || f.sec > 59 || f.usec > 999'999) throw TimeError("time of day out of range");
    if (pm() != (f.hour >= 12)) throw TimeError("pm flag inconsistent with hour");
    const std::int64_t days = days_from_civil(year, f.month, f.day);
    if (static_cast<unsigned>((days + 4) % 7) != f.wday) throw TimeError("wday inconsistent with date");
    if (timezone() != 0 || dls()) throw TimeError("only UTC composite times are supported");
    return static_cast<EpochMicros>(days) * kMicrosPerDay +
           EpochMicros{f.hour} * 3600 * kMicrosPerSecond + EpochMicros{f.min} * 60 * kMicrosPerSecond +
           EpochMicros{f.sec} * kMicrosPerSecond + f.usec;
}

std::optional<EpochMicros> parse_iso8601_micros(std::string_view s) noexcept {
    auto digits = [&](std::size_t pos, std::size_t count, unsigned& out) {
        if (pos + count > s.size()) return false;
        unsigned v = 0;
        for (std::size_t i = pos; i < pos + count; ++i) {
            if (s[i] < '0' || s[i] > '9') return false;
            v = v * 10 + static_cast<unsigned>(s[i] - '0');
        }
        out = v;
        return true;
    };
    unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    if (s.size() < 20) return std::nullopt;
    if (!digits(0, 4, y) || s[4] != '-' || !digits(5, 2, mo) || s[7] != '-' || !digits(8, 2, d) ||
        s[10] != 'T' || !digits(11, 2, h) || s[13] != ':' || !digits(14, 2, mi) || s[16] != ':' ||
        !digits(17, 2, se)) {
        return std::nullopt;
    }
    std::size_t pos = 19;
    unsigned usec = 0;
    if (s[pos] == '.') {
        ++pos;
        std::size_t n = 0;
        while (pos + n < s.size() && s[pos + n] >= '0' && s[pos + n] <= '9') ++n;
        if (n == 0 || n > 6) return std::nullopt;
        digits(pos, n, usec);
        for (std::size_t k = n; k < 6; ++k) usec *= 10;
        pos += n;
    }
    if (pos + 1 != s.size() || s[pos] != 'Z') return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h > 23 || mi > 59 || se > 59) {
        return std::nullopt;
    }
    const std::int64_t days = days_from_civil(y, mo, d);
    if (days < 0) return std::nullopt;
    return static_cast<EpochMicros>(days) * kMicrosPerDay +
           (EpochMicros{h} * 3600 + EpochMicros{mi} * 60 + se) * kMicrosPerSecond + usec;
}

CompositeTime CompositeTime::from_iso8601(std::string_view text) {
    auto t = parse_iso8601_micros(text);
    if (!t) throw TimeError("cannot parse ISO 8601 time '" + std::string(text) + "'");
    return from_epoch(*t);
}

std::string CompositeTime::to_iso8601() const {
    const CalendarFields f = fields();
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%04u-%02u-%02uT%02u:%02u:%02u.%06uZ", 2000 + f.year, f.month, f.day,
                  f.hour, f.min, f.sec, f.usec);
    return buf.data();
}

} // namespace ltss
