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

// Civil-calendar reference built on <chrono>, used to check CompositeTime.

#include <chrono>
#include <cstdint>

namespace ltss::testing {

struct OracleFields {
    int year = 0; // full year, e.g. 2013
    unsigned month = 0;
    unsigned day = 0;
    unsigned wday = 0; // 0 = Sunday
    unsigned hour = 0;
    unsigned min = 0;
    unsigned sec = 0;
    unsigned usec = 0;
};

inline OracleFields oracle_fields(std::int64_t epoch_us) {
    using namespace std::chrono;
    const sys_time<microseconds> tp{microseconds{epoch_us}};
    const sys_days day = floor<days>(tp);
    const year_month_day ymd{day};
    const hh_mm_ss hms{tp - day};
    OracleFields f;
    f.year = static_cast<int>(ymd.year());
    f.month = static_cast<unsigned>(ymd.month());
    f.day = static_cast<unsigned>(ymd.day());
    f.wday = weekday{day}.c_encoding();
    f.hour = static_cast<unsigned>(hms.hours().count());
    f.min = static_cast<unsigned>(hms.minutes().count());
    f.sec = static_cast<unsigned>(hms.seconds().count());
    f.usec = static_cast<unsigned>(hms.subseconds().count());
    return f;
}

inline std::int64_t oracle_epoch(int y, unsigned mo, unsigned d, unsigned h = 0, unsigned mi = 0, unsigned s = 0,
                                 unsigned us = 0) {
    using namespace std::chrono;
    const sys_days day{year{y} / month{mo} / std::chrono::day{d}};
    const auto tp = day + hours{h} + minutes{mi} + seconds{s} + microseconds{us};
    return duration_cast<microseconds>(tp.time_since_epoch()).count();
}

} // namespace ltss::testing
