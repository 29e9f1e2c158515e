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

#include "reference.hpp"

#include "calendar_oracle.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ltss::testing {

namespace {

// Raw little-endian field decode by byte offset.
template <typename T>
T load(std::span<const std::byte> rec, std::size_t offset) {
    T v;
    std::memcpy(&v, rec.data() + offset, sizeof v);
    return v;
}

std::string load_text(std::span<const std::byte> rec, std::size_t offset, std::size_t width) {
    std::string s(reinterpret_cast<const char*>(rec.data() + offset), width);
    s.erase(s.find_last_not_of('\0') + 1);
    return s;
}

std::size_t offset_of(const Dataset& data, const std::string& field) {
    for (const Field& f : data.schema().fields()) {
        if (f.name == field) return f.offset;
    }
    throw std::invalid_argument("no field " + field);
}

struct TaxiRow {
    std::string medallion;
    std::int64_t passenger_count = 0;
    std::int64_t trip_time = 0;
    double trip_distance = 0;
    OracleFields pickup;
};

struct PowerRow {
    std::string house;
    std::int64_t timestamp = 0;
    double v0 = 0;
    double i0 = 0;
    OracleFields at;
    double power() const { return v0 * i0; }
};

std::vector<TaxiRow> decode_taxi(const Dataset& data) {
    const auto med = offset_of(data, "medallion");
    const auto pc = offset_of(data, "passenger_count");
    const auto tt = offset_of(data, "trip_time_in_secs");
    const auto td = offset_of(data, "trip_distance");
    const auto pu = offset_of(data, "pickup_datetime");
    std::vector<TaxiRow> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = data.record(i);
        TaxiRow t;
        t.medallion = load_text(r, med, 32);
        t.passenger_count = load<std::uint8_t>(r, pc);
        t.trip_time = load<std::uint32_t>(r, tt);
        t.trip_distance = load<float>(r, td);
        t.pickup = oracle_fields(static_cast<std::int64_t>(load<std::uint64_t>(r, pu)));
        rows.push_back(std::move(t));
    }
    return rows;
}

std::vector<PowerRow> decode_power(const Dataset& data) {
    const auto house = offset_of(data, "HOUSEID");
    const auto dt = offset_of(data, "DATETIME");
    const auto v0 = offset_of(data, "V0");
    const auto i0 = offset_of(data, "I0");
    std::vector<PowerRow> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = data.record(i);
        PowerRow p;
        p.house = load_text(r, house, 3);
        p.timestamp = static_cast<std::int64_t>(load<std::uint64_t>(r, dt));
        p.v0 = load<double>(r, v0);
        p.i0 = load<double>(r, i0);
        p.at = oracle_fields(p.timestamp);
        rows.push_back(std::move(p));
    }
    return rows;
}

// Aggregate helpers mirroring SQL semantics: empty input yields NULL.
struct Avg {
    double sum = 0;
    std::int64_t n = 0;
    void add(double v) {
        sum += v;
        ++n;
    }
    Value result() const { return n ? Value{sum / static_cast<double>(n)} : Value{}; }
};

template <typename T>
struct Max {
    std::optional<T> v;
    void add(T x) {
        if (!v || x > *v) v = x;
    }
    Value result() const { return v ? Value{*v} : Value{}; }
};

template <typename T>
struct Min {
    std::optional<T> v;
    void add(T x) {
        if (!v || x < *v) v = x;
    }
    Value result() const { return v ? Value{*v} : Value{}; }
};

Value i64(std::int64_t v) { return Value{v}; }

ResultSet one_row(std::vector<std::string> columns, std::vector<Value> row) {
    ResultSet rs;
    rs.columns = std::move(columns);
    rs.rows.push_back(std::move(row));
    return rs;
}

bool weekday(const OracleFields& f) { return f.wday > 0 && f.wday < 6; }

} // namespace

ResultSet reference_taxi(const std::string& id, const Dataset& data) {
    const auto rows = decode_taxi(data);
    if (id == "Q1") {
        std::int64_t n = 0;
        for (const auto& r : rows) n += r.pickup.hour >= 20;
        return one_row({"count"}, {i64(n)});
    }
    if (id == "Q2") {
        std::int64_t n = 0;
        for (const auto& r : rows) n += weekday(r.pickup) && r.pickup.month == 11 && r.pickup.year == 2013;
        return one_row({"count"}, {i64(n)});
    }
    if (id == "Q3") {
        Avg a;
        for (const auto& r : rows) {
            if (r.pickup.month >= 6 && r.pickup.month <= 10 && weekday(r.pickup)) a.add(static_cast<double>(r.trip_time));
        }
        return one_row({"avg"}, {a.result()});
    }
    if (id == "Q4") {
        Min<std::int64_t> lo;
        Max<std::int64_t> hi;
        for (const auto& r : rows) {
            if (r.pickup.year == 2013 && r.pickup.month == 11 && r.pickup.day == 25) {
                lo.add(r.trip_time);
                hi.add(r.trip_time);
            }
        }
        return one_row({"min", "max"}, {lo.result(), hi.result()});
    }
    if (id == "Q5") {
        double sum = 0;
        bool any = false;
        for (const auto& r : rows) {
            if (r.pickup.hour >= 9 && r.pickup.hour < 12 && r.medallion == "5CC9B3C9725FCD7FAE490B4C614D57EE") {
                sum += r.trip_distance;
                any = true;
            }
        }
        return one_row({"sum"}, {any ? Value{sum} : Value{}});
    }
    if (id == "Q6") {
        std::int64_t sum = 0;
        bool any = false;
        for (const auto& r : rows) {
            if (r.pickup.wday == 0 || r.pickup.wday == 6) {
                sum += r.passenger_count;
                any = true;
            }
        }
        return one_row({"sum"}, {any ? Value{sum} : Value{}});
    }
    if (id == "Q7") {
        std::map<unsigned, std::int64_t> by_wday;
        for (const auto& r : rows) by_wday[r.pickup.wday] += r.passenger_count;
        ResultSet rs;
        rs.columns = {"CTIME_pickup_wday", "sum"};
        for (const auto& [w, s] : by_wday) rs.rows.push_back({i64(w), i64(s)});
        return rs;
    }
    throw std::invalid_argument("unknown taxi query " + id);
}

ResultSet reference_energy(const std::string& id, const Dataset& data) {
    const auto rows = decode_power(data);
    if (id == "Q1") {
        std::map<unsigned, Avg> by_hour;
        for (const auto& r : rows) {
            if (r.house == "H1") by_hour[r.at.hour].add(r.power());
        }
        ResultSet rs;
        rs.columns = {"CTIME_hour", "avg"};
        for (const auto& [h, a] : by_hour) rs.rows.push_back({i64(h), a.result()});
        return rs;
    }
    if (id == "Q2") {
        std::map<std::string, Max<double>> by_house;
        for (const auto& r : rows) {
            if (r.at.hour > 8 && r.at.hour < 20) by_house[r.house].add(r.power());
        }
        ResultSet rs;
        rs.columns = {"HOUSEID", "max"};
        for (const auto& [h, m] : by_house) rs.rows.push_back({Value{h}, m.result()});
        return rs;
    }
    if (id == "Q3") {
        // hourlies: average power per (house, hour), ordered by that average
        // descending.
        std::map<std::pair<std::string, unsigned>, Avg> groups;
        for (const auto& r : rows) groups[{r.house, r.at.hour}].add(r.power());
        struct Hourly {
            std::string house;
            unsigned hour;
            double power;
        };
        std::vector<Hourly> hourlies;
        for (const auto& [k, a] : groups) hourlies.push_back({k.first, k.second, std::get<double>(a.result())});
        std::stable_sort(hourlies.begin(), hourlies.end(),
                         [](const Hourly& a, const Hourly& b) { return a.power > b.power; });
        std::set<std::string> houses;
        for (const auto& r : rows) houses.insert(r.house);
        // Per house, the hour reported is the one holding the maximum.
        std::map<std::string, const Hourly*> best;
        for (const auto& h : hourlies) {
            if (!houses.count(h.house)) continue;
            auto [it, inserted] = best.emplace(h.house, &h);
            if (!inserted && h.power > it->second->power) it->second = &h;
        }
        ResultSet rs;
        rs.columns = {"HOUSEID", "HOUR", "max"};
        for (const auto& [house, h] : best) rs.rows.push_back({Value{house}, i64(h->hour), Value{h->power}});
        return rs;
    }
    if (id == "Q4") {
        std::map<std::int64_t, Avg> by_bucket;
        for (const auto& r : rows) {
            if (r.house == "H1") by_bucket[r.timestamp / 300'000'000].add(r.power());
        }
        ResultSet rs;
        rs.columns = {"HOUSEID", "avg", "(TIMESTAMP / 300000000)"};
        for (auto it = by_bucket.rbegin(); it != by_bucket.rend() && rs.rows.size() < 10; ++it) {
            rs.rows.push_back({Value{std::string("H1")}, it->second.result(), i64(it->first)});
        }
        return rs;
    }
    if (id == "Q5") {
        std::int64_t n = 0;
        for (const auto& r : rows) {
            n += r.at.year == 2012 && r.at.month == 7 && r.at.day == 30 && r.at.hour == 9 && r.at.min >= 35 &&
                 r.at.min < 39;
        }
        return one_row({"count"}, {i64(n)});
    }
    if (id == "Q6") {
        std::map<std::pair<std::string, unsigned>, Max<double>> weekday_max;
        for (const auto& r : rows) weekday_max[{r.house, r.at.wday}].add(r.power());
        std::map<std::string, Avg> by_house;
        for (const auto& [k, m] : weekday_max) by_house[k.first].add(std::get<double>(m.result()));
        ResultSet rs;
        rs.columns = {"houseid", "avg"};
        for (const auto& [h, a] : by_house) rs.rows.push_back({Value{h}, a.result()});
        return rs;
    }
    if (id == "Q7") {
        std::int64_t n = 0;
        for (const auto& r : rows) n += r.at.wday == 3 && r.at.hour >= 17 && r.at.hour <= 20;
        return one_row({"count"}, {i64(n)});
    }
    throw std::invalid_argument("unknown energy query " + id);
}

std::vector<std::vector<Value>> canonical_rows(std::vector<std::vector<Value>> rows) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](const Value& x, const Value& y) { return compare_values(x, y) < 0; });
    });
    return rows;
}

std::string diff_results(const ResultSet& expected, const ResultSet& actual, bool ordered) {
    const auto e = ordered ? expected.rows : canonical_rows(expected.rows);
    const auto a = ordered ? actual.rows : canonical_rows(actual.rows);
    std::ostringstream os;
    if (e.size() != a.size()) {
        os << "row count " << a.size() << ", expected " << e.size();
        return os.str();
    }
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i].size() != a[i].size()) {
            os << "row " << i << ": " << a[i].size() << " columns, expected " << e[i].size();
            return os.str();
        }
        for (std::size_t c = 0; c < e[i].size(); ++c) {
            if (e[i][c] != a[i][c]) {
                os << "row " << i << " column " << c << ": got " << to_display(a[i][c]) << " (type "
                   << a[i][c].index() << "), expected " << to_display(e[i][c]) << " (type " << e[i][c].index()
                   << ")";
                return os.str();
            }
        }
    }
    return {};
}

} // namespace ltss::testing
