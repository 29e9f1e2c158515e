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

#include "ltss/datasets.hpp"

#include "ltss/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

namespace ltss {

namespace {

constexpr EpochMicros kTaxiYearStart = 1'356'998'400'000'000ULL;   // 2013-01-01
constexpr EpochMicros kTaxiYearEnd = 1'388'534'400'000'000ULL;     // 2014-01-01
constexpr EpochMicros kEnergyStart = 1'342'742'400'000'000ULL;     // 2012-07-20
constexpr EpochMicros kEnergyEnd = 1'344'556'800'000'000ULL;       // 2012-08-10
constexpr std::string_view kKnownMedallion = "5CC9B3C9725FCD7FAE490B4C614D57EE";

std::string hex_string(std::mt19937_64& rng, std::size_t n) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string s(n, '0');
    for (char& c : s) c = kHex[rng() & 15];
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Sorted offsets in [0, span), one per record.
std::vector<EpochMicros> sorted_offsets(std::mt19937_64& rng, std::size_t n, EpochMicros span) {
    std::uniform_int_distribution<EpochMicros> dist(0, span - 1);
    std::vector<EpochMicros> out(n);
    for (auto& t : out) t = dist(rng);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::optional<EpochMicros> parse_time_text(std::string_view s) {
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
        EpochMicros v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && p == s.data() + s.size()) return v;
        return std::nullopt;
    }
    std::string iso(s);
    if (iso.size() > 10 && iso[10] == ' ') iso[10] = 'T';
    if (!iso.empty() && iso.back() != 'Z') iso += 'Z';
    return parse_iso8601_micros(iso);
}

Value parse_cell(const Field& f, const std::string& cell, std::size_t line) {
    auto bad = [&]() -> SchemaError {
        return SchemaError("line " + std::to_string(line) + ": bad value '" + cell + "' for field '" + f.name + "'");
    };
    switch (f.type.kind) {
    case FieldKind::ascii: return cell;
    case FieldKind::time: {
        auto t = parse_time_text(cell);
        if (!t) throw bad();
        return static_cast<std::int64_t>(*t);
    }
    case FieldKind::f32:
    case FieldKind::f64: {
        double d = 0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), d);
        if (ec != std::errc{} || p != cell.data() + cell.size()) throw bad();
        return d;
    }
    default: {
        std::int64_t i = 0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), i);
        if (ec != std::errc{} || p != cell.data() + cell.size()) throw bad();
        return i;
    }
    }
}

std::string format_cell(const Field& f, const Value& v) {
    if (f.type.kind == FieldKind::f32) {
        // Shortest text that reads back to the same float.
        std::array<char, 32> buf{};
        auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(as_double(v)));
        return std::string(buf.data(), end);
    }
    std::string s = to_display(v);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

} // namespace

Schema seismic_schema(SchemaOptions options) {
    return Schema("seismic",
                  {{"time", FieldType{FieldKind::time}},
                   {"value", FieldType{FieldKind::f32}},
                   {"lat", FieldType{FieldKind::f32}},
                   {"lon", FieldType{FieldKind::f32}},
                   {"depth", FieldType{FieldKind::f32}},
                   {"mag", FieldType{FieldKind::f32}}},
                  "time", std::move(options));
}

Schema taxi_schema(SchemaOptions options) {
    const FieldType f32{FieldKind::f32};
    return Schema("TAXI",
                  {{"medallion", FieldType::ascii(32)},
                   {"hack_license", FieldType::ascii(32)},
                   {"vendor_id", FieldType::ascii(3)},
                   {"rate_code", FieldType{FieldKind::u8}},
                   {"pickup_datetime", FieldType{FieldKind::time}},
                   {"dropoff_datetime", FieldType{FieldKind::time}},
                   {"passenger_count", FieldType{FieldKind::u8}},
                   {"trip_time_in_secs", FieldType{FieldKind::u32}},
                   {"trip_distance", f32},
                   {"pickup_longitude", f32},
                   {"pickup_latitude", f32},
                   {"dropoff_longitude", f32},
                   {"dropoff_latitude", f32},
                   {"payment_type", FieldType::ascii(3)},
                   {"fare_amount", f32},
                   {"surcharge", f32},
                   {"mta_tax", f32},
                   {"tip_amount", f32},
                   {"tolls_amount", f32}},
                  "pickup_datetime", std::move(options));
}

Schema energy_schema(SchemaOptions options) {
    const FieldType f64{FieldKind::f64};
    std::vector<Schema::FieldSpec> fields = {{"HOUSEID", FieldType::ascii(3)},
                                             {"DATETIME", FieldType{FieldKind::time}},
                                             {"V0", f64},
                                             {"I0", f64},
                                             {"PF0", f64},
                                             {"V1", f64},
                                             {"I1", f64},
                                             {"PF1", f64}};
    for (int i = 0; i < 15; ++i) fields.emplace_back("HF" + std::to_string(i), FieldType{FieldKind::f32});
    return Schema("POWER", std::move(fields), "DATETIME", std::move(options));
}

std::optional<Schema> builtin_schema(std::string_view name, SchemaOptions options) {
    const std::string n = lower(name);
    if (n == "seismic") return seismic_schema(std::move(options));
    if (n == "taxi") return taxi_schema(std::move(options));
    if (n == "energy" || n == "power") return energy_schema(std::move(options));
    return std::nullopt;
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
    const char* s = std::getenv("LTSS_SEED");
    if (!s || !*s) return fallback;
    std::uint64_t v = 0;
    const std::string_view text(s);
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    return ec == std::errc{} && p == text.data() + text.size() ? v : fallback;
}

// Dataset

EpochMicros Dataset::time(std::size_t i) const noexcept { return read_time(schema_, record(i)); }

void Dataset::push(std::span<const std::byte> record) {
    if (record.size() != schema_.record_size()) throw SchemaError("record size does not match schema");
    bytes_.insert(bytes_.end(), record.begin(), record.end());
}

void Dataset::push(std::span<const Value> values) {
    const std::size_t at = bytes_.size();
    bytes_.resize(at + schema_.record_size());
    try {
        encode_record_into(schema_, values, {bytes_.data() + at, schema_.record_size()});
    } catch (...) {
        bytes_.resize(at);
        throw;
    }
}

bool Dataset::sorted_by_time() const noexcept {
    for (std::size_t i = 1; i < size(); ++i) {
        if (time(i) < time(i - 1)) return false;
    }
    return true;
}

void Dataset::sort_by_time() {
    if (sorted_by_time()) return;
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return time(a) < time(b); });
    std::vector<std::byte> out;
    out.reserve(bytes_.size());
    for (std::size_t i : order) {
        auto r = record(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    bytes_ = std::move(out);
}

// Generators

Dataset generate_seismic(std::size_t count, std::uint64_t seed, SeismicOptions options) {
    Dataset d(seismic_schema());
    d.reserve(count);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::uniform_real_distribution<double> mag(0.5, 6.5);
    std::uniform_real_distribution<double> depth(1.0, 40.0);
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    // A handful of stations; each record comes from one of them.
    struct Station {
        float lat;
        float lon;
    };
    std::array<Station, 8> stations{};
    std::uniform_real_distribution<double> lat(32.0, 42.0);
    std::uniform_real_distribution<double> lon(-124.0, -114.0);
    for (auto& s : stations) s = {static_cast<float>(lat(rng)), static_cast<float>(lon(rng))};
    const double ph = phase(rng);
    std::array<Value, 6> v;
    for (std::size_t i = 0; i < count; ++i) {
        const EpochMicros t = options.start + i * options.interval;
        const Station& s = stations[rng() % stations.size()];
        v[0] = static_cast<std::int64_t>(t);
        v[1] = std::sin(ph + static_cast<double>(i) * 0.01) + noise(rng);
        v[2] = static_cast<double>(s.lat);
        v[3] = static_cast<double>(s.lon);
        v[4] = depth(rng);
        v[5] = mag(rng);
        d.push(v);
    }
    return d;
}

Dataset generate_taxi(std::size_t count, std::uint64_t seed) {
    Dataset d(taxi_schema());
    d.reserve(count);
    std::mt19937_64 rng(seed);
    std::vector<std::string> medallions;
    for (int i = 0; i < 200; ++i) medallions.push_back(hex_string(rng, 32));
    medallions.emplace_back(kKnownMedallion);
    std::vector<std::string> licenses;
    for (int i = 0; i < 400; ++i) licenses.push_back(hex_string(rng, 32));

    const auto offsets = sorted_offsets(rng, count, kTaxiYearEnd - kTaxiYearStart);
    std::uniform_int_distribution<std::uint32_t> trip_secs(60, 3600);
    std::discrete_distribution<int> passengers({0, 70, 12, 5, 3, 6, 4});
    std::uniform_real_distribution<double> speed(4.0, 25.0); // mph
    std::uniform_real_distribution<double> lon(-74.05, -73.75);
    std::uniform_real_distribution<double> lat(40.60, 40.88);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Value> v(d.schema().fields().size());
    for (std::size_t i = 0; i < count; ++i) {
        const EpochMicros pickup = kTaxiYearStart + offsets[i] / kMicrosPerSecond * kMicrosPerSecond;
        const std::uint32_t secs = trip_secs(rng);
        const double distance = std::round(secs / 3600.0 * speed(rng) * 100.0) / 100.0;
        const double fare = std::round((2.5 + distance * 2.5 + secs / 60.0 * 0.4) * 2.0) / 2.0;
        // About one trip in a hundred belongs to the known medallion.
        const std::string& med = unit(rng) < 0.01 ? medallions.back() : medallions[rng() % (medallions.size() - 1)];
        v[0] = med;
        v[1] = licenses[rng() % licenses.size()];
        v[2] = std::string(rng() % 2 ? "CMT" : "VTS");
        v[3] = std::int64_t{unit(rng) < 0.97 ? 1 : 2};
        v[4] = static_cast<std::int64_t>(pickup);
        v[5] = static_cast<std::int64_t>(pickup + std::uint64_t{secs} * kMicrosPerSecond);
        v[6] = std::int64_t{passengers(rng)};
        v[7] = std::int64_t{secs};
        v[8] = distance;
        v[9] = lon(rng);
        v[10] = lat(rng);
        v[11] = lon(rng);
        v[12] = lat(rng);
        v[13] = std::string(unit(rng) < 0.6 ? "CRD" : "CSH");
        v[14] = fare;
        v[15] = unit(rng) < 0.3 ? 0.5 : 0.0;
        v[16] = 0.5;
        v[17] = std::round(fare * 0.2 * unit(rng) * 100.0) / 100.0;
        v[18] = unit(rng) < 0.05 ? 5.33 : 0.0;
        d.push(v);
    }
    return d;
}

Dataset generate_energy(std::size_t count, std::uint64_t seed) {
    Dataset d(energy_schema());
    d.reserve(count);
    std::mt19937_64 rng(seed);
    static constexpr std::array<const char*, 4> kHouses = {"H1", "H2", "H3", "H4"};
    const auto offsets = sorted_offsets(rng, count, kEnergyEnd - kEnergyStart);
    std::normal_distribution<double> volts(121.0, 1.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::array<double, 4> house_scale{};
    for (auto& s : house_scale) s = 4.0 + 8.0 * unit(rng);

    std::vector<Value> v(d.schema().fields().size());
    for (std::size_t i = 0; i < count; ++i) {
        const EpochMicros t = kEnergyStart + offsets[i];
        const std::size_t h = rng() % kHouses.size();
        const double hour = static_cast<double>(t / (3600 * kMicrosPerSecond) % 24);
        // Load peaks in the evening.
        const double daily = 0.35 + 0.65 * std::exp(-std::pow((hour - 19.0) / 4.0, 2.0));
        v[0] = std::string(kHouses[h]);
        v[1] = static_cast<std::int64_t>(t);
        v[2] = volts(rng);
        v[3] = house_scale[h] * daily * (0.5 + unit(rng));
        v[4] = 0.6 + 0.4 * unit(rng);
        v[5] = volts(rng);
        v[6] = house_scale[h] * 0.5 * daily * (0.5 + unit(rng));
        v[7] = 0.6 + 0.4 * unit(rng);
        for (std::size_t k = 0; k < 15; ++k) v[8 + k] = unit(rng) * 1e-3;
        d.push(v);
    }
    return d;
}

Dataset generate_dataset(std::string_view name, std::size_t count, std::uint64_t seed) {
    const std::string n = lower(name);
    if (n == "seismic") return generate_seismic(count, seed);
    if (n == "taxi") return generate_taxi(count, seed);
    if (n == "energy" || n == "power") return generate_energy(count, seed);
    throw ConfigError("unknown dataset '" + std::string(name) + "' (expected seismic, taxi or energy)");
}

// CSV

Dataset read_dataset_csv(const Schema& schema, std::istream& in) {
    Dataset d(schema);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::size_t> column_field;
    const std::size_t nfields = schema.fields().size();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (column_field.empty()) {
            for (const auto& name : cells) {
                auto f = schema.find_ci(name);
                if (!f) throw SchemaError("line 1: unknown column '" + name + "' for schema " + schema.name());
                column_field.push_back(*f);
            }
            if (column_field.size() != nfields) {
                throw SchemaError("header names " + std::to_string(column_field.size()) + " columns, schema " +
                                  schema.name() + " has " + std::to_string(nfields));
            }
            continue;
        }
        if (cells.size() != nfields) {
            throw SchemaError("line " + std::to_string(lineno) + ": expected " + std::to_string(nfields) +
                              " columns, got " + std::to_string(cells.size()));
        }
        std::vector<Value> values(nfields);
        for (std::size_t c = 0; c < nfields; ++c) {
            const std::size_t f = column_field[c];
            values[f] = parse_cell(schema.fields()[f], cells[c], lineno);
        }
        d.push(values);
    }
    if (column_field.empty()) throw SchemaError("CSV has no header row");
    return d;
}

Dataset read_dataset_csv_file(const Schema& schema, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path, errno);
    return read_dataset_csv(schema, in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    const auto& fields = data.schema().fields();
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i].name;
    out << '\n';
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            out << (i ? "," : "") << format_cell(fields[i], read_field(data.schema(), data.record(r), i));
        }
        out << '\n';
    }
}

std::uint64_t load_into(Table& table, const Dataset& data, std::size_t batch_size) {
    if (!data.sorted_by_time()) throw ConfigError("load_into needs a dataset sorted by time");
    if (batch_size == 0) batch_size = 1;
    const std::size_t parts = table.partition_count();
    std::vector<std::vector<std::span<const std::byte>>> pending(parts);
    std::vector<std::vector<CompositeTime>> ctimes(parts);
    auto flush = [&](std::size_t p) {
        if (pending[p].empty()) return;
        table.append_batch(p, pending[p], ctimes[p]);
        pending[p].clear();
        ctimes[p].clear();
    };
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t p = i % parts;
        pending[p].push_back(data.record(i));
        ctimes[p].push_back(CompositeTime::from_epoch(data.time(i)));
        if (pending[p].size() >= batch_size) flush(p);
    }
    for (std::size_t p = 0; p < parts; ++p) flush(p);
    return data.size();
}

} // namespace ltss
