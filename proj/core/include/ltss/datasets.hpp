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

#include "ltss/partition.hpp"
#include "ltss/schema.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltss {

/// Seismic: 28-byte records (time, value, lat, lon, depth, mag).
Schema seismic_schema(SchemaOptions options = {});
/// Taxi: 132-byte trip records keyed on pickup_datetime, table TAXI.
Schema taxi_schema(SchemaOptions options = {});
/// Energy: 119-byte household power samples keyed on DATETIME, table POWER.
Schema energy_schema(SchemaOptions options = {});

/// "seismic", "taxi" or "energy" (case-insensitive).
std::optional<Schema> builtin_schema(std::string_view name, SchemaOptions options = {});

/// Seed from LTSS_SEED, or `fallback` when unset or unparsable.
std::uint64_t seed_from_env(std::uint64_t fallback = 42);

/// Packed records of one schema, in insertion order.
class Dataset {
public:
    explicit Dataset(Schema schema) : schema_(std::move(schema)) {}

    const Schema& schema() const noexcept { return schema_; }
    std::size_t size() const noexcept { return bytes_.size() / schema_.record_size(); }
    bool empty() const noexcept { return bytes_.empty(); }
    std::span<const std::byte> record(std::size_t i) const noexcept {
        return {bytes_.data() + i * schema_.record_size(), schema_.record_size()};
    }
    std::span<std::byte> record(std::size_t i) noexcept {
        return {bytes_.data() + i * schema_.record_size(), schema_.record_size()};
    }
    EpochMicros time(std::size_t i) const noexcept;
    std::span<const std::byte> bytes() const noexcept { return bytes_; }

    void reserve(std::size_t n) { bytes_.reserve(n * schema_.record_size()); }
    void push(std::span<const std::byte> record);
    void push(std::span<const Value> values);
    /// Stable sort by primary time.
    void sort_by_time();
    bool sorted_by_time() const noexcept;

private:
    Schema schema_;
    std::vector<std::byte> bytes_;
};

struct SeismicOptions {
    EpochMicros start = 1'577'836'800'000'000ULL; // 2020-01-01T00:00:00Z
    EpochMicros interval = 10'000;                // 100 Hz
};

Dataset generate_seismic(std::size_t count, std::uint64_t seed, SeismicOptions options = {});
/// Trips during 2013 sorted by pickup time, drawn from a fixed medallion
/// pool that includes 5CC9B3C9725FCD7FAE490B4C614D57EE.
Dataset generate_taxi(std::size_t count, std::uint64_t seed);
/// Samples from houses H1..H4 between 2012-07-20 and 2012-08-10.
Dataset generate_energy(std::size_t count, std::uint64_t seed);
/// Dispatch on a builtin schema name. Throws ConfigError for unknown names.
Dataset generate_dataset(std::string_view name, std::size_t count, std::uint64_t seed);

/// CSV with a header naming schema fields in schema order. Time fields are
/// epoch microseconds or ISO-8601 (`YYYY-MM-DD[T ]HH:MM:SS[.ffffff][Z]`).
/// Throws SchemaError with the line number on malformed input.
Dataset read_dataset_csv(const Schema& schema, std::istream& in);
Dataset read_dataset_csv_file(const Schema& schema, const std::string& path);
/// Writes times as epoch microseconds.
void write_dataset_csv(std::ostream& out, const Dataset& data);

/// Appends the dataset straight into the table, bypassing UDP and
/// ordering. Records go to partitions round robin in time order. The
/// dataset must be sorted by time. Returns the number appended.
std::uint64_t load_into(Table& table, const Dataset& data, std::size_t batch_size = 4096);

} // namespace ltss
