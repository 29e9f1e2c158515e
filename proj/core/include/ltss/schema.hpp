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

#include "ltss/composite_time.hpp"
#include "ltss/value.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ltss {

inline constexpr std::size_t kMaxRecordSize = 512;
inline constexpr std::size_t kMaxAsciiWidth = 256;

enum class FieldKind : std::uint8_t { u8, u16, u32, u64, i64, f32, f64, time, ascii };

struct FieldType {
    FieldKind kind = FieldKind::u8;
    std::uint16_t width = 0; ///< Only meaningful for ascii.

    static FieldType parse(std::string_view text);
    static FieldType ascii(std::uint16_t n) { return {FieldKind::ascii, n}; }

    std::size_t size() const noexcept;
    std::string name() const;

    friend bool operator==(const FieldType&, const FieldType&) = default;
};

struct Field {
    std::string name;
    FieldType type;
    std::size_t offset = 0;
};

/// Settings carried by the schema config for the other pipeline stages.
struct SchemaOptions {
    std::uint64_t quantum_ms = 100;
    std::uint64_t capacity_records = 1'000'000;
    std::uint32_t pipelines = 1;
    std::uint32_t linger_windows = 2;
    std::uint32_t max_open = 16;
    std::optional<std::string> partition_key;
};

/// Immutable description of a fixed-size record.
class Schema {
public:
    using FieldSpec = std::pair<std::string, FieldType>;

    /// Throws SchemaError on duplicate names, a missing or non-time primary
    /// field, ascii widths outside 1..256 or a record larger than 512 bytes.
    Schema(std::string name, std::vector<FieldSpec> fields, std::string_view primary_time,
           SchemaOptions options = {});

    const std::string& name() const noexcept { return name_; }
    const std::vector<Field>& fields() const noexcept { return fields_; }
    std::size_t record_size() const noexcept { return record_size_; }
    std::size_t time_index() const noexcept { return time_index_; }
    const Field& time_field() const noexcept { return fields_[time_index_]; }
    const SchemaOptions& options() const noexcept { return options_; }

    /// Exact-name lookup.
    std::optional<std::size_t> find(std::string_view field) const noexcept;
    /// Case-insensitive lookup, as used by SQL identifiers.
    std::optional<std::size_t> find_ci(std::string_view field) const noexcept;

    /// Stable hash of the record layout (names, types, order, primary time).
    std::uint64_t layout_hash() const noexcept;

    /// Canonical config text; parse_schema(to_config()) reproduces the schema.
    std::string to_config() const;

private:
    std::string name_;
    std::vector<Field> fields_;
    std::size_t time_index_ = 0;
    std::size_t record_size_ = 0;
    SchemaOptions options_;
};

/// Parses the line-oriented schema config document.
Schema parse_schema(std::string_view text);
Schema load_schema_file(const std::string& path);

enum class DecodeStatus : std::uint8_t { ok, malformed, out_of_range };

/// Non-owning view of one record's bytes.
class RecordView {
public:
    RecordView() = default;
    RecordView(const Schema& schema, std::span<const std::byte> bytes) noexcept
        : schema_(&schema), bytes_(bytes) {}

    const Schema& schema() const noexcept { return *schema_; }
    std::span<const std::byte> bytes() const noexcept { return bytes_; }

    Value get(std::size_t field_index) const;
    EpochMicros time() const noexcept;

private:
    const Schema* schema_ = nullptr;
    std::span<const std::byte> bytes_;
};

struct DecodedRecord {
    DecodeStatus status = DecodeStatus::malformed;
    RecordView record;
    EpochMicros time = 0;
};

/// Validates a datagram as one wire-format record: exact length and a
/// primary time within the composite-time range.
DecodedRecord decode_record(const Schema& schema, std::span<const std::byte> datagram) noexcept;

/// Encodes one value per field in schema order. Integer fields accept
/// integer values, float fields accept any numeric value, time fields
/// accept epoch microseconds, ascii fields accept text up to their width.
std::vector<std::byte> encode_record(const Schema& schema, std::span<const Value> values);
void encode_record_into(const Schema& schema, std::span<const Value> values, std::span<std::byte> out);

/// Throws SchemaError for an unknown field name. Ascii values are returned
/// with trailing NUL bytes stripped.
Value read_field(const Schema& schema, std::span<const std::byte> record, std::string_view field);
Value read_field(const Schema& schema, std::span<const std::byte> record, std::size_t field_index);

EpochMicros read_time(const Schema& schema, std::span<const std::byte> record) noexcept;

} // namespace ltss
