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

#include "ltss/schema.hpp"

#include "ltss/bytes.hpp"
#include "ltss/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace ltss {

namespace {

bool iequals(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               auto lower = [](char c) { return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c; };
               return lower(x) == lower(y);
           });
}

bool valid_identifier(std::string_view s) noexcept {
    if (s.empty()) return false;
    auto ok_first = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    if (!ok_first(s[0])) return false;
    return std::all_of(s.begin() + 1, s.end(), [&](char c) { return ok_first(c) || (c >= '0' && c <= '9'); });
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
        throw SchemaError("invalid integer for " + std::string(what) + ": '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t integer_of(const Value& v, const Field& f) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto* d = std::get_if<double>(&v)) {
        if (std::trunc(*d) == *d) return static_cast<std::int64_t>(*d);
    }
    throw SchemaError("field '" + f.name + "' expects an integer value");
}

} // namespace

FieldType FieldType::parse(std::string_view text) {
    if (text == "u8") return {FieldKind::u8, 0};
    if (text == "u16") return {FieldKind::u16, 0};
    if (text == "u32") return {FieldKind::u32, 0};
    if (text == "u64") return {FieldKind::u64, 0};
    if (text == "i64") return {FieldKind::i64, 0};
    if (text == "f32") return {FieldKind::f32, 0};
    if (text == "f64") return {FieldKind::f64, 0};
    if (text == "time") return {FieldKind::time, 0};
    if (text.starts_with("ascii:")) {
        const auto n = parse_uint(text.substr(6), "ascii width");
        if (n < 1 || n > kMaxAsciiWidth) throw SchemaError("ascii width must be in 1..256, got " + std::to_string(n));
        return ascii(static_cast<std::uint16_t>(n));
    }
    throw SchemaError("unknown field type '" + std::string(text) + "'");
}

std::size_t FieldType::size() const noexcept {
    switch (kind) {
    case FieldKind::u8: return 1;
    case FieldKind::u16: return 2;
    case FieldKind::u32: return 4;
    case FieldKind::u64: return 8;
    case FieldKind::i64: return 8;
    case FieldKind::f32: return 4;
    case FieldKind::f64: return 8;
    case FieldKind::time: return 8;
    case FieldKind::ascii: return width;
    }
    return 0;
}

std::string FieldType::name() const {
    switch (kind) {
    case FieldKind::u8: return "u8";
    case FieldKind::u16: return "u16";
    case FieldKind::u32: return "u32";
    case FieldKind::u64: return "u64";
    case FieldKind::i64: return "i64";
    case FieldKind::f32: return "f32";
    case FieldKind::f64: return "f64";
    case FieldKind::time: return "time";
    case FieldKind::ascii: return "ascii:" + std::to_string(width);
    }
    return "?";
}

Schema::Schema(std::string name, std::vector<FieldSpec> fields, std::string_view primary_time,
               SchemaOptions options)
    : name_(std::move(name)), options_(std::move(options)) {
    if (!valid_identifier(name_)) throw SchemaError("invalid schema name '" + name_ + "'");
    if (fields.empty()) throw SchemaError("schema '" + name_ + "' has no fields");

    std::unordered_set<std::string> seen;
    std::size_t offset = 0;
    bool found_primary = false;
    for (auto& [fname, ftype] : fields) {
        if (!valid_identifier(fname)) throw SchemaError("invalid field name '" + fname + "'");
        std::string folded = fname;
        std::transform(folded.begin(), folded.end(), folded.begin(),
                       [](char c) { return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c; });
        if (!seen.insert(folded).second) throw SchemaError("duplicate field name '" + fname + "'");
        if (ftype.kind == FieldKind::ascii && (ftype.width < 1 || ftype.width > kMaxAsciiWidth)) {
            throw SchemaError("ascii width must be in 1..256 for field '" + fname + "'");
        }
        if (fname == primary_time) {
            if (ftype.kind != FieldKind::time) throw SchemaError("primary time field '" + fname + "' must have type time");
            time_index_ = fields_.size();
            found_primary = true;
        }
        fields_.push_back(Field{fname, ftype, offset});
        offset += ftype.size();
    }
    if (!found_primary) throw SchemaError("schema '" + name_ + "' needs exactly one primary time field");
    record_size_ = offset;
    if (record_size_ > kMaxRecordSize) {
        throw SchemaError("record size " + std::to_string(record_size_) + " exceeds " +
                          std::to_string(kMaxRecordSize) + " bytes");
    }
    if (options_.quantum_ms == 0) throw SchemaError("quantum_ms must be positive");
    if (options_.capacity_records == 0) throw SchemaError("capacity_records must be positive");
    if (options_.pipelines == 0) throw SchemaError("pipelines must be positive");
    if (options_.partition_key && !find(*options_.partition_key)) {
        throw SchemaError("partition_key names unknown field '" + *options_.partition_key + "'");
    }
}

std::optional<std::size_t> Schema::find(std::string_view field) const noexcept {
    for (std::size_t i = 0; i < fields_.size(); ++i) {
        if (fields_[i].name == field) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> Schema::find_ci(std::string_view field) const noexcept {
    for (std::size_t i = 0; i < fields_.size(); ++i) {
        if (iequals(fields_[i].name, field)) return i;
    }
    return std::nullopt;
}

std::uint64_t Schema::layout_hash() const noexcept {
    // FNV-1a over the canonical layout description.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::string_view s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    mix(name_);
    for (const auto& f : fields_) {
        mix(f.name);
        mix(f.type.name());
    }
    mix(time_field().name);
    return h;
}

std::string Schema::to_config() const {
    std::ostringstream out;
    out << "schema " << name_ << '\n';
    for (const auto& f : fields_) out << "field " << f.name << ' ' << f.type.name() << '\n';
    out << "primary_time " << time_field().name << '\n';
    out << "quantum_ms " << options_.quantum_ms << '\n';
    out << "capacity_records " << options_.capacity_records << '\n';
    out << "pipelines " << options_.pipelines << '\n';
    out << "linger_windows " << options_.linger_windows << '\n';
    out << "max_open " << options_.max_open << '\n';
    if (options_.partition_key) out << "partition_key " << *options_.partition_key << '\n';
    return out.str();
}

Schema parse_schema(std::string_view text) {
    std::optional<std::string> name;
    std::vector<Schema::FieldSpec> fields;
    std::optional<std::string> primary;
    SchemaOptions options;

    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream words(line);
        std::vector<std::string> tok;
        for (std::string w; words >> w;) tok.push_back(std::move(w));
        if (tok.empty()) continue;

        auto expect = [&](std::size_t n) {
            if (tok.size() != n) {
                throw SchemaError("line " + std::to_string(line_no) + ": '" + tok[0] + "' takes " +
                                  std::to_string(n - 1) + " argument(s)");
            }
        };
        const std::string& key = tok[0];
        if (key == "schema") {
            expect(2);
            if (name) throw SchemaError("line " + std::to_string(line_no) + ": duplicate schema directive");
            name = tok[1];
        } else if (key == "field") {
            expect(3);
            fields.emplace_back(tok[1], FieldType::parse(tok[2]));
        } else if (key == "primary_time") {
            expect(2);
            if (primary) throw SchemaError("multiple primary_time directives");
            primary = tok[1];
        } else if (key == "quantum_ms") {
            expect(2);
            options.quantum_ms = parse_uint(tok[1], key);
        } else if (key == "capacity_records") {
            expect(2);
            options.capacity_records = parse_uint(tok[1], key);
        } else if (key == "pipelines") {
            expect(2);
            options.pipelines = static_cast<std::uint32_t>(parse_uint(tok[1], key));
        } else if (key == "linger_windows") {
            expect(2);
            options.linger_windows = static_cast<std::uint32_t>(parse_uint(tok[1], key));
        } else if (key == "max_open") {
            expect(2);
            options.max_open = static_cast<std::uint32_t>(parse_uint(tok[1], key));
        } else if (key == "partition_key") {
            expect(2);
            options.partition_key = tok[1];
        } else {
            throw SchemaError("line " + std::to_string(line_no) + ": unknown directive '" + key + "'");
        }
    }
    if (!name) throw SchemaError("missing 'schema <name>' directive");
    if (!primary) throw SchemaError("schema '" + *name + "' needs exactly one primary time field");
    return Schema(*name, std::move(fields), *primary, std::move(options));
}

Schema load_schema_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open schema config '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_schema(text.str());
}

Value read_field(const Schema& schema, std::span<const std::byte> record, std::size_t field_index) {
    const Field& f = schema.fields()[field_index];
    const std::byte* p = record.data() + f.offset;
    switch (f.type.kind) {
    case FieldKind::u8: return std::int64_t{load_le<std::uint8_t>(p)};
    case FieldKind::u16: return std::int64_t{load_le<std::uint16_t>(p)};
    case FieldKind::u32: return std::int64_t{load_le<std::uint32_t>(p)};
    case FieldKind::u64: return static_cast<std::int64_t>(load_le<std::uint64_t>(p));
    case FieldKind::i64: return load_le<std::int64_t>(p);
    case FieldKind::f32: return static_cast<double>(load_le<float>(p));
    case FieldKind::f64: return load_le<double>(p);
    case FieldKind::time: return static_cast<std::int64_t>(load_le<std::uint64_t>(p));
    case FieldKind::ascii: {
        const auto* chars = reinterpret_cast<const char*>(p);
        std::size_t n = f.type.width;
        while (n > 0 && chars[n - 1] == '\0') --n;
        return std::string(chars, n);
    }
    }
    return {};
}

Value read_field(const Schema& schema, std::span<const std::byte> record, std::string_view field) {
    auto idx = schema.find(field);
    if (!idx) throw SchemaError("unknown field '" + std::string(field) + "' in schema '" + schema.name() + "'");
    return read_field(schema, record, *idx);
}

EpochMicros read_time(const Schema& schema, std::span<const std::byte> record) noexcept {
    return load_le<std::uint64_t>(record.data() + schema.time_field().offset);
}

Value RecordView::get(std::size_t field_index) const { return read_field(*schema_, bytes_, field_index); }

EpochMicros RecordView::time() const noexcept { return read_time(*schema_, bytes_); }

DecodedRecord decode_record(const Schema& schema, std::span<const std::byte> datagram) noexcept {
    DecodedRecord out;
    if (datagram.size() != schema.record_size()) {
        out.status = DecodeStatus::malformed;
        return out;
    }
    out.time = read_time(schema, datagram);
    if (!in_composite_range(out.time)) {
        out.status = DecodeStatus::out_of_range;
        return out;
    }
    out.status = DecodeStatus::ok;
    out.record = RecordView(schema, datagram);
    return out;
}

void encode_record_into(const Schema& schema, std::span<const Value> values, std::span<std::byte> out) {
    if (values.size() != schema.fields().size()) {
        throw SchemaError("expected " + std::to_string(schema.fields().size()) + " values, got " +
                          std::to_string(values.size()));
    }
    if (out.size() != schema.record_size()) throw SchemaError("output buffer does not match record size");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Field& f = schema.fields()[i];
        std::byte* p = out.data() + f.offset;
        const Value& v = values[i];
        switch (f.type.kind) {
        case FieldKind::u8: store_le(p, static_cast<std::uint8_t>(integer_of(v, f))); break;
        case FieldKind::u16: store_le(p, static_cast<std::uint16_t>(integer_of(v, f))); break;
        case FieldKind::u32: store_le(p, static_cast<std::uint32_t>(integer_of(v, f))); break;
        case FieldKind::u64: store_le(p, static_cast<std::uint64_t>(integer_of(v, f))); break;
        case FieldKind::i64: store_le(p, integer_of(v, f)); break;
        case FieldKind::time: store_le(p, static_cast<std::uint64_t>(integer_of(v, f))); break;
        case FieldKind::f32:
            if (!is_numeric(v)) throw SchemaError("field '" + f.name + "' expects a number");
            store_le(p, static_cast<float>(as_double(v)));
            break;
        case FieldKind::f64:
            if (!is_numeric(v)) throw SchemaError("field '" + f.name + "' expects a number");
            store_le(p, as_double(v));
            break;
        case FieldKind::ascii: {
            auto* s = std::get_if<std::string>(&v);
            if (!s) throw SchemaError("field '" + f.name + "' expects text");
            if (s->size() > f.type.width) {
                throw SchemaError("text for field '" + f.name + "' exceeds width " + std::to_string(f.type.width));
            }
            std::memset(p, 0, f.type.width);
            std::memcpy(p, s->data(), s->size());
            break;
        }
        }
    }
}

std::vector<std::byte> encode_record(const Schema& schema, std::span<const Value> values) {
    std::vector<std::byte> out(schema.record_size());
    encode_record_into(schema, values, out);
    return out;
}

} // namespace ltss
