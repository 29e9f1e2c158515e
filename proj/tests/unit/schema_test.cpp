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
#include "ltss/schema.hpp"

#include "calendar_oracle.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <random>

namespace ltss {
namespace {

TEST(Schema, BuiltinRecordSizes) {
    EXPECT_EQ(seismic_schema().record_size(), 28u);
    EXPECT_EQ(taxi_schema().record_size(), 132u);
    EXPECT_EQ(energy_schema().record_size(), 119u);
    EXPECT_EQ(taxi_schema().time_field().name, "pickup_datetime");
    EXPECT_EQ(energy_schema().name(), "POWER");
}

TEST(Schema, ParseConfig) {
    const Schema s = parse_schema(R"(# seismic sensor
schema quake
field time time
field value f32
field lat f32
field lon f32
field depth f32
field mag f32
primary_time time
quantum_ms 50
capacity_records 1000
pipelines 2
)");
    EXPECT_EQ(s.name(), "quake");
    EXPECT_EQ(s.record_size(), 28u);
    EXPECT_EQ(s.options().quantum_ms, 50u);
    EXPECT_EQ(s.options().capacity_records, 1000u);
    EXPECT_EQ(s.options().pipelines, 2u);
    EXPECT_EQ(s.fields()[1].offset, 8u);
    const Schema again = parse_schema(s.to_config());
    EXPECT_EQ(again.layout_hash(), s.layout_hash());
    EXPECT_EQ(again.options().quantum_ms, 50u);
}

TEST(Schema, Rejections) {
    EXPECT_THROW(parse_schema("schema a\nfield t time\nfield t u8\nprimary_time t\n"), SchemaError);
    EXPECT_THROW(parse_schema("schema a\nfield t time\nfield u time\nprimary_time t\nprimary_time u\n"), SchemaError);
    EXPECT_THROW(parse_schema("schema a\nfield t time\n"), SchemaError);
    EXPECT_THROW(parse_schema("schema a\nfield t time\nfield x u8\nprimary_time x\n"), SchemaError);
    EXPECT_THROW(parse_schema("schema a\nfield t time\nfield s ascii:257\nprimary_time t\n"), SchemaError);
    EXPECT_THROW(parse_schema("schema a\nfield t time\nfield s ascii:0\nprimary_time t\n"), SchemaError);
    EXPECT_THROW(parse_schema("schema a\nfield t time\nfield s ascii:256\nfield r ascii:256\nprimary_time t\n"),
                 SchemaError);
    EXPECT_THROW(parse_schema("schema a\nfield t time\nfield x f16\nprimary_time t\n"), SchemaError);
}

TEST(Schema, LayoutHashDependsOnOrder) {
    const Schema a("t", {{"t", FieldType::parse("time")}, {"x", FieldType::parse("u8")}, {"y", FieldType::parse("u16")}},
                   "t");
    const Schema b("t", {{"t", FieldType::parse("time")}, {"y", FieldType::parse("u16")}, {"x", FieldType::parse("u8")}},
                   "t");
    EXPECT_EQ(a.record_size(), b.record_size());
    EXPECT_NE(a.layout_hash(), b.layout_hash());
}

TEST(Records, DecodeLengthAndRange) {
    const Schema s = seismic_schema();
    std::vector<Value> v = {Value{std::int64_t{1'577'836'800'000'000}}, Value{1.5}, Value{2.0}, Value{3.0},
                            Value{4.0}, Value{5.5}};
    auto bytes = encode_record(s, v);
    ASSERT_EQ(bytes.size(), 28u);
    EXPECT_EQ(decode_record(s, bytes).status, DecodeStatus::ok);
    EXPECT_EQ(read_field(s, bytes, "mag"), Value{5.5});
    EXPECT_EQ(decode_record(s, std::span(bytes).first(27)).status, DecodeStatus::malformed);
    v[0] = std::int64_t{testing::oracle_epoch(1999, 12, 31, 23)};
    EXPECT_EQ(decode_record(s, encode_record(s, v)).status, DecodeStatus::out_of_range);
    EXPECT_THROW(read_field(s, bytes, "nonexistent"), SchemaError);
}

TEST(Records, AsciiStripsNuls) {
    const Schema s = taxi_schema();
    std::vector<std::byte> rec(s.record_size());
    const auto off = s.fields()[*s.find("medallion")].offset;
    std::memcpy(rec.data() + off, "ABC", 3);
    EXPECT_EQ(read_field(s, rec, "medallion"), Value{std::string("ABC")});
}

TEST(Records, RoundTripRandomValues) {
    const Schema s("all",
                   {{"t", FieldType::parse("time")},
                    {"a", FieldType::parse("u8")},
                    {"b", FieldType::parse("u16")},
                    {"c", FieldType::parse("u32")},
                    {"d", FieldType::parse("u64")},
                    {"e", FieldType::parse("i64")},
                    {"f", FieldType::parse("f32")},
                    {"g", FieldType::parse("f64")},
                    {"h", FieldType::parse("ascii:7")}},
                   "t");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const float f = std::uniform_real_distribution<float>(-1e6f, 1e6f)(rng);
        std::string text(rng() % 8, 'a');
        for (auto& ch : text) ch = static_cast<char>('a' + rng() % 26);
        std::vector<Value> v = {
            Value{std::int64_t{testing::oracle_epoch(2010, 1, 1) + static_cast<std::int64_t>(rng() % 1'000'000'000)}},
            Value{static_cast<std::int64_t>(rng() % 256)},
            Value{static_cast<std::int64_t>(rng() % 65536)},
            Value{static_cast<std::int64_t>(rng() % 4'294'967'296ULL)},
            Value{static_cast<std::int64_t>(rng() >> 1)},
            Value{static_cast<std::int64_t>(rng())},
            Value{static_cast<double>(f)},
            Value{std::uniform_real_distribution<double>(-1e300, 1e300)(rng)},
            Value{text}};
        const auto bytes = encode_record(s, v);
        const auto d = decode_record(s, bytes);
        ASSERT_EQ(d.status, DecodeStatus::ok);
        for (std::size_t k = 0; k < v.size(); ++k) ASSERT_EQ(d.record.get(k), v[k]) << "field " << k;
    }
}

TEST(Records, EncodeRejectsBadValues) {
    const Schema s = taxi_schema();
    std::vector<Value> v(s.fields().size(), Value{std::int64_t{0}});
    EXPECT_THROW(encode_record(s, v), SchemaError); // ascii fields given numbers
}

} // namespace
} // namespace ltss
