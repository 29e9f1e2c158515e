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

#include "ltss/value.hpp"

#include "ltss/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>

namespace ltss {

IoError::IoError(const std::string& what, int err)
    : StoreError(what + ": " + std::strerror(err)), errno_(err) {}

SqlParseError::SqlParseError(const std::string& what, std::size_t position)
    : QueryError("parse error at offset " + std::to_string(position) + ": " + what),
      position_(position) {}

UnsupportedSqlError::UnsupportedSqlError(const std::string& construct)
    : QueryError("unsupported SQL construct: " + construct), construct_(construct) {}

const char* to_string(CompareOp op) noexcept {
    switch (op) {
    case CompareOp::eq: return "=";
    case CompareOp::ne: return "!=";
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
    }
    return "?";
}

CompareOp flip(CompareOp op) noexcept {
    switch (op) {
    case CompareOp::lt: return CompareOp::gt;
    case CompareOp::le: return CompareOp::ge;
    case CompareOp::gt: return CompareOp::lt;
    case CompareOp::ge: return CompareOp::le;
    default: return op;
    }
}

double as_double(const Value& v) noexcept {
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&v)) return *d;
    return 0.0;
}

namespace {

int rank(const Value& v) noexcept {
    if (is_null(v)) return 0;
    if (is_numeric(v)) return 1;
    return 2;
}

template <typename T>
int three_way(T a, T b) noexcept {
    return a < b ? -1 : (b < a ? 1 : 0);
}

} // namespace

int compare_values(const Value& a, const Value& b) noexcept {
    const int ra = rank(a);
    const int rb = rank(b);
    if (ra != rb) return three_way(ra, rb);
    switch (ra) {
    case 0: return 0;
    case 1: {
        auto* ia = std::get_if<std::int64_t>(&a);
        auto* ib = std::get_if<std::int64_t>(&b);
        if (ia && ib) return three_way(*ia, *ib);
        return three_way(as_double(a), as_double(b));
    }
    default: {
        const int c = std::get<std::string>(a).compare(std::get<std::string>(b));
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    }
}

bool apply_compare(CompareOp op, const Value& a, const Value& b) noexcept {
    const int c = compare_values(a, b);
    switch (op) {
    case CompareOp::eq: return c == 0;
    case CompareOp::ne: return c != 0;
    case CompareOp::lt: return c < 0;
    case CompareOp::le: return c <= 0;
    case CompareOp::gt: return c > 0;
    case CompareOp::ge: return c >= 0;
    }
    return false;
}

std::string to_display(const Value& v) {
    if (is_null(v)) return {};
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    const double d = std::get<double>(v);
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
    std::string out(buf.data(), end);
    // Keep reals distinguishable from integers in CSV output.
    if (out.find_first_of(".eE") == std::string::npos) out += ".0";
    return out;
}

} // namespace ltss
