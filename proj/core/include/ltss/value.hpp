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

#include <cstdint>
#include <string>
#include <variant>

namespace ltss {

/// Scalar value flowing through records and queries.
///
/// Stored records never contain nulls; `std::monostate` only appears as the
/// result of an aggregate over an empty input (avg/min/max/sum of nothing).
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

enum class CompareOp : std::uint8_t { eq, ne, lt, le, gt, ge };

const char* to_string(CompareOp op) noexcept;

/// Mirror of `op` when operands are swapped (`5 < x` is `x > 5`).
CompareOp flip(CompareOp op) noexcept;

inline bool is_null(const Value& v) noexcept { return std::holds_alternative<std::monostate>(v); }
inline bool is_numeric(const Value& v) noexcept {
    return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

/// Numeric view of a value; text and null yield 0.
double as_double(const Value& v) noexcept;

/// Total order: null < numbers (compared numerically) < text (bytewise).
int compare_values(const Value& a, const Value& b) noexcept;

bool apply_compare(CompareOp op, const Value& a, const Value& b) noexcept;

/// Text form used for CSV output; doubles use shortest round-trip digits.
std::string to_display(const Value& v);

struct ValueLess {
    bool operator()(const Value& a, const Value& b) const noexcept { return compare_values(a, b) < 0; }
};

} // namespace ltss
