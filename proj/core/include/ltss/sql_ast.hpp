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

#include "ltss/value.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ltss::sql {

struct SelectStmt;

enum class ExprKind : std::uint8_t {
    literal,
    column,
    negate,
    logical_not,
    arithmetic,
    compare,
    logical_and,
    logical_or,
    in_list,
    in_select,
    aggregate,
};

enum class ArithOp : std::uint8_t { add, sub, mul, div, mod };
enum class AggFn : std::uint8_t { count, sum, avg, min, max };

const char* to_string(AggFn fn) noexcept;

struct Expr {
    ExprKind kind = ExprKind::literal;
    Value literal;

    std::string qualifier; // column: optional table/alias prefix
    std::string name;      // column name

    ArithOp arith = ArithOp::add;
    CompareOp cmp = CompareOp::eq;
    AggFn agg = AggFn::count;
    bool star = false;     // count(*)
    bool distinct = false; // aggregate(DISTINCT x)
    bool negated = false;  // NOT IN

    std::vector<std::unique_ptr<Expr>> args;
    std::unique_ptr<SelectStmt> subquery;

    std::string text; // source spelling, used for result headers
};

using ExprPtr = std::unique_ptr<Expr>;

struct SelectItem {
    ExprPtr expr; // null for '*'
    std::optional<std::string> alias;
};

struct OrderItem {
    ExprPtr expr;
    bool descending = false;
};

struct TableRef {
    std::string name;
    std::optional<std::string> alias;
    std::unique_ptr<SelectStmt> subquery; // FROM (SELECT ...)
};

struct SelectStmt {
    bool distinct = false;
    std::vector<SelectItem> items;
    TableRef from;
    ExprPtr where;
    std::vector<ExprPtr> group_by;
    std::vector<OrderItem> order_by;
    std::optional<std::int64_t> limit;
};

struct CommonTable {
    std::string name;
    std::vector<std::string> columns;
    std::unique_ptr<SelectStmt> select;
};

struct Statement {
    std::vector<CommonTable> ctes;
    std::unique_ptr<SelectStmt> select;
};

/// Parses one statement of the supported subset. Throws SqlParseError on
/// malformed input and UnsupportedSqlError for recognised constructs outside
/// the subset (joins, HAVING, window functions, set operations, writes...).
Statement parse(std::string_view text);

bool contains_aggregate(const Expr& e) noexcept;

} // namespace ltss::sql
