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
#include "ltss/partition.hpp"
#include "ltss/schema.hpp"
#include "ltss/value.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltss {

enum class ColumnKind : std::uint8_t { field, timestamp, ctime };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::field;
    std::size_t field_index = 0;                  ///< kind == field
    CalendarField calendar = CalendarField::year; ///< kind == ctime
};

/// Prefix for derived calendar columns: the primary time field name with a
/// trailing "datetime" or "time" and then a trailing underscore removed
/// (pickup_datetime -> "pickup", DATETIME -> "").
std::string ctime_prefix_for(std::string_view time_field);

/// SQL-facing view of a table: the schema fields, TIMESTAMP (epoch
/// microseconds of the primary time) and CTIME_[<prefix>_]<field> for each
/// calendar field. Unprefixed CTIME_<field> names are accepted as aliases.
class LogicalTable {
public:
    explicit LogicalTable(Table& table);

    Table& table() const noexcept { return *table_; }
    const Schema& schema() const noexcept { return table_->schema(); }
    const std::string& name() const noexcept { return table_->name(); }
    const std::vector<Column>& columns() const noexcept { return columns_; }
    /// Index of the first derived column (schema fields come first).
    std::size_t derived_begin() const noexcept { return schema().fields().size(); }

    /// Case-insensitive.
    std::optional<std::size_t> resolve(std::string_view name) const noexcept;

    Value value(std::size_t column, std::span<const std::byte> record, CompositeTime ctime) const;

private:
    Table* table_;
    std::vector<Column> columns_;
    std::vector<std::pair<std::string, std::size_t>> aliases_; // lower-case name -> column
};

} // namespace ltss
