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

#include "ltss/logical_table.hpp"

#include <algorithm>
#include <cctype>

namespace ltss {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool ends_with_ci(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && lower(s.substr(s.size() - suffix.size())) == suffix;
}

constexpr CalendarField kCalendarColumns[] = {CalendarField::year, CalendarField::month, CalendarField::day,
                                              CalendarField::wday, CalendarField::hour,  CalendarField::min,
                                              CalendarField::sec,  CalendarField::usec};

} // namespace

std::string ctime_prefix_for(std::string_view time_field) {
    std::string_view s = time_field;
    if (ends_with_ci(s, "datetime")) {
        s.remove_suffix(8);
    } else if (ends_with_ci(s, "time")) {
        s.remove_suffix(4);
    }
    while (!s.empty() && s.back() == '_') s.remove_suffix(1);
    return std::string(s);
}

LogicalTable::LogicalTable(Table& table) : table_(&table) {
    const Schema& schema = table.schema();
    for (std::size_t i = 0; i < schema.fields().size(); ++i) {
        columns_.push_back(Column{schema.fields()[i].name, ColumnKind::field, i, CalendarField::year});
    }
    auto add_alias = [this](std::string_view name, std::size_t col) {
        const std::string key = lower(name);
        const bool taken = std::any_of(aliases_.begin(), aliases_.end(), [&](const auto& a) { return a.first == key; });
        if (!taken) aliases_.emplace_back(key, col);
    };
    for (std::size_t i = 0; i < columns_.size(); ++i) add_alias(columns_[i].name, i);

    columns_.push_back(Column{"TIMESTAMP", ColumnKind::timestamp, schema.time_index(), CalendarField::year});
    add_alias("TIMESTAMP", columns_.size() - 1);

    const std::string prefix = ctime_prefix_for(schema.time_field().name);
    for (CalendarField f : kCalendarColumns) {
        const std::string base = std::string("CTIME_") + to_string(f);
        const std::string name = prefix.empty() ? base : "CTIME_" + prefix + "_" + to_string(f);
        columns_.push_back(Column{name, ColumnKind::ctime, schema.time_index(), f});
        add_alias(name, columns_.size() - 1);
        add_alias(base, columns_.size() - 1);
    }
}

std::optional<std::size_t> LogicalTable::resolve(std::string_view name) const noexcept {
    const std::string key = lower(name);
    for (const auto& [alias, col] : aliases_) {
        if (alias == key) return col;
    }
    return std::nullopt;
}

Value LogicalTable::value(std::size_t column, std::span<const std::byte> record, CompositeTime ctime) const {
    const Column& c = columns_[column];
    switch (c.kind) {
    case ColumnKind::field: return read_field(schema(), record, c.field_index);
    case ColumnKind::timestamp: return static_cast<std::int64_t>(read_time(schema(), record));
    case ColumnKind::ctime: return static_cast<std::int64_t>(ctime.extract(c.calendar));
    }
    return {};
}

} // namespace ltss
