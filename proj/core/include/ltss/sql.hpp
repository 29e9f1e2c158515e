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

#include "ltss/logical_table.hpp"
#include "ltss/query.hpp"
#include "ltss/value.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ltss {

class PrefetchCache;

struct ResultSet {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
};

/// Header row, then one line per row. Fields with separators are quoted.
void write_csv(std::ostream& out, const ResultSet& result);
std::string to_csv(const ResultSet& result);

class Catalog {
public:
    /// Registers under the table's name (case-insensitive). The table must
    /// outlive the catalog.
    void add(const LogicalTable& table);
    const LogicalTable* find(std::string_view name) const noexcept;
    std::vector<std::string> names() const;

    /// Cursors read through the cache; with auto_prefetch each new plan is
    /// prefetched before its first scan.
    void set_cache(PrefetchCache* cache, bool auto_prefetch = true) noexcept {
        cache_ = cache;
        auto_prefetch_ = auto_prefetch;
    }
    PrefetchCache* cache() const noexcept { return cache_; }
    bool auto_prefetch() const noexcept { return auto_prefetch_; }

    /// Overrides the default multi-partition combine mode.
    std::optional<CombineMode> force_combine;

private:
    std::vector<std::pair<std::string, const LogicalTable*>> tables_;
    PrefetchCache* cache_ = nullptr;
    bool auto_prefetch_ = true;
};

struct QueryStats {
    std::uint64_t rows_examined = 0;
    std::uint64_t table_scans = 0;
    std::uint64_t counted_from_index = 0; // count(*) answered from index ranges
    std::vector<QueryPlan> plans;
    std::vector<CombineMode> combine_modes;
};

/// Runs one statement of the supported subset against the catalog.
/// Throws SqlParseError, UnsupportedSqlError or QueryError.
ResultSet execute_sql(std::string_view text, const Catalog& catalog, QueryStats* stats = nullptr);

} // namespace ltss
