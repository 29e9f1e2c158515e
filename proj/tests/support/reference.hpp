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

// Brute-force evaluation of the taxi and energy benchmark queries.
//
// Each query is written out by hand as loops over the decoded dataset. Records
// are decoded straight from their bytes and calendar fields come from the
// <chrono> oracle, so nothing here goes through the SQL parser, the planner,
// the directory index or CompositeTime.

#include "ltss/datasets.hpp"
#include "ltss/sql.hpp"

#include <string>

namespace ltss::testing {

/// `id` is Q1..Q7. Throws std::invalid_argument for an unknown id.
ResultSet reference_taxi(const std::string& id, const Dataset& data);
ResultSet reference_energy(const std::string& id, const Dataset& data);

/// Rows sorted lexicographically by compare_values, for order-insensitive
/// comparison.
std::vector<std::vector<Value>> canonical_rows(std::vector<std::vector<Value>> rows);

/// Exact comparison of row sets (type and value of every cell). Returns an
/// empty string on equality, otherwise a description of the first difference.
std::string diff_results(const ResultSet& expected, const ResultSet& actual, bool ordered);

} // namespace ltss::testing
