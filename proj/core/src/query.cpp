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

#include "ltss/query.hpp"

#include "ltss/error.hpp"
#include "ltss/prefetch.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace ltss {

namespace {

// Non-negative integral numeric value, as the index compares unsigned ints.
std::optional<std::uint64_t> index_value(const Value& v) noexcept {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        if (*i >= 0) return static_cast<std::uint64_t>(*i);
        return std::nullopt;
    }
    if (const auto* d = std::get_if<double>(&v)) {
        if (*d >= 0 && *d < 9.2e18 && std::floor(*d) == *d) return static_cast<std::uint64_t>(*d);
    }
    return std::nullopt;
}

double cardinality(CalendarField f) noexcept {
    switch (f) {
    case CalendarField::year: return 32;
    case CalendarField::month: return 12;
    case CalendarField::day: return 31;
    case CalendarField::wday: return 7;
    case CalendarField::hour: return 24;
    case CalendarField::min: return 60;
    case CalendarField::sec: return 60;
    case CalendarField::usec: return 1e6;
    }
    return 2;
}

double selectivity(CompareOp op, double card) noexcept {
    switch (op) {
    case CompareOp::eq: return 1.0 / card;
    case CompareOp::ne: return (card - 1.0) / card;
    default: return 0.5;
    }
}

void tighten(TimeWindow& w, CompareOp op, std::uint64_t v) noexcept {
    constexpr auto kMax = std::numeric_limits<EpochMicros>::max();
    const EpochMicros next = v == kMax ? kMax : v + 1;
    switch (op) {
    case CompareOp::eq: w.intersect({v, next}); break;
    case CompareOp::lt: w.intersect({0, v}); break;
    case CompareOp::le: w.intersect({0, next}); break;
    case CompareOp::gt: w.intersect({next, kMax}); break;
    case CompareOp::ge: w.intersect({v, kMax}); break;
    case CompareOp::ne: break;
    }
}

} // namespace

const char* to_string(CombineMode m) noexcept { return m == CombineMode::append ? "append" : "sort-merge"; }

std::string QueryPlan::key() const {
    std::vector<std::string> parts;
    for (const auto& c : index.calendar) {
        parts.push_back(std::string(ltss::to_string(c.field)) + ltss::to_string(c.op) + std::to_string(c.value));
    }
    std::sort(parts.begin(), parts.end());
    std::ostringstream os;
    os << table << "|" << index.window.lo << "-" << index.window.hi;
    for (const auto& p : parts) os << "|" << p;
    return os.str();
}

QueryPlan best_index(const LogicalTable& table, std::span<const Constraint> constraints) {
    QueryPlan plan;
    plan.table = table.name();
    double factor = 1.0;
    for (const Constraint& c : constraints) {
        const auto col = table.resolve(c.column);
        if (!col) throw QueryError("unknown column '" + c.column + "' in table '" + table.name() + "'");
        const Column& column = table.columns()[*col];
        const auto v = index_value(c.value);

        if (column.kind == ColumnKind::ctime && v && *v <= std::numeric_limits<unsigned>::max() &&
            !(column.calendar == CalendarField::usec && c.op == CompareOp::ne)) {
            plan.index.calendar.push_back(IndexConstraint{column.calendar, c.op, static_cast<unsigned>(*v)});
            plan.consumed.push_back(c);
            factor *= selectivity(c.op, cardinality(column.calendar));
        } else if (column.kind == ColumnKind::timestamp && v && c.op != CompareOp::ne) {
            tighten(plan.index.window, c.op, *v);
            plan.consumed.push_back(c);
            factor *= selectivity(c.op, 1e6);
        } else {
            plan.residual.push_back(c);
            plan.residual_bound.push_back(BoundConstraint{*col, c.op, c.value});
        }
    }
    // Most significant calendar field first, as the index drills down.
    std::stable_sort(plan.index.calendar.begin(), plan.index.calendar.end(),
                     [](const IndexConstraint& a, const IndexConstraint& b) {
                         return static_cast<int>(a.field) < static_cast<int>(b.field);
                     });
    const double rows = static_cast<double>(std::max<std::uint64_t>(table.table().live_records(), 1));
    // Residual filters cost a comparison per candidate row on top of the read.
    plan.estimated_cost = rows * factor * (1.0 + 0.1 * static_cast<double>(plan.residual.size()));
    return plan;
}

// Cursor

Cursor::Cursor(const LogicalTable& table, const QueryPlan& plan, ScanOptions options)
    : table_(&table), plan_(plan), plan_key_(plan.key()), options_(options) {
    Table& t = table.table();
    subs_.resize(t.partition_count());
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        Sub& s = subs_[i];
        const Partition& part = t.partition(i);
        s.partition = part.id();
        s.store = &part.store();
        s.ranges = resolve(*part.view(), part.store(), plan_.index);
        s.buf.resize(table.schema().record_size());
    }
    if (options_.combine == CombineMode::append) {
        for (std::size_t i = 0; i < subs_.size(); ++i) {
            advance(subs_[i]);
            if (subs_[i].has_row) {
                current_ = i;
                break;
            }
        }
    } else {
        for (auto& s : subs_) advance(s);
        pick();
    }
}

bool Cursor::load(Sub& s, std::uint64_t seq) {
    ++examined_;
    if (options_.cache && options_.cache->read(plan_key_, s.partition, *s.store, seq, s.buf, s.ctime)) {
        s.time = read_time(table_->schema(), s.buf);
        return true;
    }
    if (!s.store->is_live(seq)) return false;
    std::memcpy(s.buf.data(), s.store->record_ptr(seq), s.buf.size());
    s.ctime = s.store->ctime_at(seq);
    s.store->count_storage_reads(1);
    if (!s.store->is_live(seq)) return false; // overwritten while copying
    s.time = read_time(table_->schema(), s.buf);
    return true;
}

bool Cursor::matches(const Sub& s) const {
    for (const BoundConstraint& rc : plan_.residual_bound) {
        if (!apply_compare(rc.op, table_->value(rc.column, s.buf, s.ctime), rc.value)) return false;
    }
    return true;
}

void Cursor::advance(Sub& s) {
    s.has_row = false;
    const std::size_t n = s.ranges.size();
    if (options_.direction == ScanDirection::forward) {
        while (s.range_pos < n) {
            const RecordRange& r = s.ranges[s.range_pos];
            if (!s.started) {
                s.cursor = r.begin;
                s.started = true;
            }
            s.cursor = std::max(s.cursor, s.store->live_window().begin);
            if (s.cursor >= r.end) {
                ++s.range_pos;
                s.started = false;
                continue;
            }
            const std::uint64_t seq = s.cursor++;
            if (load(s, seq) && matches(s)) {
                s.seq = seq;
                s.has_row = true;
                return;
            }
        }
    } else {
        while (s.range_pos < n) {
            const RecordRange& r = s.ranges[n - 1 - s.range_pos];
            if (!s.started) {
                s.cursor = r.end;
                s.started = true;
            }
            if (s.cursor <= r.begin) {
                ++s.range_pos;
                s.started = false;
                continue;
            }
            const std::uint64_t seq = --s.cursor;
            if (seq < s.store->live_window().begin) {
                s.range_pos = n; // everything older is gone too
                return;
            }
            if (load(s, seq) && matches(s)) {
                s.seq = seq;
                s.has_row = true;
                return;
            }
        }
    }
}

void Cursor::pick() {
    current_ = kNone;
    const bool forward = options_.direction == ScanDirection::forward;
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        if (!subs_[i].has_row) continue;
        if (current_ == kNone) {
            current_ = i;
        } else if (forward ? subs_[i].time < subs_[current_].time : subs_[i].time >= subs_[current_].time) {
            current_ = i;
        }
    }
}

void Cursor::next() {
    if (eof()) throw QueryError("cursor advanced past the last row");
    if (options_.combine == CombineMode::append) {
        advance(subs_[current_]);
        while (!subs_[current_].has_row) {
            if (++current_ == subs_.size()) {
                current_ = kNone;
                return;
            }
            advance(subs_[current_]);
        }
    } else {
        advance(subs_[current_]);
        pick();
    }
}

const Cursor::Sub& Cursor::cur() const {
    if (eof()) throw QueryError("cursor read past the last row");
    return subs_[current_];
}

Value Cursor::column(std::size_t column) const {
    const Sub& s = cur();
    if (column >= table_->columns().size()) throw QueryError("column index out of range");
    return table_->value(column, s.buf, s.ctime);
}

Value Cursor::column(std::string_view name) const {
    const auto col = table_->resolve(name);
    if (!col) throw QueryError("unknown column '" + std::string(name) + "' in table '" + table_->name() + "'");
    return column(*col);
}

std::uint64_t Cursor::rowid() const {
    const Sub& s = cur();
    return (std::uint64_t{s.partition} << 48) | s.seq;
}

EpochMicros Cursor::time() const { return cur().time; }
CompositeTime Cursor::ctime() const { return cur().ctime; }
std::span<const std::byte> Cursor::record() const { return cur().buf; }
std::size_t Cursor::partition() const { return cur().partition; }

std::uint64_t count_matching(const LogicalTable& table, const QueryPlan& plan) {
    std::uint64_t n = 0;
    if (plan.residual_bound.empty()) {
        Table& t = table.table();
        for (std::size_t i = 0; i < t.partition_count(); ++i) {
            const Partition& p = t.partition(i);
            for (const RecordRange& r : resolve(*p.view(), p.store(), plan.index)) n += r.size();
        }
        return n;
    }
    for (Cursor c(table, plan, {CombineMode::append}); !c.eof(); c.next()) ++n;
    return n;
}

} // namespace ltss
