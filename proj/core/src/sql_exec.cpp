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

#include "ltss/sql.hpp"

#include "ltss/error.hpp"
#include "ltss/prefetch.hpp"
#include "ltss/sql_ast.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

namespace ltss {

namespace {

using sql::AggFn;
using sql::ArithOp;
using sql::Expr;
using sql::ExprKind;
using sql::SelectStmt;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

struct Relation {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
};

struct RowLess {
    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const noexcept {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), ValueLess{});
    }
};

using ValueSet = std::set<Value, ValueLess>;

// Compiled expressions

enum class Op : std::uint8_t { literal, column, agg, negate, logical_not, arith, compare, logical_and, logical_or, in_list, in_set };

struct CExpr {
    Op op = Op::literal;
    Value lit;
    std::size_t index = 0; // column: source column; agg: slot
    ArithOp arith = ArithOp::add;
    CompareOp cmp = CompareOp::eq;
    bool negated = false;
    std::vector<CExpr> args;
    std::shared_ptr<const ValueSet> set;
};

class Row {
public:
    virtual ~Row() = default;
    virtual Value get(std::size_t column) const = 0;
};

class TableRow final : public Row {
public:
    TableRow(const LogicalTable& t, const Cursor& c) : table_(t), record_(c.record()), ctime_(c.ctime()) {}
    Value get(std::size_t column) const override { return table_.value(column, record_, ctime_); }

private:
    const LogicalTable& table_;
    std::span<const std::byte> record_;
    CompositeTime ctime_;
};

class VectorRow final : public Row {
public:
    explicit VectorRow(const std::vector<Value>& v) : v_(v) {}
    Value get(std::size_t column) const override { return v_[column]; }

private:
    const std::vector<Value>& v_;
};

// Reads source columns from a per-group snapshot.
class SnapshotRow final : public Row {
public:
    SnapshotRow(const std::vector<std::size_t>& slot_of, const std::vector<Value>& values)
        : slot_of_(slot_of), values_(values) {}
    Value get(std::size_t column) const override {
        const std::size_t s = slot_of_[column];
        return s < values_.size() ? values_[s] : Value{};
    }

private:
    const std::vector<std::size_t>& slot_of_;
    const std::vector<Value>& values_;
};

bool truthy(const Value& v) noexcept { return is_numeric(v) && as_double(v) != 0.0; }

Value arithmetic(ArithOp op, const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return {};
    if (!is_numeric(a) || !is_numeric(b)) throw QueryError("arithmetic on a text value");
    const auto* ia = std::get_if<std::int64_t>(&a);
    const auto* ib = std::get_if<std::int64_t>(&b);
    if (ia && ib) {
        switch (op) {
        case ArithOp::add: return *ia + *ib;
        case ArithOp::sub: return *ia - *ib;
        case ArithOp::mul: return *ia * *ib;
        case ArithOp::div:
            if (*ib == 0) throw QueryError("division by zero");
            return *ia / *ib;
        case ArithOp::mod:
            if (*ib == 0) throw QueryError("division by zero");
            return *ia % *ib;
        }
    }
    const double x = as_double(a);
    const double y = as_double(b);
    switch (op) {
    case ArithOp::add: return x + y;
    case ArithOp::sub: return x - y;
    case ArithOp::mul: return x * y;
    case ArithOp::div:
        if (y == 0.0) throw QueryError("division by zero");
        return x / y;
    case ArithOp::mod:
        if (y == 0.0) throw QueryError("division by zero");
        return std::fmod(x, y);
    }
    return {};
}

Value eval(const CExpr& e, const Row& row, const std::vector<Value>* aggs) {
    switch (e.op) {
    case Op::literal: return e.lit;
    case Op::column: return row.get(e.index);
    case Op::agg: return aggs ? (*aggs)[e.index] : Value{};
    case Op::negate: {
        Value v = eval(e.args[0], row, aggs);
        if (auto* i = std::get_if<std::int64_t>(&v)) return -*i;
        if (auto* d = std::get_if<double>(&v)) return -*d;
        if (is_null(v)) return v;
        throw QueryError("negation of a text value");
    }
    case Op::logical_not: return std::int64_t{!truthy(eval(e.args[0], row, aggs))};
    case Op::arith: return arithmetic(e.arith, eval(e.args[0], row, aggs), eval(e.args[1], row, aggs));
    case Op::compare:
        return std::int64_t{apply_compare(e.cmp, eval(e.args[0], row, aggs), eval(e.args[1], row, aggs))};
    case Op::logical_and:
        return std::int64_t{truthy(eval(e.args[0], row, aggs)) && truthy(eval(e.args[1], row, aggs))};
    case Op::logical_or:
        return std::int64_t{truthy(eval(e.args[0], row, aggs)) || truthy(eval(e.args[1], row, aggs))};
    case Op::in_list: {
        const Value v = eval(e.args[0], row, aggs);
        bool found = false;
        for (std::size_t i = 1; i < e.args.size() && !found; ++i) {
            found = compare_values(v, eval(e.args[i], row, aggs)) == 0;
        }
        return std::int64_t{found != e.negated};
    }
    case Op::in_set: {
        const bool found = e.set->count(eval(e.args[0], row, aggs)) > 0;
        return std::int64_t{found != e.negated};
    }
    }
    return {};
}

// Aggregation

struct AggSpec {
    AggFn fn = AggFn::count;
    bool star = false;
    bool distinct = false;
    CExpr arg;
};

struct AggState {
    std::int64_t count = 0;
    double sum = 0.0;
    bool all_int = true;
    Value extreme;
    std::unique_ptr<ValueSet> seen;

    // True when a min/max accumulator took a new extreme.
    bool add(const AggSpec& spec, const Value& v) {
        if (spec.star) {
            ++count;
            return false;
        }
        if (is_null(v)) return false;
        if (spec.distinct) {
            if (!seen) seen = std::make_unique<ValueSet>();
            if (!seen->insert(v).second) return false;
        }
        ++count;
        switch (spec.fn) {
        case AggFn::count: return false;
        case AggFn::sum:
        case AggFn::avg:
            if (!is_numeric(v)) throw QueryError(std::string(sql::to_string(spec.fn)) + "() of a text value");
            sum += as_double(v);
            all_int = all_int && std::holds_alternative<std::int64_t>(v);
            return false;
        case AggFn::min:
            if (count == 1 || compare_values(v, extreme) < 0) {
                extreme = v;
                return true;
            }
            return false;
        case AggFn::max:
            if (count == 1 || compare_values(v, extreme) > 0) {
                extreme = v;
                return true;
            }
            return false;
        }
        return false;
    }

    Value result(const AggSpec& spec) const {
        switch (spec.fn) {
        case AggFn::count: return count;
        case AggFn::sum:
            if (count == 0) return {};
            // Accumulated as a double; integer inputs report an integer total.
            if (all_int && std::abs(sum) < 9.007199254740992e15) return static_cast<std::int64_t>(std::llround(sum));
            return sum;
        case AggFn::avg:
            if (count == 0) return {};
            return sum / static_cast<double>(count);
        case AggFn::min:
        case AggFn::max: return count == 0 ? Value{} : extreme;
        }
        return {};
    }
};

// Per-statement state

struct Source {
    const LogicalTable* table = nullptr;
    const Relation* relation = nullptr;
    std::string name;
    std::optional<std::string> alias;

    std::size_t column_count() const {
        return table ? table->columns().size() : relation->columns.size();
    }
    std::optional<std::size_t> resolve(const Expr& col) const {
        if (!col.qualifier.empty() && !iequals(col.qualifier, name) && !(alias && iequals(col.qualifier, *alias))) {
            throw QueryError("unknown table qualifier '" + col.qualifier + "'");
        }
        if (table) return table->resolve(col.name);
        for (std::size_t i = 0; i < relation->columns.size(); ++i) {
            if (iequals(relation->columns[i], col.name)) return i;
        }
        return std::nullopt;
    }
    bool is_time_column(std::size_t c) const {
        if (!table) return false;
        const Column& col = table->columns()[c];
        return col.kind == ColumnKind::timestamp ||
               (col.kind == ColumnKind::field && col.field_index == table->schema().time_index());
    }
};

class Executor {
public:
    Executor(const Catalog& catalog, QueryStats* stats) : catalog_(catalog), stats_(stats) {}

    ResultSet run(const sql::Statement& st) {
        for (const sql::CommonTable& cte : st.ctes) {
            ResultSet r = select(*cte.select);
            Relation rel;
            rel.name = cte.name;
            if (!cte.columns.empty()) {
                if (cte.columns.size() != r.columns.size()) {
                    throw QueryError("common table '" + cte.name + "' names " + std::to_string(cte.columns.size()) +
                                     " columns but its query returns " + std::to_string(r.columns.size()));
                }
                rel.columns = cte.columns;
            } else {
                rel.columns = std::move(r.columns);
            }
            rel.rows = std::move(r.rows);
            ctes_[lower(cte.name)] = std::make_shared<Relation>(std::move(rel));
        }
        return select(*st.select);
    }

private:
    // Compilation context for one SELECT.
    struct Scope {
        Source source;
        bool aggregate = false;
        std::vector<AggSpec>* aggs = nullptr;
        std::vector<std::size_t>* bare = nullptr; // source columns read outside aggregates
    };

    CExpr compile(const Expr& e, Scope& sc, bool inside_agg = false) {
        CExpr c;
        switch (e.kind) {
        case ExprKind::literal:
            c.op = Op::literal;
            c.lit = e.literal;
            return c;
        case ExprKind::column: {
            const auto idx = sc.source.resolve(e);
            if (!idx) throw QueryError("unknown column '" + e.name + "' in '" + sc.source.name + "'");
            c.op = Op::column;
            c.index = *idx;
            if (sc.aggregate && !inside_agg && sc.bare &&
                std::find(sc.bare->begin(), sc.bare->end(), *idx) == sc.bare->end()) {
                sc.bare->push_back(*idx);
            }
            return c;
        }
        case ExprKind::negate:
        case ExprKind::logical_not:
            c.op = e.kind == ExprKind::negate ? Op::negate : Op::logical_not;
            c.args.push_back(compile(*e.args[0], sc, inside_agg));
            return c;
        case ExprKind::arithmetic:
        case ExprKind::compare:
        case ExprKind::logical_and:
        case ExprKind::logical_or:
            c.op = e.kind == ExprKind::arithmetic  ? Op::arith
                   : e.kind == ExprKind::compare   ? Op::compare
                   : e.kind == ExprKind::logical_and ? Op::logical_and
                                                     : Op::logical_or;
            c.arith = e.arith;
            c.cmp = e.cmp;
            c.args.push_back(compile(*e.args[0], sc, inside_agg));
            c.args.push_back(compile(*e.args[1], sc, inside_agg));
            return c;
        case ExprKind::in_list:
            c.op = Op::in_list;
            c.negated = e.negated;
            for (const auto& a : e.args) c.args.push_back(compile(*a, sc, inside_agg));
            return c;
        case ExprKind::in_select: {
            c.op = Op::in_set;
            c.negated = e.negated;
            c.args.push_back(compile(*e.args[0], sc, inside_agg));
            ResultSet sub = select(*e.subquery);
            if (sub.columns.size() != 1) throw QueryError("IN subquery must return exactly one column");
            auto set = std::make_shared<ValueSet>();
            for (auto& r : sub.rows) set->insert(std::move(r[0]));
            c.set = std::move(set);
            return c;
        }
        case ExprKind::aggregate: {
            if (!sc.aggs || inside_agg) throw QueryError("aggregate '" + e.text + "' is not allowed here");
            AggSpec spec;
            spec.fn = e.agg;
            spec.star = e.star;
            spec.distinct = e.distinct;
            if (!e.star) spec.arg = compile(*e.args[0], sc, true);
            c.op = Op::agg;
            c.index = sc.aggs->size();
            sc.aggs->push_back(std::move(spec));
            return c;
        }
        }
        return c;
    }

    Source resolve_source(const sql::TableRef& from, std::shared_ptr<Relation>& holder) {
        Source s;
        s.alias = from.alias;
        if (from.subquery) {
            ResultSet r = select(*from.subquery);
            holder = std::make_shared<Relation>(Relation{from.alias.value_or("subquery"), std::move(r.columns),
                                                         std::move(r.rows)});
            s.relation = holder.get();
            s.name = holder->name;
            return s;
        }
        s.name = from.name;
        if (auto it = ctes_.find(lower(from.name)); it != ctes_.end()) {
            s.relation = it->second.get();
            return s;
        }
        s.table = catalog_.find(from.name);
        if (!s.table) throw QueryError("unknown table '" + from.name + "'");
        return s;
    }

    static void conjuncts(const Expr* e, std::vector<const Expr*>& out) {
        if (!e) return;
        if (e->kind == ExprKind::logical_and) {
            conjuncts(e->args[0].get(), out);
            conjuncts(e->args[1].get(), out);
        } else {
            out.push_back(e);
        }
    }

    // `col op literal` (either way round) on the scanned table.
    static std::optional<Constraint> as_constraint(const Expr& e, const Source& src) {
        if (!src.table || e.kind != ExprKind::compare) return std::nullopt;
        const Expr* col = e.args[0].get();
        const Expr* lit = e.args[1].get();
        CompareOp op = e.cmp;
        if (col->kind == ExprKind::literal && lit->kind == ExprKind::column) {
            std::swap(col, lit);
            op = flip(op);
        }
        if (col->kind != ExprKind::column || lit->kind != ExprKind::literal) return std::nullopt;
        const auto idx = src.resolve(*col);
        if (!idx) return std::nullopt;
        return Constraint{src.table->columns()[*idx].name, op, lit->literal};
    }

    static std::string header(const sql::SelectItem& item, const Source& src) {
        if (item.alias) return *item.alias;
        const Expr& e = *item.expr;
        if (e.kind == ExprKind::aggregate) return sql::to_string(e.agg);
        if (e.kind == ExprKind::column) {
            (void)src;
            return e.name;
        }
        return e.text;
    }

    struct OrderKey {
        std::optional<std::size_t> output; // alias or position
        CExpr expr;
        bool descending = false;
    };

    struct OutRow {
        std::vector<Value> out;
        std::vector<Value> keys;
    };

    ResultSet select(const SelectStmt& s) {
        std::shared_ptr<Relation> holder;
        Scope sc;
        sc.source = resolve_source(s.from, holder);
        const Source& src = sc.source;

        // Expand '*' and collect output headers.
        std::vector<const Expr*> item_exprs;
        std::vector<std::string> headers;
        std::vector<std::unique_ptr<Expr>> synthesized;
        for (const sql::SelectItem& item : s.items) {
            if (item.expr) {
                item_exprs.push_back(item.expr.get());
                headers.push_back(header(item, src));
                continue;
            }
            const std::size_t n = src.table ? src.table->derived_begin() : src.column_count();
            for (std::size_t i = 0; i < n; ++i) {
                auto e = std::make_unique<Expr>();
                e->kind = ExprKind::column;
                e->name = src.table ? src.table->columns()[i].name : src.relation->columns[i];
                headers.push_back(e->name);
                item_exprs.push_back(e.get());
                synthesized.push_back(std::move(e));
            }
        }

        bool aggregate = !s.group_by.empty();
        for (const Expr* e : item_exprs) aggregate = aggregate || sql::contains_aggregate(*e);
        for (const auto& o : s.order_by) aggregate = aggregate || sql::contains_aggregate(*o.expr);

        std::vector<AggSpec> aggs;
        std::vector<std::size_t> bare;
        sc.aggregate = aggregate;

        // WHERE: pushdown candidates and a residual filter.
        std::vector<const Expr*> where;
        conjuncts(s.where.get(), where);
        std::vector<Constraint> constraints;
        std::vector<CExpr> filters;
        for (const Expr* w : where) {
            if (sql::contains_aggregate(*w)) throw QueryError("aggregate in WHERE: " + w->text);
            if (auto c = as_constraint(*w, src)) {
                constraints.push_back(std::move(*c));
            } else {
                Scope fs{src, false, nullptr, nullptr};
                filters.push_back(compile(*w, fs));
            }
        }

        sc.aggs = &aggs;
        sc.bare = &bare;
        std::vector<CExpr> items;
        for (const Expr* e : item_exprs) items.push_back(compile(*e, sc));

        std::vector<CExpr> group_by;
        for (const auto& g : s.group_by) group_by.push_back(compile_group_key(*g, sc, s, item_exprs));

        std::vector<OrderKey> order;
        for (const sql::OrderItem& o : s.order_by) {
            OrderKey k;
            k.descending = o.descending;
            const Expr& e = *o.expr;
            if (e.kind == ExprKind::literal && std::holds_alternative<std::int64_t>(e.literal)) {
                const auto pos = std::get<std::int64_t>(e.literal);
                if (pos < 1 || static_cast<std::size_t>(pos) > items.size()) {
                    throw QueryError("ORDER BY position " + std::to_string(pos) + " is out of range");
                }
                k.output = static_cast<std::size_t>(pos - 1);
            } else if (e.kind == ExprKind::column && e.qualifier.empty()) {
                for (std::size_t i = 0; i < s.items.size() && i < headers.size(); ++i) {
                    if (s.items[i].alias && iequals(*s.items[i].alias, e.name)) k.output = i;
                }
            }
            if (!k.output) k.expr = compile(e, sc);
            order.push_back(std::move(k));
        }

        // Scan order for table sources.
        bool time_order = false;
        if (src.table && order.size() == 1 && !order[0].output && order[0].expr.op == Op::column) {
            time_order = src.is_time_column(order[0].expr.index);
        }
        const bool newest_first = !aggregate && s.order_by.empty() && s.limit.has_value();
        ScanOptions scan;
        scan.combine = (time_order || newest_first) ? CombineMode::sort_merge : CombineMode::append;
        if (catalog_.force_combine) scan.combine = *catalog_.force_combine;
        if (newest_first || (time_order && order[0].descending && !aggregate)) scan.direction = ScanDirection::reverse;
        // Scan order already satisfies ORDER BY / newest-first, so LIMIT can stop the scan.
        const bool scan_is_order = newest_first || (time_order && !aggregate);

        ResultSet result;
        result.columns = headers;

        // count(*) straight from index ranges.
        if (src.table && aggregate && s.group_by.empty() && filters.empty() && items.size() == 1 &&
            items[0].op == Op::agg && aggs.size() == 1 && aggs[0].star && order.empty()) {
            QueryPlan plan = best_index(*src.table, constraints);
            const std::uint64_t n = count_matching(*src.table, plan);
            if (stats_) {
                ++stats_->counted_from_index;
                stats_->plans.push_back(plan);
            }
            if (!s.limit || *s.limit > 0) result.rows.push_back({Value{static_cast<std::int64_t>(n)}});
            return result;
        }

        // Row visitor over the source; returns false to stop early.
        auto scan_rows = [&](auto&& visit) {
            if (src.table) {
                QueryPlan plan = best_index(*src.table, constraints);
                if (PrefetchCache* cache = catalog_.cache()) {
                    if (catalog_.auto_prefetch() && !cache->contains(plan.key())) cache->prefetch(*src.table, plan);
                    scan.cache = cache;
                }
                Cursor cur(*src.table, plan, scan);
                for (; !cur.eof(); cur.next()) {
                    TableRow row(*src.table, cur);
                    if (!passes(filters, row)) continue;
                    if (!visit(static_cast<const Row&>(row))) break;
                }
                if (stats_) {
                    stats_->rows_examined += cur.examined();
                    ++stats_->table_scans;
                    stats_->plans.push_back(std::move(plan));
                    stats_->combine_modes.push_back(scan.combine);
                }
            } else {
                for (const auto& r : src.relation->rows) {
                    VectorRow row(r);
                    if (!passes(filters, row)) continue;
                    if (!visit(static_cast<const Row&>(row))) break;
                }
            }
        };

        std::vector<OutRow> rows;
        const std::size_t limit = s.limit ? static_cast<std::size_t>(*s.limit) : static_cast<std::size_t>(-1);

        if (!aggregate) {
            std::set<std::vector<Value>, RowLess> distinct_seen;
            if (limit == 0) return result;
            scan_rows([&](const Row& row) {
                OutRow o;
                o.out.reserve(items.size());
                for (const CExpr& it : items) o.out.push_back(eval(it, row, nullptr));
                for (const OrderKey& k : order) {
                    if (!k.output) o.keys.push_back(eval(k.expr, row, nullptr));
                }
                if (s.distinct && !distinct_seen.insert(o.out).second) return true;
                rows.push_back(std::move(o));
                return !(scan_is_order && rows.size() >= limit);
            });
        } else {
            // Bare columns follow the row that set the single min/max, else the last row.
            std::optional<std::size_t> extreme_slot;
            std::size_t extremes = 0;
            for (std::size_t i = 0; i < aggs.size(); ++i) {
                if (aggs[i].fn == AggFn::min || aggs[i].fn == AggFn::max) {
                    ++extremes;
                    extreme_slot = i;
                }
            }
            if (extremes != 1) extreme_slot.reset();

            struct Group {
                std::vector<AggState> states;
                std::vector<Value> snapshot;
            };
            std::map<std::vector<Value>, Group, RowLess> groups;
            if (s.group_by.empty()) groups[{}].states.resize(aggs.size());

            scan_rows([&](const Row& row) {
                std::vector<Value> key;
                key.reserve(group_by.size());
                for (const CExpr& g : group_by) key.push_back(eval(g, row, nullptr));
                Group& g = groups[std::move(key)];
                if (g.states.empty()) g.states.resize(aggs.size());
                bool took_extreme = false;
                for (std::size_t i = 0; i < aggs.size(); ++i) {
                    const Value v = aggs[i].star ? Value{} : eval(aggs[i].arg, row, nullptr);
                    const bool moved = g.states[i].add(aggs[i], v);
                    if (extreme_slot && i == *extreme_slot) took_extreme = moved;
                }
                if (!extreme_slot || took_extreme || g.snapshot.size() != bare.size()) {
                    g.snapshot.resize(bare.size());
                    for (std::size_t i = 0; i < bare.size(); ++i) g.snapshot[i] = row.get(bare[i]);
                }
                return true;
            });

            std::vector<std::size_t> slot_of(src.column_count(), static_cast<std::size_t>(-1));
            for (std::size_t i = 0; i < bare.size(); ++i) slot_of[bare[i]] = i;
            for (auto& [key, g] : groups) {
                std::vector<Value> results;
                results.reserve(aggs.size());
                for (std::size_t i = 0; i < aggs.size(); ++i) results.push_back(g.states[i].result(aggs[i]));
                SnapshotRow row(slot_of, g.snapshot);
                OutRow o;
                for (const CExpr& it : items) o.out.push_back(eval(it, row, &results));
                for (const OrderKey& k : order) {
                    if (!k.output) o.keys.push_back(eval(k.expr, row, &results));
                }
                if (s.distinct) {
                    const bool dup = std::any_of(rows.begin(), rows.end(), [&](const OutRow& r) { return r.out == o.out; });
                    if (dup) continue;
                }
                rows.push_back(std::move(o));
            }
        }

        if (!order.empty() && !scan_is_order) {
            std::stable_sort(rows.begin(), rows.end(), [&](const OutRow& a, const OutRow& b) {
                std::size_t ki = 0;
                for (const OrderKey& k : order) {
                    const Value& x = k.output ? a.out[*k.output] : a.keys[ki];
                    const Value& y = k.output ? b.out[*k.output] : b.keys[ki];
                    if (!k.output) ++ki;
                    const int c = compare_values(x, y);
                    if (c != 0) return k.descending ? c > 0 : c < 0;
                }
                return false;
            });
        }
        if (rows.size() > limit) rows.resize(limit);
        result.rows.reserve(rows.size());
        for (auto& r : rows) result.rows.push_back(std::move(r.out));
        return result;
    }

    CExpr compile_group_key(const Expr& g, Scope& sc, const SelectStmt& s, const std::vector<const Expr*>& items) {
        if (sql::contains_aggregate(g)) throw QueryError("aggregate in GROUP BY: " + g.text);
        Scope gs{sc.source, false, nullptr, nullptr};
        if (g.kind == ExprKind::column && g.qualifier.empty() && !sc.source.resolve(g)) {
            // GROUP BY an output alias.
            for (std::size_t i = 0; i < s.items.size() && i < items.size(); ++i) {
                if (s.items[i].alias && iequals(*s.items[i].alias, g.name) && !sql::contains_aggregate(*items[i])) {
                    return compile(*items[i], gs);
                }
            }
        }
        return compile(g, gs);
    }

    static bool passes(const std::vector<CExpr>& filters, const Row& row) {
        for (const CExpr& f : filters) {
            if (!truthy(eval(f, row, nullptr))) return false;
        }
        return true;
    }

    const Catalog& catalog_;
    QueryStats* stats_;
    std::map<std::string, std::shared_ptr<Relation>> ctes_;
};

std::string csv_field(const Value& v) {
    std::string s = to_display(v);
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

void Catalog::add(const LogicalTable& table) {
    const std::string key = lower(table.name());
    for (auto& [name, t] : tables_) {
        if (name == key) {
            t = &table;
            return;
        }
    }
    tables_.emplace_back(key, &table);
}

const LogicalTable* Catalog::find(std::string_view name) const noexcept {
    for (const auto& [key, t] : tables_) {
        if (iequals(key, name)) return t;
    }
    return nullptr;
}

std::vector<std::string> Catalog::names() const {
    std::vector<std::string> out;
    for (const auto& [key, t] : tables_) out.push_back(t->name());
    return out;
}

void write_csv(std::ostream& out, const ResultSet& result) {
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
        if (i) out << ',';
        out << csv_field(Value{result.columns[i]});
    }
    out << '\n';
    for (const auto& row : result.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_field(row[i]);
        }
        out << '\n';
    }
}

std::string to_csv(const ResultSet& result) {
    std::ostringstream os;
    write_csv(os, result);
    return os.str();
}

ResultSet execute_sql(std::string_view text, const Catalog& catalog, QueryStats* stats) {
    const sql::Statement st = sql::parse(text);
    return Executor(catalog, stats).run(st);
}

} // namespace ltss
