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

#include "ltss/error.hpp"
#include "ltss/sql_ast.hpp"
#include "ltss/sql_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ltss::sql {

namespace {

constexpr std::array<std::string_view, 42> kReserved = {
    "SELECT", "FROM",    "WHERE",  "GROUP",     "ORDER",  "BY",     "LIMIT", "OFFSET", "AS",       "AND", "OR",
    "NOT",    "IN",      "WITH",   "DISTINCT",  "ASC",    "DESC",   "JOIN",  "INNER",  "LEFT",     "RIGHT",
    "CROSS",  "NATURAL", "FULL",   "OUTER",     "ON",     "USING",  "HAVING", "UNION", "INTERSECT", "EXCEPT",
    "WINDOW", "OVER",    "LIKE",   "BETWEEN",   "IS",     "CASE",   "WHEN",  "THEN",   "ELSE",     "END", "ALL"};

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

class Parser {
public:
    Parser(std::string_view text) : text_(text), tokens_(tokenize(text)) {}

    Statement statement() {
        Statement st;
        reject_statement_kinds();
        if (accept_kw("WITH")) {
            if (peek().is_keyword("RECURSIVE")) throw UnsupportedSqlError("WITH RECURSIVE");
            do {
                st.ctes.push_back(common_table());
            } while (accept_sym(","));
        }
        st.select = select(/*allow_with=*/false);
        accept_sym(";");
        if (peek().kind != TokenKind::end) {
            reject_trailing();
            fail("unexpected '" + peek().text + "' after end of statement");
        }
        return st;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
    }
    const Token& take() {
        const Token& t = tokens_[pos_];
        if (pos_ + 1 < tokens_.size()) ++pos_;
        return t;
    }
    bool accept_kw(std::string_view kw) {
        if (!peek().is_keyword(kw)) return false;
        take();
        return true;
    }
    bool accept_sym(std::string_view s) {
        if (!peek().is_symbol(s)) return false;
        take();
        return true;
    }
    [[noreturn]] void fail(const std::string& what) const { throw SqlParseError(what, peek().position); }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail("expected " + std::string(kw) + " but found '" + describe(peek()) + "'");
    }
    void expect_sym(std::string_view s) {
        if (!accept_sym(s)) fail("expected '" + std::string(s) + "' but found '" + describe(peek()) + "'");
    }
    static std::string describe(const Token& t) { return t.kind == TokenKind::end ? "end of input" : t.text; }

    static bool reserved(const Token& t) {
        if (t.kind != TokenKind::identifier) return false;
        const std::string u = upper(t.text);
        return std::find(kReserved.begin(), kReserved.end(), u) != kReserved.end();
    }

    std::string identifier(const char* what) {
        const Token& t = peek();
        if (t.kind == TokenKind::quoted_identifier || (t.kind == TokenKind::identifier && !reserved(t))) {
            return take().text;
        }
        fail(std::string("expected ") + what + " but found '" + describe(t) + "'");
    }

    void reject_statement_kinds() {
        static constexpr std::string_view kWrites[] = {"INSERT", "UPDATE", "DELETE", "CREATE", "DROP",
                                                       "ALTER",  "REPLACE", "PRAGMA", "ATTACH", "VACUUM"};
        for (std::string_view w : kWrites) {
            if (peek().is_keyword(w)) throw UnsupportedSqlError(std::string(w) + " statement");
        }
    }

    void reject_trailing() {
        static constexpr std::string_view kSetOps[] = {"UNION", "INTERSECT", "EXCEPT"};
        for (std::string_view op : kSetOps) {
            if (peek().is_keyword(op)) throw UnsupportedSqlError(std::string(op));
        }
        if (peek().is_keyword("HAVING")) throw UnsupportedSqlError("HAVING");
        if (peek().is_keyword("OFFSET")) throw UnsupportedSqlError("OFFSET");
        if (peek().is_keyword("WINDOW")) throw UnsupportedSqlError("WINDOW clause");
    }

    CommonTable common_table() {
        CommonTable cte;
        cte.name = identifier("common table name");
        if (accept_sym("(")) {
            do {
                cte.columns.push_back(identifier("column name"));
            } while (accept_sym(","));
            expect_sym(")");
        }
        expect_kw("AS");
        expect_sym("(");
        cte.select = select(false);
        expect_sym(")");
        return cte;
    }

    std::unique_ptr<SelectStmt> select(bool allow_with) {
        (void)allow_with;
        if (peek().is_keyword("WITH")) throw UnsupportedSqlError("nested WITH");
        expect_kw("SELECT");
        auto s = std::make_unique<SelectStmt>();
        if (accept_kw("DISTINCT")) {
            s->distinct = true;
        } else {
            accept_kw("ALL");
        }
        do {
            SelectItem item;
            if (accept_sym("*")) {
                s->items.push_back(std::move(item));
                continue;
            }
            item.expr = expr();
            if (accept_kw("AS")) {
                item.alias = identifier("column alias");
            } else if (peek().kind == TokenKind::quoted_identifier ||
                       (peek().kind == TokenKind::identifier && !reserved(peek()))) {
                item.alias = take().text;
            }
            s->items.push_back(std::move(item));
        } while (accept_sym(","));

        expect_kw("FROM");
        if (accept_sym("(")) {
            s->from.subquery = select(false);
            expect_sym(")");
            s->from.name = "subquery";
        } else {
            s->from.name = identifier("table name");
        }
        if (accept_kw("AS")) {
            s->from.alias = identifier("table alias");
        } else if (peek().kind == TokenKind::identifier && !reserved(peek())) {
            s->from.alias = take().text;
        }
        static constexpr std::string_view kJoins[] = {"JOIN", "INNER", "LEFT", "RIGHT", "CROSS", "NATURAL", "FULL"};
        for (std::string_view j : kJoins) {
            if (peek().is_keyword(j)) throw UnsupportedSqlError("JOIN");
        }
        if (peek().is_symbol(",")) throw UnsupportedSqlError("JOIN (comma-separated FROM list)");

        if (accept_kw("WHERE")) s->where = expr();
        if (accept_kw("GROUP")) {
            expect_kw("BY");
            do {
                s->group_by.push_back(expr());
            } while (accept_sym(","));
        }
        if (peek().is_keyword("HAVING")) throw UnsupportedSqlError("HAVING");
        if (accept_kw("ORDER")) {
            expect_kw("BY");
            do {
                OrderItem o;
                o.expr = expr();
                if (accept_kw("DESC")) {
                    o.descending = true;
                } else {
                    accept_kw("ASC");
                }
                s->order_by.push_back(std::move(o));
            } while (accept_sym(","));
        }
        if (accept_kw("LIMIT")) {
            const Token& t = peek();
            if (t.kind != TokenKind::integer || t.int_value < 0) fail("LIMIT expects a non-negative integer");
            s->limit = take().int_value;
            if (peek().is_keyword("OFFSET") || peek().is_symbol(",")) throw UnsupportedSqlError("OFFSET");
        }
        reject_trailing();
        return s;
    }

    // Expressions, lowest precedence first.

    ExprPtr finish(ExprPtr e, std::size_t first_token) {
        const std::size_t b = tokens_[first_token].position;
        const std::size_t end = tokens_[pos_ > 0 ? pos_ - 1 : 0].end;
        e->text = std::string(text_.substr(b, end > b ? end - b : 0));
        return e;
    }

    ExprPtr binary(ExprKind kind, ExprPtr l, ExprPtr r, std::size_t first) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->args.push_back(std::move(l));
        e->args.push_back(std::move(r));
        return finish(std::move(e), first);
    }

    ExprPtr expr() { return or_expr(); }

    ExprPtr or_expr() {
        const std::size_t first = pos_;
        ExprPtr l = and_expr();
        while (accept_kw("OR")) l = binary(ExprKind::logical_or, std::move(l), and_expr(), first);
        return l;
    }

    ExprPtr and_expr() {
        const std::size_t first = pos_;
        ExprPtr l = not_expr();
        while (accept_kw("AND")) l = binary(ExprKind::logical_and, std::move(l), not_expr(), first);
        return l;
    }

    ExprPtr not_expr() {
        const std::size_t first = pos_;
        if (accept_kw("NOT")) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::logical_not;
            e->args.push_back(not_expr());
            return finish(std::move(e), first);
        }
        return comparison();
    }

    ExprPtr comparison() {
        const std::size_t first = pos_;
        ExprPtr l = additive();
        for (;;) {
            if (peek().is_keyword("LIKE") || peek().is_keyword("GLOB")) throw UnsupportedSqlError("LIKE");
            if (peek().is_keyword("BETWEEN")) throw UnsupportedSqlError("BETWEEN");
            if (peek().is_keyword("IS")) throw UnsupportedSqlError("IS [NOT] NULL");
            bool negated = false;
            if (peek().is_keyword("NOT") && peek(1).is_keyword("IN")) {
                take();
                negated = true;
            }
            if (accept_kw("IN")) {
                l = in_expr(std::move(l), negated, first);
                continue;
            }
            std::optional<CompareOp> op;
            const Token& t = peek();
            if (t.is_symbol("=") || t.is_symbol("==")) op = CompareOp::eq;
            else if (t.is_symbol("!=") || t.is_symbol("<>")) op = CompareOp::ne;
            else if (t.is_symbol("<")) op = CompareOp::lt;
            else if (t.is_symbol("<=")) op = CompareOp::le;
            else if (t.is_symbol(">")) op = CompareOp::gt;
            else if (t.is_symbol(">=")) op = CompareOp::ge;
            if (!op) return l;
            take();
            auto e = binary(ExprKind::compare, std::move(l), additive(), first);
            e->cmp = *op;
            l = std::move(e);
        }
    }

    ExprPtr in_expr(ExprPtr lhs, bool negated, std::size_t first) {
        expect_sym("(");
        auto e = std::make_unique<Expr>();
        e->negated = negated;
        e->args.push_back(std::move(lhs));
        if (peek().is_keyword("SELECT")) {
            e->kind = ExprKind::in_select;
            e->subquery = select(false);
        } else {
            e->kind = ExprKind::in_list;
            do {
                e->args.push_back(expr());
            } while (accept_sym(","));
        }
        expect_sym(")");
        return finish(std::move(e), first);
    }

    ExprPtr additive() {
        const std::size_t first = pos_;
        ExprPtr l = multiplicative();
        for (;;) {
            ArithOp op;
            if (accept_sym("+")) op = ArithOp::add;
            else if (accept_sym("-")) op = ArithOp::sub;
            else if (peek().is_symbol("||")) throw UnsupportedSqlError("string concatenation (||)");
            else return l;
            auto e = binary(ExprKind::arithmetic, std::move(l), multiplicative(), first);
            e->arith = op;
            l = std::move(e);
        }
    }

    ExprPtr multiplicative() {
        const std::size_t first = pos_;
        ExprPtr l = unary();
        for (;;) {
            ArithOp op;
            if (accept_sym("*")) op = ArithOp::mul;
            else if (accept_sym("/")) op = ArithOp::div;
            else if (accept_sym("%")) op = ArithOp::mod;
            else return l;
            auto e = binary(ExprKind::arithmetic, std::move(l), unary(), first);
            e->arith = op;
            l = std::move(e);
        }
    }

    ExprPtr unary() {
        const std::size_t first = pos_;
        if (accept_sym("-")) {
            ExprPtr operand = unary();
            // Fold negative literals so constraints stay simple.
            if (operand->kind == ExprKind::literal) {
                if (auto* i = std::get_if<std::int64_t>(&operand->literal)) {
                    operand->literal = -*i;
                    return finish(std::move(operand), first);
                }
                if (auto* d = std::get_if<double>(&operand->literal)) {
                    operand->literal = -*d;
                    return finish(std::move(operand), first);
                }
            }
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::negate;
            e->args.push_back(std::move(operand));
            return finish(std::move(e), first);
        }
        if (accept_sym("+")) return unary();
        return primary();
    }

    ExprPtr primary() {
        const std::size_t first = pos_;
        const Token& t = peek();
        auto e = std::make_unique<Expr>();
        switch (t.kind) {
        case TokenKind::integer:
            e->literal = take().int_value;
            return finish(std::move(e), first);
        case TokenKind::real:
            e->literal = take().real_value;
            return finish(std::move(e), first);
        case TokenKind::string:
            e->literal = take().text;
            return finish(std::move(e), first);
        case TokenKind::symbol:
            if (accept_sym("(")) {
                if (peek().is_keyword("SELECT")) throw UnsupportedSqlError("scalar subquery");
                ExprPtr inner = expr();
                expect_sym(")");
                return finish(std::move(inner), first);
            }
            fail("unexpected '" + t.text + "' in expression");
        case TokenKind::end:
            fail("unexpected end of input in expression");
        case TokenKind::identifier:
        case TokenKind::quoted_identifier:
            break;
        }
        if (t.is_keyword("CASE")) throw UnsupportedSqlError("CASE expression");
        if (t.kind == TokenKind::identifier && t.is_keyword("NULL")) throw UnsupportedSqlError("NULL literal");
        if (t.kind == TokenKind::identifier && reserved(t)) fail("unexpected keyword '" + t.text + "'");

        const std::string name = take().text;
        if (t.kind == TokenKind::identifier && peek().is_symbol("(")) return call(name, first);
        e->kind = ExprKind::column;
        if (accept_sym(".")) {
            e->qualifier = name;
            e->name = identifier("column name");
        } else {
            e->name = name;
        }
        return finish(std::move(e), first);
    }

    ExprPtr call(const std::string& name, std::size_t first) {
        const std::string fn = upper(name);
        AggFn agg;
        if (fn == "COUNT") agg = AggFn::count;
        else if (fn == "SUM") agg = AggFn::sum;
        else if (fn == "AVG") agg = AggFn::avg;
        else if (fn == "MIN") agg = AggFn::min;
        else if (fn == "MAX") agg = AggFn::max;
        else throw UnsupportedSqlError("function '" + name + "'");
        expect_sym("(");
        auto e = std::make_unique<Expr>();
        e->kind = ExprKind::aggregate;
        e->agg = agg;
        if (accept_sym("*")) {
            if (agg != AggFn::count) fail("'*' is only valid in count(*)");
            e->star = true;
        } else {
            if (accept_kw("DISTINCT")) e->distinct = true;
            e->args.push_back(expr());
            if (peek().is_symbol(",")) fail(std::string(to_string(agg)) + "() takes one argument");
            if (contains_aggregate(*e->args.front())) fail("nested aggregate");
        }
        expect_sym(")");
        if (peek().is_keyword("OVER")) throw UnsupportedSqlError("window function (OVER)");
        if (peek().is_keyword("FILTER")) throw UnsupportedSqlError("aggregate FILTER");
        return finish(std::move(e), first);
    }

    std::string_view text_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

} // namespace

const char* to_string(AggFn fn) noexcept {
    switch (fn) {
    case AggFn::count: return "count";
    case AggFn::sum: return "sum";
    case AggFn::avg: return "avg";
    case AggFn::min: return "min";
    case AggFn::max: return "max";
    }
    return "?";
}

bool contains_aggregate(const Expr& e) noexcept {
    if (e.kind == ExprKind::aggregate) return true;
    return std::any_of(e.args.begin(), e.args.end(), [](const ExprPtr& a) { return a && contains_aggregate(*a); });
}

Statement parse(std::string_view text) { return Parser(text).statement(); }

} // namespace ltss::sql
