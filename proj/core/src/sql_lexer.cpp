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

#include "ltss/sql_lexer.hpp"

#include "ltss/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace ltss::sql {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

} // namespace

bool Token::is_keyword(std::string_view kw) const noexcept {
    if (kind != TokenKind::identifier || text.size() != kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(text[i])) != std::toupper(static_cast<unsigned char>(kw[i]))) {
            return false;
        }
    }
    return true;
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
            while (i < s.size() && s[i] != '\n') ++i;
            continue;
        }
        Token t;
        t.position = i;
        if (ident_start(c)) {
            const std::size_t b = i;
            while (i < s.size() && ident_char(s[i])) ++i;
            t.kind = TokenKind::identifier;
            t.text = std::string(s.substr(b, i - b));
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            const std::size_t b = i;
            bool real = false;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && s[i] == '.') {
                real = true;
                ++i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
                if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                    real = true;
                    i = j;
                    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                }
            }
            t.text = std::string(s.substr(b, i - b));
            if (!real) {
                auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.int_value);
                if (ec != std::errc()) real = true; // too large for int64
            }
            if (real) {
                t.kind = TokenKind::real;
                t.real_value = std::strtod(t.text.c_str(), nullptr);
            } else {
                t.kind = TokenKind::integer;
            }
        } else if (c == '\'' || c == '"') {
            const char quote = c;
            ++i;
            std::string text;
            for (;;) {
                if (i >= s.size()) throw SqlParseError("unterminated quoted text", t.position);
                if (s[i] == quote) {
                    if (i + 1 < s.size() && s[i + 1] == quote) {
                        text += quote;
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                text += s[i++];
            }
            t.kind = quote == '\'' ? TokenKind::string : TokenKind::quoted_identifier;
            t.text = std::move(text);
        } else {
            static constexpr std::string_view kTwo[] = {"==", "!=", "<>", "<=", ">=", "||"};
            t.kind = TokenKind::symbol;
            for (std::string_view two : kTwo) {
                if (s.substr(i, 2) == two) t.text = std::string(two);
            }
            if (t.text.empty()) {
                static constexpr std::string_view kOne = "(),.;*+-/%=<>";
                if (kOne.find(c) == std::string_view::npos) {
                    throw SqlParseError(std::string("unexpected character '") + c + "'", i);
                }
                t.text = std::string(1, c);
            }
            i += t.text.size();
        }
        t.end = i;
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = TokenKind::end;
    end.position = s.size();
    end.end = s.size();
    out.push_back(end);
    return out;
}

} // namespace ltss::sql
