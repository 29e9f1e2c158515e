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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ltss::sql {

enum class TokenKind : std::uint8_t {
    identifier, // also keywords; compare with Token::is_keyword
    quoted_identifier,
    integer,
    real,
    string,
    symbol, // operators and punctuation, text holds the spelling
    end,
};

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;
    std::size_t position = 0; ///< Byte offset in the statement.
    std::size_t end = 0;      ///< One past the last byte.
    std::int64_t int_value = 0;
    double real_value = 0.0;

    /// Case-insensitive keyword match on an unquoted identifier.
    bool is_keyword(std::string_view kw) const noexcept;
    bool is_symbol(std::string_view s) const noexcept { return kind == TokenKind::symbol && text == s; }
};

/// Splits a statement into tokens; the last token is always `end`.
/// Throws SqlParseError on an unterminated string or a stray character.
std::vector<Token> tokenize(std::string_view text);

} // namespace ltss::sql
