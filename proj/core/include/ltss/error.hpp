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

#include <stdexcept>
#include <string>

namespace ltss {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

/// Invalid calendar value, unparseable time text, or a year outside 2000-2031.
class TimeError : public Error {
public:
    using Error::Error;
};

class StoreError : public Error {
public:
    using Error::Error;
};

/// I/O failure with the originating errno preserved.
class IoError : public StoreError {
public:
    IoError(const std::string& what, int err);
    int error_code() const noexcept { return errno_; }

private:
    int errno_;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class QueryError : public Error {
public:
    using Error::Error;
};

class SqlParseError : public QueryError {
public:
    SqlParseError(const std::string& what, std::size_t position);
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// A syntactically valid construct outside the supported SQL subset.
class UnsupportedSqlError : public QueryError {
public:
    explicit UnsupportedSqlError(const std::string& construct);
    const std::string& construct() const noexcept { return construct_; }

private:
    std::string construct_;
};

} // namespace ltss
