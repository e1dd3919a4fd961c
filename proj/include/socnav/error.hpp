// Copyright 2026 The socnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace socnav {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant (action bounds, shapes, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file or message could not be parsed. `where` names the line, byte offset
/// or JSON path of the offending token.
class ParseError : public Error {
public:
    ParseError(std::string where, std::string detail)
        : Error(where.empty() ? detail : where + ": " + detail), where_(std::move(where)), detail_(std::move(detail)) {}

    const std::string& where() const noexcept { return where_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string where_;
    std::string detail_;
};

/// A file could not be opened for reading or writing.
class IoError : public Error {
public:
    using Error::Error;
};

/// A scenario generator gave up placing an entity.
class PlacementError : public Error {
public:
    using Error::Error;
};

}  // namespace socnav
