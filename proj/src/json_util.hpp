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

// Strict reading helpers over nlohmann::json: every accessor carries the JSON
// path of the value so errors point at the offending field.

#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <json.hpp>

#include "socnav/core.hpp"
#include "socnav/error.hpp"

namespace socnav::detail {

using json = nlohmann::json;

inline std::string child_path(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
inline std::string child_path(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

/// Line and column (1-based) of a byte offset.
inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return fmt::format("line {}, column {}", line, col);
}

inline json parse_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(line_column(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
    }
}

inline void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ParseError(path.empty() ? "/" : path, "expected an object");
}

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    expect_object(j, path);
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError(child_path(path, key), "unknown field");
        }
    }
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(path, "number must be finite");
    return v;
}

inline double number_or(const json& obj, const std::string& path, std::string_view key, double fallback) {
    const auto it = obj.find(std::string(key));
    return it == obj.end() ? fallback : as_number(*it, child_path(path, key));
}

inline long long integer_or(const json& obj, const std::string& path, std::string_view key, long long fallback) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) throw ParseError(child_path(path, key), "expected an integer");
    return it->get<long long>();
}

inline bool bool_or(const json& obj, const std::string& path, std::string_view key, bool fallback) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) throw ParseError(child_path(path, key), "expected a boolean");
    return it->get<bool>();
}

inline std::string string_or(const json& obj, const std::string& path, std::string_view key, std::string fallback) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_string()) throw ParseError(child_path(path, key), "expected a string");
    return it->get<std::string>();
}

inline const json& required(const json& obj, const std::string& path, std::string_view key) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) throw ParseError(child_path(path, key), "missing required field");
    return *it;
}

inline Vec2 as_vec2(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw ParseError(path, "expected [x, y]");
    return {as_number(j[0], child_path(path, 0)), as_number(j[1], child_path(path, 1))};
}

inline json to_json(const Vec2& v) { return json::array({v.x, v.y}); }

}  // namespace socnav::detail
