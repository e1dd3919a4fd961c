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

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace socnav {

std::string base64_encode(std::span<const unsigned char> bytes);
/// Throws ParseError on invalid input.
std::vector<unsigned char> base64_decode(std::string_view text);

/// Little-endian IEEE-754 float32 arrays.
std::string encode_floats(std::span<const float> values);
/// Throws ParseError when the payload is not a whole number of floats, and
/// ValidationError when `expected` is given and the count differs.
std::vector<float> decode_floats(std::string_view text, std::size_t expected = 0);

}  // namespace socnav
