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

#include "socnav/base64.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "socnav/error.hpp"

namespace socnav {

static_assert(std::endian::native == std::endian::little, "float payloads assume a little-endian host");

std::string base64_encode(std::span<const unsigned char> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    if (bytes.empty()) return out;
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw ParseError("base64", fmt::format("length {} is not a multiple of 4", text.size()));
    std::vector<unsigned char> out(3 * (text.size() / 4));
    if (text.empty()) return out;
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw ParseError("base64", "invalid character");
    // EVP_DecodeBlock keeps the zero bytes standing in for '=' padding.
    std::size_t pad = 0;
    if (text.back() == '=') ++pad;
    if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

std::string encode_floats(std::span<const float> values) {
    return base64_encode({reinterpret_cast<const unsigned char*>(values.data()), values.size() * sizeof(float)});
}

std::vector<float> decode_floats(std::string_view text, std::size_t expected) {
    const std::vector<unsigned char> bytes = base64_decode(text);
    if (bytes.size() % sizeof(float) != 0) {
        throw ParseError("base64", fmt::format("{} bytes is not a whole number of float32 values", bytes.size()));
    }
    std::vector<float> out(bytes.size() / sizeof(float));
    std::memcpy(out.data(), bytes.data(), bytes.size());
    if (expected != 0 && out.size() != expected) {
        throw ValidationError(fmt::format("expected {} floats, got {}", expected, out.size()));
    }
    return out;
}

}  // namespace socnav
