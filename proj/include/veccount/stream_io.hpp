// Copyright 2026 The veccount Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Stream files.
//
// Text form: a header line "d=<d>" followed by one 1-based coordinate per
// line. Blank lines and surrounding whitespace are ignored.
// Binary form: little-endian u32 1-based coordinates, no header.
//
// In memory, coordinates are 0-based.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "veccount/error.hpp"

namespace veccount {

struct Stream {
    std::size_t d = 0;
    std::vector<std::uint32_t> events;  // 0-based coordinates

    std::vector<std::uint64_t> counts() const {
        std::vector<std::uint64_t> x(d, 0);
        for (std::uint32_t e : events) ++x[e];
        return x;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

inline Stream read_stream_text(std::istream& in) {
    Stream s;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view t = detail::trim(line);
        if (t.empty()) continue;
        if (!have_header) {
            if (t.substr(0, 2) != "d=" || !detail::parse_uint(t.substr(2), s.d) || s.d < 1)
                fail(errc::stream_file_error, "line " + std::to_string(lineno) + ": expected header d=<d>");
            have_header = true;
            continue;
        }
        std::uint64_t idx = 0;
        if (!detail::parse_uint(t, idx) || idx < 1 || idx > s.d)
            fail(errc::stream_file_error, "line " + std::to_string(lineno) + ": coordinate out of range");
        s.events.push_back(static_cast<std::uint32_t>(idx - 1));
    }
    if (!have_header) fail(errc::stream_file_error, "missing header d=<d>");
    return s;
}

inline Stream read_stream_binary(std::istream& in, std::size_t d) {
    if (d < 1) fail(errc::stream_file_error, "binary streams need a dimension");
    const std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() % 4 != 0) fail(errc::stream_file_error, "binary stream length is not a multiple of 4");
    Stream s;
    s.d = d;
    s.events.reserve(raw.size() / 4);
    for (std::size_t i = 0; i < raw.size(); i += 4) {
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[i + b])) << (8 * b);
        if (v < 1 || v > d) fail(errc::stream_file_error, "coordinate out of range at record " + std::to_string(i / 4));
        s.events.push_back(v - 1);
    }
    return s;
}

inline Stream read_stream_file(const std::string& path, bool binary = false, std::size_t d = 0) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) fail(errc::stream_file_error, "cannot open " + path);
    return binary ? read_stream_binary(in, d) : read_stream_text(in);
}

inline void write_stream_text(std::ostream& out, const Stream& s) {
    out << "d=" << s.d << '\n';
    for (std::uint32_t e : s.events) out << (e + 1) << '\n';
}

}  // namespace veccount
