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

// Binary state file for VectorCounter. All integers little-endian.
//
//   "VCNT"  u16 version
//   config: u64 n, u64 d, f64 sigma, u64 a, u64 m_star, u64 u_star,
//           u64 trigger, u64 deterministic_mode
//   state:  u64 U, u64 d, u64 V[d], u8 flags (bit0 failed, bit1 exact present),
//           u64 exact[d] when present, u64 increments
//   rng:    u64 seed, u64 s[4], u64 word, u8 bits_left, u64 bits_consumed
//   u32 CRC-32 of every preceding byte

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include <zlib.h>

#include "veccount/counter.hpp"
#include "veccount/error.hpp"

namespace veccount {

inline constexpr std::uint16_t kStateVersion = 1;

namespace detail {

class ByteWriter {
public:
    void put_u8(std::uint8_t v) { bytes_.push_back(v); }
    void put_u16(std::uint16_t v) { put_le(v, 2); }
    void put_u32(std::uint32_t v) { put_le(v, 4); }
    void put_u64(std::uint64_t v) { put_le(v, 8); }
    void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }
    void put_raw(const char* s, std::size_t n) { bytes_.insert(bytes_.end(), s, s + n); }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    void put_le(std::uint64_t v, int width) {
        for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t pos() const noexcept { return pos_; }

private:
    std::uint64_t le(int width) {
        if (pos_ + width > bytes_.size()) fail(errc::corrupt_state, "truncated state");
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += width;
        return v;
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    return static_cast<std::uint32_t>(
        ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const VectorCounter& counter) {
    const CounterConfig& c = counter.config();
    const CounterState& s = counter.state();
    detail::ByteWriter w;
    w.put_raw("VCNT", 4);
    w.put_u16(kStateVersion);

    w.put_u64(c.n);
    w.put_u64(c.d);
    w.put_f64(c.sigma);
    w.put_u64(c.a);
    w.put_u64(c.m_star);
    w.put_u64(c.u_star);
    w.put_u64(static_cast<std::uint64_t>(c.trigger));
    w.put_u64(c.deterministic_mode ? 1 : 0);

    w.put_u64(s.u);
    w.put_u64(s.v.size());
    for (std::uint64_t vk : s.v) w.put_u64(vk);
    w.put_u8(static_cast<std::uint8_t>((s.failed ? 1u : 0u) | (s.exact ? 2u : 0u)));
    if (s.exact)
        for (std::uint64_t xk : *s.exact) w.put_u64(xk);
    w.put_u64(counter.increments());

    const RandomSource::Snapshot r = counter.rng().snapshot();
    w.put_u64(r.seed);
    for (std::uint64_t word : r.s) w.put_u64(word);
    w.put_u64(r.word);
    w.put_u8(r.bits_left);
    w.put_u64(r.bits_consumed);

    w.put_u32(detail::crc32_of(w.bytes()));
    return std::move(w.bytes());
}

inline VectorCounter deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 10 || std::memcmp(bytes.data(), "VCNT", 4) != 0)
        fail(errc::corrupt_state, "bad magic");
    const std::size_t body = bytes.size() - 4;
    detail::ByteReader tail(bytes.subspan(body));
    if (tail.u32() != detail::crc32_of(bytes.first(body))) fail(errc::corrupt_state, "checksum mismatch");

    detail::ByteReader r(bytes.first(body));
    r.u32();  // magic
    if (r.u16() != kStateVersion) fail(errc::corrupt_state, "unsupported version");

    CounterConfig c;
    c.n = r.u64();
    c.d = r.u64();
    c.sigma = r.f64();
    c.a = r.u64();
    c.m_star = r.u64();
    c.u_star = r.u64();
    const std::uint64_t trig = r.u64();
    if (trig > 1) fail(errc::corrupt_state, "unknown trigger");
    c.trigger = static_cast<Trigger>(trig);
    const std::uint64_t det = r.u64();
    if (det > 1) fail(errc::corrupt_state, "bad mode flag");
    c.deterministic_mode = det == 1;
    if (c.d < 1 || c.d > body / 8) fail(errc::corrupt_state, "implausible dimension");

    CounterState s;
    s.u = r.u64();
    if (r.u64() != c.d) fail(errc::corrupt_state, "dimension mismatch");
    s.v.resize(c.d);
    for (auto& vk : s.v) vk = r.u64();
    const std::uint8_t flags = r.u8();
    if (flags & ~3u) fail(errc::corrupt_state, "unknown flags");
    s.failed = flags & 1u;
    if (flags & 2u) {
        s.exact.emplace(c.d);
        for (auto& xk : *s.exact) xk = r.u64();
    }
    const std::uint64_t increments = r.u64();

    RandomSource::Snapshot snap;
    snap.seed = r.u64();
    for (auto& word : snap.s) word = r.u64();
    snap.word = r.u64();
    snap.bits_left = r.u8();
    snap.bits_consumed = r.u64();
    if (snap.bits_left > 64) fail(errc::corrupt_state, "bad bit buffer");
    if (r.pos() != body) fail(errc::corrupt_state, "trailing bytes");

    return VectorCounter(c, std::move(s), snap, increments);
}

}  // namespace veccount
