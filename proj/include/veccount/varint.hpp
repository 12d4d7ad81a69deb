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

// Ternary variable-length integer code used to budget the relative vector.
//
//   0 -> "|"     1 -> "0|"     k >= 2 -> binary(k - 1) followed by "|"
//
// The length psi(k) grows like log2(k) so a vector of small and large
// entries shares one symbol budget. Codes render as text over the
// characters '0', '1' and '|'.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "veccount/error.hpp"

namespace veccount {

enum class Symbol : std::uint8_t { zero = 0, one = 1, sep = 2 };

inline constexpr char to_char(Symbol s) noexcept {
    return s == Symbol::zero ? '0' : s == Symbol::one ? '1' : '|';
}

class SymbolString {
public:
    SymbolString() = default;
    explicit SymbolString(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

    /// Parses the textual form; any character outside {'0','1','|'} is MalformedCode.
    static SymbolString parse(std::string_view text) {
        std::vector<Symbol> out;
        out.reserve(text.size());
        for (char c : text) {
            switch (c) {
                case '0': out.push_back(Symbol::zero); break;
                case '1': out.push_back(Symbol::one); break;
                case '|': out.push_back(Symbol::sep); break;
                default: fail(errc::malformed_code, "unexpected character in symbol string");
            }
        }
        return SymbolString(std::move(out));
    }

    std::string str() const {
        std::string s;
        s.reserve(symbols_.size());
        for (Symbol sym : symbols_) s.push_back(to_char(sym));
        return s;
    }

    std::size_t size() const noexcept { return symbols_.size(); }
    bool empty() const noexcept { return symbols_.empty(); }
    Symbol operator[](std::size_t i) const { return symbols_[i]; }
    std::span<const Symbol> symbols() const noexcept { return symbols_; }

    void push_back(Symbol s) { symbols_.push_back(s); }
    void append(const SymbolString& other) {
        symbols_.insert(symbols_.end(), other.symbols_.begin(), other.symbols_.end());
    }

    friend bool operator==(const SymbolString&, const SymbolString&) = default;

private:
    std::vector<Symbol> symbols_;
};

/// Code length of k in symbols.
inline constexpr std::uint64_t psi(std::uint64_t k) noexcept {
    if (k == 0) return 1;
    if (k == 1) return 2;
    return 1 + static_cast<std::uint64_t>(std::bit_width(k - 1));
}

inline std::uint64_t psi_vec(std::span<const std::uint64_t> v) noexcept {
    std::uint64_t total = 0;
    for (std::uint64_t k : v) total += psi(k);
    return total;
}

namespace detail {

inline void append_code(SymbolString& out, std::uint64_t k) {
    if (k == 1) {
        out.push_back(Symbol::zero);
    } else if (k >= 2) {
        const std::uint64_t b = k - 1;
        for (int bit = std::bit_width(b) - 1; bit >= 0; --bit)
            out.push_back(((b >> bit) & 1u) ? Symbol::one : Symbol::zero);
    }
    out.push_back(Symbol::sep);
}

}  // namespace detail

inline SymbolString encode_int(std::uint64_t k) {
    SymbolString out;
    detail::append_code(out, k);
    return out;
}

struct DecodedInt {
    std::uint64_t value;
    std::size_t consumed;
};

/// Decodes one scalar code starting at `offset`.
inline DecodedInt decode_int(const SymbolString& s, std::size_t offset) {
    std::size_t pos = offset;
    if (pos >= s.size()) fail(errc::malformed_code, "no code at offset");
    if (s[pos] == Symbol::sep) return {0, 1};

    // "0|" is the only code whose binary part starts with a zero.
    if (s[pos] == Symbol::zero) {
        if (pos + 1 < s.size() && s[pos + 1] == Symbol::sep) return {1, 2};
        if (pos + 1 >= s.size()) fail(errc::malformed_code, "missing separator");
        fail(errc::malformed_code, "illegal leading zero");
    }

    std::uint64_t b = 0;
    while (pos < s.size() && s[pos] != Symbol::sep) {
        if (b > (std::numeric_limits<std::uint64_t>::max() >> 1))
            fail(errc::malformed_code, "value exceeds 64 bits");
        b = (b << 1) | (s[pos] == Symbol::one ? 1u : 0u);
        ++pos;
    }
    if (pos >= s.size()) fail(errc::malformed_code, "missing separator");
    if (b == std::numeric_limits<std::uint64_t>::max())
        fail(errc::malformed_code, "value exceeds 64 bits");
    return {b + 1, pos + 1 - offset};
}

inline SymbolString encode_vec(std::span<const std::uint64_t> v) {
    SymbolString out;
    for (std::uint64_t k : v) detail::append_code(out, k);
    return out;
}

inline std::vector<std::uint64_t> decode_vec(const SymbolString& s, std::size_t d) {
    std::vector<std::uint64_t> out;
    out.reserve(d);
    std::size_t pos = 0;
    while (pos < s.size()) {
        if (out.size() == d) fail(errc::arity_mismatch, "more codes than dimension");
        const DecodedInt r = decode_int(s, pos);
        out.push_back(r.value);
        pos += r.consumed;
    }
    if (out.size() != d) fail(errc::arity_mismatch, "fewer codes than dimension");
    return out;
}

// ---------------------------------------------------------------------------
// Radix-3 packing. The symbol sequence is read as a base-3 numeral (first
// symbol most significant) and stored in the minimal number of bits that
// can hold any numeral of that length, i.e. ceil(m * log2 3).

namespace detail {

// Little-endian base-2^32 magnitude; just enough arithmetic for radix conversion.
class BigUint {
public:
    void mul_add(std::uint32_t mul, std::uint32_t add) {
        std::uint64_t carry = add;
        for (auto& limb : limbs_) {
            const std::uint64_t t = static_cast<std::uint64_t>(limb) * mul + carry;
            limb = static_cast<std::uint32_t>(t);
            carry = t >> 32;
        }
        if (carry) limbs_.push_back(static_cast<std::uint32_t>(carry));
    }

    std::uint32_t divmod(std::uint32_t div) {
        std::uint64_t rem = 0;
        for (auto it = limbs_.rbegin(); it != limbs_.rend(); ++it) {
            const std::uint64_t cur = (rem << 32) | *it;
            *it = static_cast<std::uint32_t>(cur / div);
            rem = cur % div;
        }
        trim();
        return static_cast<std::uint32_t>(rem);
    }

    std::size_t bit_width() const noexcept {
        if (limbs_.empty()) return 0;
        return 32 * (limbs_.size() - 1) + static_cast<std::size_t>(std::bit_width(limbs_.back()));
    }

    bool bit(std::size_t i) const noexcept {
        const std::size_t limb = i / 32;
        return limb < limbs_.size() && ((limbs_[limb] >> (i % 32)) & 1u);
    }

    void set_bit(std::size_t i) {
        const std::size_t limb = i / 32;
        if (limb >= limbs_.size()) limbs_.resize(limb + 1, 0);
        limbs_[limb] |= 1u << (i % 32);
    }

    bool is_zero() const noexcept { return limbs_.empty(); }

private:
    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    }

    std::vector<std::uint32_t> limbs_;
};

}  // namespace detail

/// ceil(m * log2 3), computed exactly as the bit width of 3^m - 1.
inline std::size_t ternary_bits(std::uint64_t m) {
    if (m == 0) return 0;
    detail::BigUint p;
    p.mul_add(1, 1);
    for (std::uint64_t i = 0; i < m; ++i) p.mul_add(3, 0);
    // 3^m is odd and never a power of two, so subtracting one keeps the width.
    return p.bit_width();
}

struct PackedSymbols {
    std::uint64_t length = 0;        // number of symbols
    std::vector<std::uint8_t> bits;  // one entry per payload bit, least significant first

    friend bool operator==(const PackedSymbols&, const PackedSymbols&) = default;
};

inline PackedSymbols pack_bits(const SymbolString& s) {
    detail::BigUint value;
    for (Symbol sym : s.symbols()) value.mul_add(3, static_cast<std::uint32_t>(sym));
    PackedSymbols out;
    out.length = s.size();
    out.bits.resize(ternary_bits(s.size()));
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = value.bit(i) ? 1 : 0;
    return out;
}

inline SymbolString unpack_bits(const PackedSymbols& packed) {
    if (packed.bits.size() != ternary_bits(packed.length))
        fail(errc::malformed_code, "payload size does not match symbol count");
    detail::BigUint value;
    for (std::size_t i = 0; i < packed.bits.size(); ++i)
        if (packed.bits[i]) value.set_bit(i);
    std::vector<Symbol> symbols(packed.length);
    for (std::size_t i = packed.length; i-- > 0;)
        symbols[i] = static_cast<Symbol>(value.divmod(3));
    if (!value.is_zero()) fail(errc::malformed_code, "payload exceeds symbol count");
    return SymbolString(std::move(symbols));
}

}  // namespace veccount
