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

#include <array>
#include <bit>
#include <cstdint>

namespace veccount {

inline constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/**
 * Seedable source of fair bits.
 *
 * The generator is xoshiro256** (Blackman & Vigna) with its 256-bit state
 * expanded from the 64-bit seed by SplitMix64. Bits are handed out one at a
 * time from a buffered 64-bit word, least significant first, so the draw
 * sequence for a given seed is fixed across platforms and releases.
 */
class RandomSource {
public:
    struct Snapshot {
        std::uint64_t seed = 0;
        std::array<std::uint64_t, 4> s{};
        std::uint64_t word = 0;
        std::uint8_t bits_left = 0;
        std::uint64_t bits_consumed = 0;

        friend bool operator==(const Snapshot&, const Snapshot&) = default;
    };

    explicit RandomSource(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept {
        seed_ = seed;
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
        word_ = 0;
        bits_left_ = 0;
        bits_consumed_ = 0;
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

    bool bit() noexcept {
        if (bits_left_ == 0) {
            word_ = next_u64();
            bits_left_ = 64;
        }
        const bool b = word_ & 1u;
        word_ >>= 1;
        --bits_left_;
        ++bits_consumed_;
        return b;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t bits_consumed() const noexcept { return bits_consumed_; }

    Snapshot snapshot() const noexcept { return {seed_, s_, word_, bits_left_, bits_consumed_}; }

    void restore(const Snapshot& snap) noexcept {
        seed_ = snap.seed;
        s_ = snap.s;
        word_ = snap.word;
        bits_left_ = snap.bits_left;
        bits_consumed_ = snap.bits_consumed;
    }

private:
    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t word_ = 0;
    std::uint8_t bits_left_ = 0;
    std::uint64_t bits_consumed_ = 0;
};

/// True with probability exactly 2^-u: reads fair bits until the first zero
/// or until u ones in a row. Consumes at most u bits, two on average.
inline bool bernoulli_pow2(RandomSource& src, std::uint64_t u) noexcept {
    for (std::uint64_t i = 0; i < u; ++i)
        if (!src.bit()) return false;
    return true;
}

inline int rademacher(RandomSource& src) noexcept { return src.bit() ? 1 : -1; }

}  // namespace veccount
