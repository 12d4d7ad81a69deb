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

// Reference counters the vector counter is measured against.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "veccount/counter.hpp"
#include "veccount/error.hpp"
#include "veccount/random.hpp"

namespace veccount {

// ---------------------------------------------------------------------------
// Morris(a): index r, estimate a((1 + 1/a)^r - 1), relative variance below 1/(2a).

struct MorrisState {
    std::uint64_t a = 1;
    std::uint64_t r = 0;
    std::uint64_t accept = 0;  // floor((1 + 1/a)^-r * 2^64), cached per r >= 1
};

inline double morris_estimate(const MorrisState& m) {
    const long double base = std::log1p(1.0L / static_cast<long double>(m.a));
    return static_cast<double>(static_cast<long double>(m.a) *
                               std::expm1(static_cast<long double>(m.r) * base));
}

/// Advances r with probability (1 + 1/a)^-r. The probability is evaluated in
/// long double and compared against a uniform 64-bit draw, so it is exact to
/// about 2^-64.
inline void morris_increment(MorrisState& m, RandomSource& src) {
    if (m.r != 0 && src.next_u64() >= m.accept) return;
    ++m.r;
    const long double p = std::exp(-static_cast<long double>(m.r) *
                                   std::log1p(1.0L / static_cast<long double>(m.a)));
    m.accept = static_cast<std::uint64_t>(std::ldexp(p, 64));
}

/// Smallest a for which Morris(a) has relative mean squared error below sigma^2.
inline std::uint64_t morris_accuracy_for(double sigma) {
    if (!(sigma > 0.0)) fail(errc::invalid_param, "sigma must be positive");
    const long double inv = 1.0L / sigma;
    return std::max<std::uint64_t>(1, detail::ceil_snap(inv * inv / 2.0L));
}

/// Bits for d independent Morris(a) counters counting to n = 2^log2_n.
inline std::uint64_t dmorris_space_bits(long double log2_n, std::size_t d, std::uint64_t a) {
    const std::uint64_t index_bits = detail::ceil_snap(std::log2(log2_n));
    const std::uint64_t accuracy_bits = detail::ceil_snap(std::log2(1.0L + static_cast<long double>(a)));
    return d * (index_bits + accuracy_bits);
}

class DMorrisCounter {
public:
    DMorrisCounter(std::size_t d, std::uint64_t a, std::uint64_t seed) : rng_(seed) {
        if (d < 1 || a < 1) fail(errc::invalid_param, "d and a must be at least 1");
        counters_.assign(d, MorrisState{a, 0, 0});
    }

    void increment(std::size_t j) {
        if (j >= counters_.size()) fail(errc::bad_coordinate, "coordinate out of range");
        morris_increment(counters_[j], rng_);
    }

    std::vector<double> query() const {
        std::vector<double> out;
        out.reserve(counters_.size());
        for (const auto& m : counters_) out.push_back(morris_estimate(m));
        return out;
    }

    const std::vector<MorrisState>& counters() const noexcept { return counters_; }

private:
    std::vector<MorrisState> counters_;
    RandomSource rng_;
};

// ---------------------------------------------------------------------------
// Shared scale with fixed-width entries in [0, a_naive]. Unbiased, but its
// estimate set is too sparse once a_naive is small relative to sqrt(d).

struct NaiveSharedState {
    std::uint64_t u = 0;
    std::vector<std::uint64_t> v;
};

class NaiveSharedCounter {
public:
    NaiveSharedCounter(std::size_t d, std::uint64_t a_naive, std::uint64_t seed)
        : a_naive_(a_naive), rng_(seed) {
        if (d < 1 || a_naive < 1) fail(errc::invalid_param, "d and a_naive must be at least 1");
        state_.v.assign(d, 0);
    }

    /// Returns true when the increment triggered a scale-up.
    bool increment(std::size_t j) {
        if (j >= state_.v.size()) fail(errc::bad_coordinate, "coordinate out of range");
        if (!bernoulli_pow2(rng_, state_.u)) return false;
        if (++state_.v[j] <= a_naive_) return false;
        ++state_.u;
        halve_randomized(state_.v, rng_);
        return true;
    }

    std::vector<double> query() const {
        std::vector<double> out(state_.v.size());
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = std::ldexp(static_cast<double>(state_.v[k]), static_cast<int>(state_.u));
        return out;
    }

    const NaiveSharedState& state() const noexcept { return state_; }
    std::uint64_t a_naive() const noexcept { return a_naive_; }

private:
    std::uint64_t a_naive_;
    NaiveSharedState state_;
    RandomSource rng_;
};

}  // namespace veccount
