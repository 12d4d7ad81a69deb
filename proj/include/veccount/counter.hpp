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

// d-dimensional approximate counter with Euclidean relative error.
//
// The counter keeps one shared scale U and a relative vector V whose
// variable-length code must fit in m_star symbols; the estimate is 2^U * V.
// An increment of coordinate j bumps V_j with probability 2^-U. When the
// code of V outgrows the budget every entry is halved (odd entries round up
// or down on a fair coin) and U grows by one. Both steps keep 2^U * V an
// unbiased estimate of the true count vector.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "veccount/error.hpp"
#include "veccount/random.hpp"
#include "veccount/varint.hpp"

namespace veccount {

enum class Trigger : std::uint8_t {
    strict = 0,     // scale up when psi(V) > m_star
    inclusive = 1,  // scale up when psi(V) >= m_star
};

namespace detail {

// ceil() that treats values within floating noise of an integer as that integer,
// so e.g. 2 / 0.1^2 yields 200 rather than 201.
inline std::uint64_t ceil_snap(long double x) {
    const long double r = std::round(x);
    if (std::fabs(x - r) <= 1e-9L * std::max(1.0L, std::fabs(x)))
        return static_cast<std::uint64_t>(std::max(0.0L, r));
    return static_cast<std::uint64_t>(std::max(0.0L, std::ceil(x)));
}

// log2(n / m + 1) for n = 2^log2_n, stable for very large n.
inline long double log2_ratio_plus_one(long double log2_n, long double m) {
    const long double l = log2_n - std::log2(m);
    if (l > 0) return l + std::log1p(std::exp2(-l)) / std::log(2.0L);
    return std::log2(std::exp2(l) + 1.0L);
}

inline void check_sigma(double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0 / 3.0))
        fail(errc::invalid_param, "sigma must lie in (0, 1/3)");
}

}  // namespace detail

/// Accuracy parameter, symbol budget and scale cap for a target
/// (n, d, sigma). Usable for n far beyond 64 bits via log2(n).
struct CounterParams {
    std::uint64_t a = 0;
    std::uint64_t m_star = 0;
    std::uint64_t u_star = 0;
};

inline CounterParams derive_params(long double log2_n, std::size_t d, double sigma) {
    detail::check_sigma(sigma);
    if (d < 1) fail(errc::invalid_param, "dimension must be at least 1");
    const long double inv = 1.0L / sigma;
    const long double two_inv_sq = 2.0L * inv * inv;  // a and the inverse failure rate
    CounterParams p;
    p.a = detail::ceil_snap(two_inv_sq);
    p.m_star = 4 * d + detail::ceil_snap(static_cast<long double>(d) * std::log2(1.0L + p.a));
    const long double ad = static_cast<long double>(p.a) * static_cast<long double>(d);
    p.u_star = detail::ceil_snap(std::log2(two_inv_sq) + detail::log2_ratio_plus_one(log2_n, ad));
    return p;
}

struct CounterConfig {
    std::uint64_t n = 0;  // maximum stream length
    std::size_t d = 0;
    double sigma = 0.0;
    std::uint64_t a = 0;
    std::uint64_t m_star = 0;
    std::uint64_t u_star = 0;
    Trigger trigger = Trigger::strict;
    bool deterministic_mode = false;

    /// Parameters for an (n, d, sigma)-counter.
    static CounterConfig make(std::uint64_t n, std::size_t d, double sigma,
                              Trigger trigger = Trigger::strict) {
        if (n < 1) fail(errc::invalid_param, "n must be at least 1");
        const CounterParams p = derive_params(std::log2(static_cast<long double>(n)), d, sigma);
        CounterConfig c;
        c.n = n;
        c.d = d;
        c.sigma = sigma;
        c.a = p.a;
        c.m_star = p.m_star;
        c.u_star = p.u_star;
        c.trigger = trigger;
        c.deterministic_mode = static_cast<double>(n) <= 1.0 / sigma;
        return c;
    }

    /// A counter run with an explicit symbol budget and scale cap rather than
    /// parameters derived from sigma (sigma and a are left at zero).
    static CounterConfig with_budget(std::uint64_t n, std::size_t d, std::uint64_t m_star,
                                     std::uint64_t u_star, Trigger trigger) {
        if (n < 1 || d < 1) fail(errc::invalid_param, "n and d must be at least 1");
        if (m_star < 3 * d) fail(errc::invalid_param, "symbol budget must be at least 3d");
        if (u_star < 1) fail(errc::invalid_param, "scale cap must be at least 1");
        CounterConfig c;
        c.n = n;
        c.d = d;
        c.m_star = m_star;
        c.u_star = u_star;
        c.trigger = trigger;
        return c;
    }

    friend bool operator==(const CounterConfig&, const CounterConfig&) = default;
};

struct CounterState {
    std::uint64_t u = 0;
    std::vector<std::uint64_t> v;
    bool failed = false;
    std::optional<std::vector<std::uint64_t>> exact;  // deterministic mode only

    friend bool operator==(const CounterState&, const CounterState&) = default;
};

/// Halves every entry; odd entries round up or down on a fresh fair coin,
/// so E[2 * result] equals the input entrywise.
inline void halve_randomized(std::span<std::uint64_t> v, RandomSource& rng) {
    for (auto& vk : v) {
        if (vk & 1u)
            vk = rademacher(rng) > 0 ? (vk + 1) / 2 : (vk - 1) / 2;
        else
            vk /= 2;
    }
}

struct StepResult {
    bool bumped = false;     // V (or the exact count) changed before any scale-up
    bool scaled_up = false;  // a scale-up ran during this increment
    bool failed = false;     // the increment pushed the counter into the fail state
};

class VectorCounter {
public:
    VectorCounter(CounterConfig config, std::uint64_t seed) : config_(config), rng_(seed) {
        if (config_.d < 1) fail(errc::invalid_param, "dimension must be at least 1");
        state_.v.assign(config_.d, 0);
        if (config_.deterministic_mode) state_.exact.emplace(config_.d, 0);
        psi_ = config_.d;
    }

    /// Rebuilds a counter from persisted parts; the state must satisfy the budget.
    VectorCounter(CounterConfig config, CounterState state, RandomSource::Snapshot rng,
                  std::uint64_t increments)
        : config_(config), state_(std::move(state)), increments_(increments) {
        rng_.restore(rng);
        if (state_.v.size() != config_.d) fail(errc::corrupt_state, "vector arity mismatch");
        if (config_.deterministic_mode != state_.exact.has_value())
            fail(errc::corrupt_state, "exact counts inconsistent with mode");
        if (state_.exact && state_.exact->size() != config_.d)
            fail(errc::corrupt_state, "exact arity mismatch");
        if (increments_ > config_.n) fail(errc::corrupt_state, "more increments than n");
        psi_ = psi_vec(state_.v);
        if (psi_ > config_.m_star) fail(errc::corrupt_state, "relative vector over budget");
        if (state_.failed && state_.u != config_.u_star)
            fail(errc::corrupt_state, "failed counter below scale cap");
        if (!state_.failed && state_.u >= config_.u_star)
            fail(errc::corrupt_state, "scale at cap without failure");
    }

    StepResult increment(std::size_t j) {
        if (j >= config_.d) fail(errc::bad_coordinate, "coordinate out of range");
        if (increments_ >= config_.n) fail(errc::stream_overflow, "more than n increments");
        ++increments_;

        StepResult r;
        if (config_.deterministic_mode) {
            ++(*state_.exact)[j];
            r.bumped = true;
            return r;
        }
        // Increments after failure are absorbed; the query already returns zero.
        if (state_.failed) return r;

        if (bernoulli_pow2(rng_, state_.u)) {
            const std::uint64_t old = state_.v[j];
            state_.v[j] = old + 1;
            psi_ += psi(old + 1) - psi(old);
            r.bumped = true;
        }
        if (over_budget()) {
            scale_up();
            r.scaled_up = true;
            r.failed = state_.failed;
            // A second scale-up is never needed while m_star >= 3d.
            if (over_budget()) throw std::logic_error("scale-up left the relative vector over budget");
        }
        return r;
    }

    /// 2^U * V, the exact counts in deterministic mode, or zeros after failure.
    std::vector<double> query() const {
        std::vector<double> out(config_.d, 0.0);
        if (state_.exact) {
            std::copy(state_.exact->begin(), state_.exact->end(), out.begin());
            return out;
        }
        if (state_.failed) return out;
        for (std::size_t k = 0; k < config_.d; ++k)
            out[k] = std::ldexp(static_cast<double>(state_.v[k]), static_cast<int>(state_.u));
        return out;
    }

    const CounterConfig& config() const noexcept { return config_; }
    const CounterState& state() const noexcept { return state_; }
    const RandomSource& rng() const noexcept { return rng_; }
    std::uint64_t increments() const noexcept { return increments_; }
    std::uint64_t code_length() const noexcept { return psi_; }

private:
    bool over_budget() const noexcept {
        return config_.trigger == Trigger::strict ? psi_ > config_.m_star : psi_ >= config_.m_star;
    }

    void scale_up() {
        if (state_.u + 1 >= config_.u_star) {
            // Fail state: U pinned at the cap, V cleared.
            state_.failed = true;
            state_.u = config_.u_star;
            std::fill(state_.v.begin(), state_.v.end(), 0);
            psi_ = config_.d;
            return;
        }
        ++state_.u;
        halve_randomized(state_.v, rng_);
        psi_ = psi_vec(state_.v);
    }

    CounterConfig config_;
    CounterState state_;
    RandomSource rng_;
    std::uint64_t increments_ = 0;
    std::uint64_t psi_ = 0;
};

struct SpaceBits {
    std::uint64_t u_bits = 0;
    std::uint64_t v_bits = 0;
    std::uint64_t total = 0;
};

/// Information-theoretic storage for (U, V): U takes values 0..u_star, where
/// u_star itself encodes the fail state; V is radix-3 packed.
inline SpaceBits space_bits(const CounterConfig& config) {
    SpaceBits s;
    if (config.deterministic_mode) {
        s.v_bits = config.d * static_cast<std::uint64_t>(std::bit_width(config.n));
    } else {
        s.u_bits = static_cast<std::uint64_t>(std::bit_width(config.u_star));
        s.v_bits = ternary_bits(config.m_star);
    }
    s.total = s.u_bits + s.v_bits;
    return s;
}

/// space_bits for n = 2^log2_n without building a config, for n beyond 64 bits.
inline SpaceBits space_bits_at(long double log2_n, std::size_t d, double sigma) {
    const CounterParams p = derive_params(log2_n, d, sigma);
    SpaceBits s;
    if (std::exp2(log2_n) <= 1.0L / sigma) {
        const auto n = static_cast<std::uint64_t>(std::llround(std::exp2(log2_n)));
        s.v_bits = d * static_cast<std::uint64_t>(std::bit_width(n));
    } else {
        s.u_bits = static_cast<std::uint64_t>(std::bit_width(p.u_star));
        s.v_bits = ternary_bits(p.m_star);
    }
    s.total = s.u_bits + s.v_bits;
    return s;
}

}  // namespace veccount
