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


#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "veccount/counter.hpp"

namespace veccount {
namespace {

errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return errc::invalid_param;
}

using Vec = std::vector<std::uint64_t>;

TEST(Config, DerivedParameters) {
    const auto c = CounterConfig::make(1'000'000, 4, 0.3);
    EXPECT_EQ(c.a, 23u);
    EXPECT_EQ(c.m_star, 35u);
    EXPECT_EQ(c.u_star, 18u);
    EXPECT_FALSE(c.deterministic_mode);
    EXPECT_EQ(c.trigger, Trigger::strict);

    const auto tight = CounterConfig::make(10'000, 64, 0.2);
    EXPECT_EQ(tight.a, 50u);
    EXPECT_EQ(tight.m_star, 620u);
    EXPECT_EQ(tight.u_star, 8u);

    // 2 / 0.1^2 is 200 exactly, despite 0.1 not being representable.
    EXPECT_EQ(CounterConfig::make(1000, 1, 0.1).a, 200u);
}

TEST(Config, DeterministicModeForShortStreams) {
    EXPECT_TRUE(CounterConfig::make(2, 1, 0.25).deterministic_mode);
    EXPECT_TRUE(CounterConfig::make(4, 3, 0.25).deterministic_mode);
    EXPECT_FALSE(CounterConfig::make(5, 3, 0.25).deterministic_mode);
}

TEST(Config, RejectsBadParameters) {
    EXPECT_EQ(code_of([] { CounterConfig::make(100, 4, 0.4); }), errc::invalid_param);
    EXPECT_EQ(code_of([] { CounterConfig::make(100, 4, 1.0 / 3.0); }), errc::invalid_param);
    EXPECT_EQ(code_of([] { CounterConfig::make(100, 4, 0.0); }), errc::invalid_param);
    EXPECT_EQ(code_of([] { CounterConfig::make(100, 0, 0.2); }), errc::invalid_param);
    EXPECT_EQ(code_of([] { CounterConfig::make(0, 2, 0.2); }), errc::invalid_param);
    EXPECT_EQ(code_of([] { CounterConfig::with_budget(100, 4, 11, 10, Trigger::strict); }), errc::invalid_param);
    EXPECT_EQ(code_of([] { CounterConfig::with_budget(100, 4, 12, 0, Trigger::strict); }), errc::invalid_param);
}

TEST(Counter, FreshCounterIsZero) {
    VectorCounter c(CounterConfig::make(1000, 3, 0.2), 1);
    EXPECT_EQ(c.state().u, 0u);
    EXPECT_EQ(c.state().v, (Vec{0, 0, 0}));
    EXPECT_EQ(c.code_length(), 3u);
    EXPECT_EQ(c.query(), (std::vector<double>{0, 0, 0}));
}

TEST(Counter, ExactWhileScaleIsZero) {
    VectorCounter c(CounterConfig::make(1'000'000, 4, 0.3), 5);
    Vec x(4, 0);
    std::mt19937_64 gen(1);
    while (true) {
        const std::size_t j = gen() % 4;
        c.increment(j);
        ++x[j];
        if (c.state().u != 0) break;
        ASSERT_EQ(c.state().v, x);
    }
}

TEST(Counter, DeterministicModeIsExact) {
    VectorCounter c(CounterConfig::make(3, 2, 0.3), 9);
    c.increment(0);
    c.increment(1);
    c.increment(1);
    EXPECT_EQ(c.query(), (std::vector<double>{1, 2}));
    EXPECT_EQ(code_of([&] { c.increment(0); }), errc::stream_overflow);
}

TEST(Counter, RejectsBadCoordinateAndOverflow) {
    VectorCounter c(CounterConfig::make(10, 2, 0.2), 1);
    EXPECT_EQ(code_of([&] { c.increment(2); }), errc::bad_coordinate);
    for (int i = 0; i < 10; ++i) c.increment(i % 2);
    EXPECT_EQ(code_of([&] { c.increment(0); }), errc::stream_overflow);
    EXPECT_EQ(c.increments(), 10u);
}

VectorCounter counter_at(const CounterConfig& cfg, const Vec& stream_counts, std::uint64_t seed) {
    VectorCounter c(cfg, seed);
    for (std::size_t j = 0; j < stream_counts.size(); ++j)
        for (std::uint64_t i = 0; i < stream_counts[j]; ++i) c.increment(j);
    return c;
}

TEST(Counter, FirstScaleUpOfSampleRun) {
    // At U = 0 the counter holds (6, 4, 2, 2); one more increment on the
    // second coordinate reaches psi = 12 and fires the inclusive trigger.
    const auto cfg = CounterConfig::with_budget(1000, 4, 12, 64, Trigger::inclusive);
    std::set<std::uint64_t> second;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        VectorCounter c = counter_at(cfg, {6, 4, 2, 2}, seed);
        ASSERT_EQ(c.state().u, 0u);
        ASSERT_EQ(c.state().v, (Vec{6, 4, 2, 2}));
        const StepResult r = c.increment(1);
        EXPECT_TRUE(r.bumped);
        EXPECT_TRUE(r.scaled_up);
        EXPECT_FALSE(r.failed);
        EXPECT_EQ(c.state().u, 1u);
        const Vec& v = c.state().v;
        EXPECT_EQ(v[0], 3u);
        EXPECT_TRUE(v[1] == 2 || v[1] == 3);
        EXPECT_EQ(v[2], 1u);
        EXPECT_EQ(v[3], 1u);
        EXPECT_GE(c.code_length(), 5u);
        EXPECT_LE(c.code_length(), 12u);
        second.insert(v[1]);
    }
    EXPECT_EQ(second.size(), 2u);
}

TEST(Counter, StrictTriggerWaitsForOverflow) {
    const auto cfg = CounterConfig::with_budget(1000, 4, 12, 64, Trigger::strict);
    VectorCounter c = counter_at(cfg, {6, 5, 2, 2}, 3);
    EXPECT_EQ(c.state().u, 0u);
    EXPECT_EQ(c.code_length(), 12u);
    const StepResult r = c.increment(2);
    EXPECT_TRUE(r.scaled_up);
    EXPECT_EQ(c.state().u, 1u);
}

TEST(Counter, QueryScalesRelativeVector) {
    const auto cfg = CounterConfig::with_budget(1000, 4, 12, 64, Trigger::strict);
    VectorCounter c(cfg, CounterState{3, {7, 4, 3, 0}, false, std::nullopt}, RandomSource(1).snapshot(), 0);
    EXPECT_EQ(c.query(), (std::vector<double>{56, 32, 24, 0}));
    EXPECT_EQ(c.code_length(), 11u);
}

TEST(Counter, RestoreRejectsInconsistentState) {
    const auto cfg = CounterConfig::with_budget(1000, 2, 6, 10, Trigger::strict);
    const auto snap = RandomSource(1).snapshot();
    EXPECT_EQ(code_of([&] { VectorCounter(cfg, CounterState{0, {1, 2, 3}, false, {}}, snap, 0); }),
              errc::corrupt_state);
    EXPECT_EQ(code_of([&] { VectorCounter(cfg, CounterState{0, {100, 2}, false, {}}, snap, 0); }),
              errc::corrupt_state);
    EXPECT_EQ(code_of([&] { VectorCounter(cfg, CounterState{10, {0, 0}, false, {}}, snap, 0); }),
              errc::corrupt_state);
    EXPECT_EQ(code_of([&] { VectorCounter(cfg, CounterState{3, {0, 0}, true, {}}, snap, 0); }),
              errc::corrupt_state);
    EXPECT_EQ(code_of([&] { VectorCounter(cfg, CounterState{0, {0, 0}, false, Vec{0, 0}}, snap, 0); }),
              errc::corrupt_state);
    EXPECT_EQ(code_of([&] { VectorCounter(cfg, CounterState{0, {0, 0}, false, {}}, snap, 1001); }),
              errc::corrupt_state);
}

TEST(HalveRandomized, EvenEntriesHalveExactly) {
    RandomSource r(1);
    Vec v{4, 2, 0, 1024};
    halve_randomized(v, r);
    EXPECT_EQ(v, (Vec{2, 1, 0, 512}));
    EXPECT_EQ(r.bits_consumed(), 0u);
}

TEST(HalveRandomized, OddEntriesRoundFairly) {
    RandomSource r(2);
    int threes = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        Vec v{5, 1};
        halve_randomized(v, r);
        ASSERT_TRUE(v[0] == 2 || v[0] == 3);
        ASSERT_TRUE(v[1] == 0 || v[1] == 1);
        threes += v[0] == 3;
    }
    // Binomial(10^5, 1/2): 4 standard deviations is about 632.
    EXPECT_LT(std::abs(threes - trials / 2), 632);
}

TEST(Counter, FailStateAbsorbs) {
    // d = 1, budget 3: the first scale-up happens at V = 5 and U + 1 reaches the cap.
    const auto cfg = CounterConfig::with_budget(1000, 1, 3, 1, Trigger::strict);
    VectorCounter c(cfg, 4);
    for (int i = 0; i < 4; ++i) EXPECT_FALSE(c.increment(0).scaled_up);
    EXPECT_EQ(c.state().v, (Vec{4}));
    const StepResult r = c.increment(0);
    EXPECT_TRUE(r.failed);
    EXPECT_TRUE(c.state().failed);
    EXPECT_EQ(c.state().u, 1u);
    EXPECT_EQ(c.query(), (std::vector<double>{0}));
    for (int i = 0; i < 50; ++i) c.increment(0);
    EXPECT_EQ(c.state().v, (Vec{0}));
    EXPECT_EQ(c.query(), (std::vector<double>{0}));
}

struct Invariants {
    std::uint64_t violations = 0;
    void check(bool ok) { violations += ok ? 0 : 1; }
};

TEST(Counter, InvariantsUnderRandomStreams) {
    std::mt19937_64 gen(17);
    Invariants inv;
    for (int cfg_i = 0; cfg_i < 30; ++cfg_i) {
        const std::size_t d = 1 + gen() % 8;
        const double sigma = 0.05 + 0.25 * std::uniform_real_distribution<>(0, 1)(gen);
        const std::uint64_t n = 3000;
        const auto cfg = CounterConfig::make(n, d, sigma);
        VectorCounter c(cfg, gen());
        bool scaled = false;
        std::uint64_t last_u = 0;
        std::discrete_distribution<std::size_t> pick(d, 0.0, 1.0, [&](double) { return 1.0 + gen() % 4; });
        for (std::uint64_t i = 0; i < n; ++i) {
            const StepResult r = c.increment(pick(gen));
            scaled |= r.scaled_up;
            const std::uint64_t p = psi_vec(c.state().v);
            inv.check(p == c.code_length());
            inv.check(p <= cfg.m_star);
            if (scaled && !c.state().failed) inv.check(p + 2 * d >= cfg.m_star + 1);
            inv.check(c.state().u >= last_u);
            inv.check(c.state().u <= last_u + 1);
            last_u = c.state().u;
        }
    }
    EXPECT_EQ(inv.violations, 0u);
}

TEST(Counter, UnbiasedOverReplays) {
    // One fixed stream of 1000 increments, 10^5 independent counters.
    const Vec x{600, 200, 100, 100};
    std::vector<std::uint32_t> stream;
    for (std::uint32_t j = 0; j < 4; ++j) stream.insert(stream.end(), x[j], j);
    std::shuffle(stream.begin(), stream.end(), std::mt19937_64(99));

    const auto run = [&](const CounterConfig& cfg, int trials) {
        std::vector<double> sum(4, 0.0), sum2(4, 0.0);
        std::uint64_t scaled = 0;
        for (int t = 0; t < trials; ++t) {
            VectorCounter c(cfg, static_cast<std::uint64_t>(t));
            for (std::uint32_t e : stream) c.increment(e);
            scaled += c.state().u > 0;
            const auto q = c.query();
            for (int k = 0; k < 4; ++k) {
                sum[k] += q[k];
                sum2[k] += q[k] * q[k];
            }
        }
        EXPECT_GT(scaled, static_cast<std::uint64_t>(trials) / 2) << "stream too short to exercise scale-ups";
        for (int k = 0; k < 4; ++k) {
            const double mean = sum[k] / trials;
            const double var = sum2[k] / trials - mean * mean;
            const double se = std::sqrt(var / trials);
            EXPECT_LE(std::fabs(mean - static_cast<double>(x[k])), 4.0 * se) << "coordinate " << k;
        }
    };
    run(CounterConfig::make(1000, 4, 0.3), 100000);
    run(CounterConfig::with_budget(1000, 4, 12, 64, Trigger::inclusive), 20000);
}

TEST(SpaceBits, RelativeVectorBits) {
    const auto c = CounterConfig::with_budget(1000, 4, 12, 64, Trigger::strict);
    EXPECT_EQ(space_bits(c).v_bits, 20u);
    EXPECT_EQ(space_bits(c).u_bits, 7u);
    EXPECT_EQ(space_bits(c).total, 27u);
}

TEST(SpaceBits, DeterministicModeStoresCounts) {
    const auto c = CounterConfig::make(3, 4, 0.3);
    ASSERT_TRUE(c.deterministic_mode);
    EXPECT_EQ(space_bits(c).u_bits, 0u);
    EXPECT_EQ(space_bits(c).v_bits, 8u);
}

TEST(SpaceBits, HugeStreamsOnlyGrowTheScale) {
    const SpaceBits small = space_bits_at(32, 1, 0.1);
    const SpaceBits huge = space_bits_at(1024, 1, 0.1);
    EXPECT_EQ(small.v_bits, huge.v_bits);
    EXPECT_EQ(small.u_bits, 6u);   // u_star = 33
    EXPECT_EQ(huge.u_bits, 11u);   // u_star = 1024
    EXPECT_EQ(huge.total - small.total, huge.u_bits - small.u_bits);
}

TEST(SpaceBits, AgreesWithConfig) {
    for (std::uint64_t n : {100ull, 10'000ull, 1ull << 40}) {
        for (std::size_t d : {1u, 4u, 16u}) {
            const auto c = CounterConfig::make(n, d, 0.1);
            const SpaceBits a = space_bits(c);
            const SpaceBits b = space_bits_at(std::log2(static_cast<long double>(n)), d, 0.1);
            EXPECT_EQ(a.total, b.total) << n << " " << d;
        }
    }
}

}  // namespace
}  // namespace veccount
