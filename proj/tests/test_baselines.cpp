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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "veccount/baselines.hpp"

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

TEST(Morris, ZeroIndexEstimatesZero) {
    MorrisState m{100, 0, 0};
    EXPECT_EQ(morris_estimate(m), 0.0);
    RandomSource r(1);
    morris_increment(m, r);
    EXPECT_EQ(m.r, 1u);
    EXPECT_DOUBLE_EQ(morris_estimate(m), 1.0);
}

TEST(Morris, EstimateFormula) {
    const MorrisState m{4, 3, 0};
    EXPECT_DOUBLE_EQ(morris_estimate(m), 4.0 * (1.25 * 1.25 * 1.25 - 1.0));
}

TEST(Morris, UnbiasedWithRecordedVariance) {
    const int count = 10000;
    const int trials = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        RandomSource r(static_cast<std::uint64_t>(t));
        MorrisState m{100, 0, 0};
        for (int i = 0; i < count; ++i) morris_increment(m, r);
        const double e = morris_estimate(m);
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / trials;
    const double var = sum2 / trials - mean * mean;
    EXPECT_LE(std::fabs(mean - count), 4.0 * std::sqrt(var / trials));
    const double rel_var = var / (static_cast<double>(count) * count);
    RecordProperty("relative_variance_times_a", std::to_string(rel_var * 100));
    EXPECT_GT(rel_var, 0.0);
}

TEST(Morris, AccuracyParameter) {
    EXPECT_EQ(morris_accuracy_for(0.1), 50u);
    EXPECT_EQ(morris_accuracy_for(0.3), 6u);
    EXPECT_EQ(morris_accuracy_for(0.9), 1u);
}

TEST(DMorris, SpaceFormula) {
    // log2 log2 2^40 = 5.32 -> 6 bits of index, log2 101 -> 7 bits of accuracy.
    EXPECT_EQ(dmorris_space_bits(40, 4, 100), 4u * 13u);
    EXPECT_EQ(dmorris_space_bits(64, 1, 1), 6u + 1u);
}

TEST(DMorris, SingleCoordinateIsMorris) {
    DMorrisCounter c(1, 30, 77);
    RandomSource r(77);
    MorrisState m{30, 0, 0};
    for (int i = 0; i < 5000; ++i) {
        c.increment(0);
        morris_increment(m, r);
        ASSERT_EQ(c.counters()[0].r, m.r);
    }
    EXPECT_EQ(c.query()[0], morris_estimate(m));
}

TEST(DMorris, RejectsBadCoordinate) {
    DMorrisCounter c(3, 10, 1);
    EXPECT_EQ(code_of([&] { c.increment(3); }), errc::bad_coordinate);
    EXPECT_EQ(code_of([] { DMorrisCounter(0, 10, 1); }), errc::invalid_param);
}

TEST(DMorris, CompositeErrorBelowWorstCoordinate) {
    const std::vector<std::uint32_t> x{2000, 700, 300};
    std::vector<std::uint32_t> stream;
    for (std::uint32_t j = 0; j < x.size(); ++j) stream.insert(stream.end(), x[j], j);
    std::shuffle(stream.begin(), stream.end(), std::mt19937_64(4));
    const int trials = 20000;
    double composite = 0.0;
    std::vector<double> per(x.size(), 0.0);
    double norm2 = 0.0;
    for (auto xk : x) norm2 += static_cast<double>(xk) * xk;
    for (int t = 0; t < trials; ++t) {
        DMorrisCounter c(x.size(), 8, static_cast<std::uint64_t>(t));
        for (auto e : stream) c.increment(e);
        const auto q = c.query();
        double err2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double diff = q[k] - x[k];
            err2 += diff * diff;
            per[k] += diff * diff / (static_cast<double>(x[k]) * x[k]) / trials;
        }
        composite += err2 / norm2 / trials;
    }
    EXPECT_LE(composite, *std::max_element(per.begin(), per.end()));
}

TEST(Naive, ExactUntilFirstOverflow) {
    NaiveSharedCounter c(3, 4, 1);
    for (int i = 0; i < 4; ++i) EXPECT_FALSE(c.increment(0));
    for (int i = 0; i < 4; ++i) EXPECT_FALSE(c.increment(2));
    EXPECT_EQ(c.state().u, 0u);
    EXPECT_EQ(c.query(), (std::vector<double>{4, 0, 4}));
    EXPECT_TRUE(c.increment(1) == false);
    EXPECT_TRUE(c.increment(0));
    EXPECT_EQ(c.state().u, 1u);
}

TEST(Naive, EntriesStayInRange) {
    NaiveSharedCounter c(8, 3, 5);
    std::mt19937_64 gen(2);
    for (int i = 0; i < 100000; ++i) {
        c.increment(gen() % 8);
        for (auto vk : c.state().v) ASSERT_LE(vk, 3u);
    }
}

TEST(Naive, Unbiased) {
    const std::vector<std::uint32_t> x{900, 300, 50, 1};
    std::vector<std::uint32_t> stream;
    for (std::uint32_t j = 0; j < x.size(); ++j) stream.insert(stream.end(), x[j], j);
    std::shuffle(stream.begin(), stream.end(), std::mt19937_64(8));
    const int trials = 50000;
    std::vector<double> sum(x.size(), 0.0), sum2(x.size(), 0.0);
    for (int t = 0; t < trials; ++t) {
        NaiveSharedCounter c(x.size(), 2, static_cast<std::uint64_t>(t));
        for (auto e : stream) c.increment(e);
        const auto q = c.query();
        for (std::size_t k = 0; k < x.size(); ++k) {
            sum[k] += q[k];
            sum2[k] += q[k] * q[k];
        }
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double mean = sum[k] / trials;
        const double se = std::sqrt((sum2[k] / trials - mean * mean) / trials);
        EXPECT_LE(std::fabs(mean - x[k]), 4.0 * se) << k;
    }
}

}  // namespace
}  // namespace veccount
