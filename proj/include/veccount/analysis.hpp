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

// Covering checks and space lower bounds.
//
// A set R is a sigma-multiplicative cover of A when every x in A has some
// y in R with |x - y| < sigma |x|. The estimates a correct counter can emit
// must form such a cover, which ties the counter's state count to the
// number of points needed to cover a shell of the positive orthant.
//
// All logarithms inside the bound formulas are natural logarithms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "veccount/counter.hpp"
#include "veccount/error.hpp"
#include "veccount/varint.hpp"

namespace veccount {

using Point = std::vector<double>;

struct CoverReport {
    Point worst_point;
    double worst_ratio = 0.0;  // max over A of min over R of |x - y| / |x|
    bool covered = false;      // worst_ratio < sigma
};

/// Exact brute-force nearest-neighbour check of R against every point of A.
inline CoverReport verify_cover(std::span<const Point> R, std::span<const Point> A, double sigma) {
    if (R.empty()) fail(errc::empty_cover_set, "cover candidate set is empty");
    if (A.empty()) fail(errc::invalid_param, "target set is empty");
    const std::size_t d = A.front().size();

    std::vector<double> flat;
    flat.reserve(R.size() * d);
    for (const Point& y : R) {
        if (y.size() != d) fail(errc::invalid_param, "dimension mismatch in R");
        flat.insert(flat.end(), y.begin(), y.end());
    }

    CoverReport report;
    report.worst_ratio = -1.0;
    for (const Point& x : A) {
        if (x.size() != d) fail(errc::invalid_param, "dimension mismatch in A");
        double norm2 = 0.0;
        for (double xi : x) norm2 += xi * xi;
        if (!(norm2 > 0.0)) fail(errc::invalid_param, "target points must be nonzero");

        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < R.size(); ++i) {
            const double* y = flat.data() + i * d;
            double dist2 = 0.0;
            for (std::size_t k = 0; k < d && dist2 < best; ++k) {
                const double diff = x[k] - y[k];
                dist2 += diff * diff;
            }
            best = std::min(best, dist2);
        }
        const double ratio = std::sqrt(best / norm2);
        if (ratio > report.worst_ratio) {
            report.worst_ratio = ratio;
            report.worst_point = x;
        }
    }
    report.covered = report.worst_ratio < sigma;
    return report;
}

struct ReachableEstimates {
    std::vector<Point> estimates;  // sorted, distinct
    std::size_t states = 0;        // distinct non-failed (U, V) states visited
};

class BudgetExceeded : public error {
public:
    BudgetExceeded(ReachableEstimates partial_result)
        : error(errc::budget_exceeded, "state exploration exceeded the node budget"),
          partial(std::move(partial_result)) {}
    ReachableEstimates partial;
};

inline constexpr std::size_t kDefaultNodeBudget = 10'000'000;

/**
 * Every estimate 2^U * V the counter can hold after at most
 * `max_increments` increments, over all coordinate choices, both outcomes of
 * each acceptance draw and both rounding directions of each odd entry at a
 * scale-up. States that reach the fail state are dropped.
 *
 * Exploration is breadth-first over an ordered visited set, so the result
 * depends only on the config and the budget.
 */
inline ReachableEstimates reachable_estimates(const CounterConfig& config, std::uint64_t max_increments,
                                              std::size_t node_budget = kDefaultNodeBudget) {
    using Key = std::vector<std::uint64_t>;  // V followed by U
    const std::size_t d = config.d;
    const auto over_budget = [&](std::uint64_t code) {
        return config.trigger == Trigger::strict ? code > config.m_star : code >= config.m_star;
    };

    std::set<Key> visited;
    std::vector<Key> frontier{Key(d + 1, 0)};
    visited.insert(frontier.front());

    const auto collect = [&] {
        ReachableEstimates out;
        out.states = visited.size();
        std::set<Point> pts;
        for (const Key& k : visited) {
            Point p(d);
            for (std::size_t i = 0; i < d; ++i)
                p[i] = std::ldexp(static_cast<double>(k[i]), static_cast<int>(k[d]));
            pts.insert(std::move(p));
        }
        out.estimates.assign(pts.begin(), pts.end());
        return out;
    };

    for (std::uint64_t step = 0; step < max_increments && !frontier.empty(); ++step) {
        std::vector<Key> next;
        const auto visit = [&](Key k) {
            if (visited.insert(k).second) {
                next.push_back(std::move(k));
                if (visited.size() > node_budget) throw BudgetExceeded(collect());
            }
        };
        for (const Key& s : frontier) {
            for (std::size_t j = 0; j < d; ++j) {
                Key y = s;
                ++y[j];
                if (config.deterministic_mode) {
                    visit(std::move(y));
                    continue;
                }
                if (!over_budget(psi_vec(std::span(y).first(d)))) {
                    visit(std::move(y));
                    continue;
                }
                if (s[d] + 1 >= config.u_star) continue;  // fail state
                std::vector<std::size_t> odd;
                for (std::size_t k = 0; k < d; ++k)
                    if (y[k] & 1u) odd.push_back(k);
                for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << odd.size()); ++mask) {
                    Key z = y;
                    z[d] += 1;
                    for (std::size_t k = 0; k < d; ++k) z[k] /= 2;
                    for (std::size_t b = 0; b < odd.size(); ++b)
                        if ((mask >> b) & 1u) z[odd[b]] += 1;  // rounded up
                    visit(std::move(z));
                }
            }
        }
        frontier = std::move(next);
    }
    return collect();
}

/// All x in N^d with r_min <= |x| <= r_max, in lexicographic order.
inline std::vector<Point> shell_lattice_points(std::size_t d, double r_min, double r_max) {
    if (d < 1 || !(r_min >= 0.0) || !(r_max >= r_min)) fail(errc::invalid_param, "bad shell");
    std::vector<Point> out;
    const auto limit = static_cast<std::uint64_t>(std::floor(r_max));
    Point cur(d, 0.0);
    const double lo2 = r_min * r_min;
    const double hi2 = r_max * r_max;
    const auto rec = [&](auto&& self, std::size_t i, double acc) -> void {
        if (i == d) {
            if (acc >= lo2 && acc <= hi2) out.push_back(cur);
            return;
        }
        for (std::uint64_t v = 0; v <= limit; ++v) {
            const double vv = static_cast<double>(v);
            if (acc + vv * vv > hi2) break;
            cur[i] = vv;
            self(self, i + 1, acc + vv * vv);
        }
        cur[i] = 0.0;
    };
    rec(rec, 0, 0.0);
    return out;
}

struct CoverAudit {
    CounterConfig config;
    double level = 0.0;  // the covering radius multiplier, 4 sigma
    std::size_t targets = 0;
    ReachableEstimates reachable;
    CoverReport report;
};

/// Checks that the reachable estimates of an (k, d, sigma)-counter cover the
/// integer points of the shell sqrt(d)/sigma <= |x| <= k/sqrt(d) at level 4 sigma.
inline CoverAudit audit_cover(std::size_t d, double sigma, std::uint64_t max_increments,
                              std::size_t node_budget = kDefaultNodeBudget) {
    CoverAudit audit;
    audit.config = CounterConfig::make(max_increments, d, sigma);
    audit.level = 4.0 * sigma;
    const double root_d = std::sqrt(static_cast<double>(d));
    const double r_min = root_d / sigma;
    const double r_max = static_cast<double>(max_increments) / root_d;
    if (r_max < r_min) fail(errc::invalid_param, "shell is empty for this stream length");
    const std::vector<Point> targets = shell_lattice_points(d, r_min, r_max);
    if (targets.empty()) fail(errc::invalid_param, "shell contains no lattice points");
    audit.targets = targets.size();
    audit.reachable = reachable_estimates(audit.config, max_increments, node_budget);
    audit.report = verify_cover(audit.reachable.estimates, targets, audit.level);
    return audit;
}

/// Minimum size of a sigma-multiplicative cover of the shell alpha <= |x| <= beta
/// in the positive orthant: (1/3) 2^-d sigma^-d ln(beta / (e alpha)), floored at 0.
inline double shell_cover_lower_bound(double alpha, double beta, std::size_t d, double sigma) {
    if (!(alpha > 0.0 && beta > alpha)) fail(errc::invalid_param, "need 0 < alpha < beta");
    detail::check_sigma(sigma);
    if (d < 1) fail(errc::invalid_param, "dimension must be at least 1");
    const double layers = std::log(beta / alpha) - 1.0;
    if (layers <= 0.0) return 0.0;
    const double dd = static_cast<double>(d);
    return std::exp2(-dd - dd * std::log2(sigma)) * layers / 3.0;
}

struct StateSpaceBound {
    double states = 1.0;
    double bits = 0.0;  // log2(states)
};

/// Lower bound on the state count of any (n, d, sigma)-counter, n = 2^log2_n:
/// (1/3) 2^-d (4 sigma)^-d ln(n / (e d / sigma)), clamped below at one state.
inline StateSpaceBound state_space_lower_bound(long double log2_n, std::size_t d, double sigma) {
    detail::check_sigma(sigma);
    if (d < 1) fail(errc::invalid_param, "dimension must be at least 1");
    if (log2_n < 2.0L / std::numbers::ln2_v<long double>) fail(errc::invalid_param, "need n >= e^2");
    const long double dd = static_cast<long double>(d);
    const long double layers =
        log2_n * std::numbers::ln2_v<long double> - 1.0L - std::log(dd / static_cast<long double>(sigma));
    StateSpaceBound b;
    if (layers <= 0.0L) return b;
    const long double bits =
        -std::log2(3.0L) - dd - dd * std::log2(4.0L * static_cast<long double>(sigma)) + std::log2(layers);
    if (bits <= 0.0L) return b;
    b.bits = static_cast<double>(bits);
    b.states = static_cast<double>(std::exp2(bits));
    return b;
}

inline StateSpaceBound state_space_lower_bound(std::uint64_t n, std::size_t d, double sigma) {
    if (n < 1) fail(errc::invalid_param, "need n >= e^2");
    return state_space_lower_bound(std::log2(static_cast<long double>(n)), d, sigma);
}

/// Count-Min error parameter needed for Euclidean relative error sigma in d
/// dimensions: from |x_hat - x|^2 <= d^2 eps^2 |x|^2.
inline double countmin_epsilon_requirement(std::size_t d, double sigma) {
    if (d < 1) fail(errc::invalid_param, "dimension must be at least 1");
    return sigma / static_cast<double>(d);
}

}  // namespace veccount
