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

// Monte Carlo experiments.
//
// One stream is fixed for the whole experiment; only the counter's coins
// vary between trials. Trial i is seeded with base_seed + i. Trials are
// grouped into fixed-size chunks whose moments are merged in a fixed
// pairwise order, so results are bit-identical for any thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "veccount/baselines.hpp"
#include "veccount/counter.hpp"
#include "veccount/error.hpp"
#include "veccount/random.hpp"
#include "veccount/stream_io.hpp"

namespace veccount {

enum class Algo { veccount, dmorris, naive };

inline std::string_view to_string(Algo a) {
    switch (a) {
        case Algo::veccount: return "veccount";
        case Algo::dmorris: return "dmorris";
        case Algo::naive: return "naive";
    }
    return "?";
}

inline Algo parse_algo(std::string_view s) {
    if (s == "veccount") return Algo::veccount;
    if (s == "dmorris") return Algo::dmorris;
    if (s == "naive") return Algo::naive;
    fail(errc::invalid_param, "unknown algo '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Stream generation

struct CategoricalSource {
    std::vector<double> probs;
    std::uint64_t length = 0;
};

/// 2^s * a increments spread round-robin over the first `hot` coordinates,
/// then a single increment on every remaining coordinate.
struct AdversarialNaiveSource {
    std::uint32_t s = 0;
    std::uint64_t a = 0;
    std::size_t d = 0;
    std::size_t hot = 1;
};

struct FileSource {
    std::string path;
    bool binary = false;
    std::size_t d = 0;  // required for binary files
};

using StreamSource = std::variant<FileSource, CategoricalSource, AdversarialNaiveSource>;

inline void check_probs(const std::vector<double>& p) {
    if (p.empty()) fail(errc::invalid_param, "empty distribution");
    double total = 0.0;
    for (double q : p) {
        if (!(q >= 0.0)) fail(errc::invalid_param, "negative probability");
        total += q;
    }
    if (std::fabs(total - 1.0) > 1e-12) fail(errc::invalid_param, "probabilities must sum to 1");
}

inline Stream generate_categorical(const CategoricalSource& src, std::uint64_t seed) {
    check_probs(src.probs);
    std::vector<double> cdf(src.probs.size());
    std::partial_sum(src.probs.begin(), src.probs.end(), cdf.begin());
    // Guard the last bucket against rounding in the running sum.
    std::size_t last = cdf.size() - 1;
    while (last > 0 && src.probs[last] == 0.0) --last;
    Stream s;
    s.d = src.probs.size();
    s.events.reserve(src.length);
    RandomSource rng(seed);
    for (std::uint64_t i = 0; i < src.length; ++i) {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), last);
        while (src.probs[k] == 0.0) --k;
        s.events.push_back(static_cast<std::uint32_t>(k));
    }
    return s;
}

inline Stream generate_adversarial_naive(const AdversarialNaiveSource& src) {
    if (src.d < 2 || src.hot < 1 || src.hot >= src.d || src.a < 1 || src.s > 40)
        fail(errc::invalid_param, "need d >= 2, 1 <= hot < d, a >= 1, s <= 40");
    const std::uint64_t per_hot = (std::uint64_t{1} << src.s) * src.a;
    Stream s;
    s.d = src.d;
    s.events.reserve(per_hot * src.hot + (src.d - src.hot));
    for (std::uint64_t i = 0; i < per_hot; ++i)
        for (std::size_t k = 0; k < src.hot; ++k) s.events.push_back(static_cast<std::uint32_t>(k));
    for (std::size_t k = src.hot; k < src.d; ++k) s.events.push_back(static_cast<std::uint32_t>(k));
    return s;
}

/// Seed used for stream generation, kept apart from the trial seeds base_seed + i.
inline std::uint64_t stream_seed(std::uint64_t base_seed) {
    std::uint64_t x = base_seed ^ 0x53545245414d5321ull;
    return splitmix64(x);
}

inline Stream generate_stream(const StreamSource& source, std::uint64_t base_seed) {
    return std::visit(
        [&](const auto& src) -> Stream {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, FileSource>)
                return read_stream_file(src.path, src.binary, src.d);
            else if constexpr (std::is_same_v<T, CategoricalSource>)
                return generate_categorical(src, stream_seed(base_seed));
            else
                return generate_adversarial_naive(src);
        },
        source);
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentSpec {
    Algo algo = Algo::veccount;
    std::uint64_t n = 0;  // 0: the stream length
    std::size_t d = 0;    // 0: taken from the stream
    double sigma = 0.3;
    StreamSource stream = CategoricalSource{};
    std::uint64_t trials = 1;
    std::uint64_t base_seed = 0;
    Trigger trigger = Trigger::strict;
    std::uint64_t a_naive = 2;
    std::uint64_t morris_a = 0;  // 0: morris_accuracy_for(sigma)
    unsigned threads = 1;
};

/// Count, mean and centred second moment; merged with Chan's update.
struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        count += 1.0;
        const double delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }

    static Moments merge(const Moments& a, const Moments& b) {
        if (a.count == 0.0) return b;
        if (b.count == 0.0) return a;
        Moments r;
        r.count = a.count + b.count;
        const double delta = b.mean - a.mean;
        r.mean = a.mean + delta * (b.count / r.count);
        r.m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / r.count);
        return r;
    }

    double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
    double stderr_of_mean() const { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }
};

struct TrialStats {
    Algo algo = Algo::veccount;
    std::uint64_t trials = 0;
    std::uint64_t n = 0;
    std::vector<std::uint64_t> x;  // true count vector
    double norm2 = 0.0;            // |x|^2
    std::vector<double> mean_estimate;
    std::vector<double> mean_estimate_stderr;
    double mse = 0.0;  // E|x_hat - x|^2
    double mse_stderr = 0.0;
    double relative_mse = 0.0;  // mse / |x|^2
    double relative_mse_stderr = 0.0;
    std::map<std::uint64_t, std::uint64_t> u_histogram;  // final scale per trial; empty for dmorris
    std::uint64_t fail_count = 0;
    std::optional<CounterConfig> config;  // veccount only
    std::uint64_t morris_a = 0;           // dmorris only

    /// Fraction of trials whose final scale is at least `threshold`.
    double u_tail(std::uint64_t threshold) const {
        std::uint64_t hits = 0;
        for (const auto& [u, c] : u_histogram)
            if (u >= threshold) hits += c;
        return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
    }
};

namespace detail {

struct ChunkStats {
    std::vector<Moments> diff;  // x_hat_k - x_k
    Moments err2;               // |x_hat - x|^2
    std::map<std::uint64_t, std::uint64_t> u_histogram;
    std::uint64_t fails = 0;

    static ChunkStats merge(const ChunkStats& a, const ChunkStats& b) {
        ChunkStats r;
        r.diff.resize(a.diff.size());
        for (std::size_t k = 0; k < a.diff.size(); ++k) r.diff[k] = Moments::merge(a.diff[k], b.diff[k]);
        r.err2 = Moments::merge(a.err2, b.err2);
        r.u_histogram = a.u_histogram;
        for (const auto& [u, c] : b.u_histogram) r.u_histogram[u] += c;
        r.fails = a.fails + b.fails;
        return r;
    }
};

inline ChunkStats reduce_pairwise(std::vector<ChunkStats>& chunks, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return std::move(chunks[lo]);
    const std::size_t mid = lo + (hi - lo) / 2;
    return ChunkStats::merge(reduce_pairwise(chunks, lo, mid), reduce_pairwise(chunks, mid, hi));
}

inline constexpr std::uint64_t kChunkTrials = 1024;

}  // namespace detail

inline TrialStats run_trials(const ExperimentSpec& spec, const Stream& stream) {
    if (spec.trials < 1) fail(errc::invalid_param, "trials must be at least 1");
    const std::size_t d = spec.d ? spec.d : stream.d;
    if (d != stream.d) fail(errc::invalid_param, "stream dimension does not match d");
    const std::uint64_t n = spec.n ? spec.n : std::max<std::uint64_t>(1, stream.events.size());
    if (stream.events.size() > n) fail(errc::stream_overflow, "stream longer than n");

    TrialStats out;
    out.algo = spec.algo;
    out.trials = spec.trials;
    out.n = n;
    out.x = stream.counts();
    for (std::uint64_t xk : out.x) out.norm2 += static_cast<double>(xk) * static_cast<double>(xk);

    std::optional<CounterConfig> config;
    std::uint64_t morris_a = 0;
    switch (spec.algo) {
        case Algo::veccount: config = CounterConfig::make(n, d, spec.sigma, spec.trigger); break;
        case Algo::dmorris: morris_a = spec.morris_a ? spec.morris_a : morris_accuracy_for(spec.sigma); break;
        case Algo::naive:
            if (spec.a_naive < 1) fail(errc::invalid_param, "a_naive must be at least 1");
            break;
    }
    out.config = config;
    out.morris_a = morris_a;

    const std::vector<double> truth(out.x.begin(), out.x.end());
    const auto run_chunk = [&](std::uint64_t chunk) {
        detail::ChunkStats cs;
        cs.diff.resize(d);
        const std::uint64_t first = chunk * detail::kChunkTrials;
        const std::uint64_t last = std::min(spec.trials, first + detail::kChunkTrials);
        for (std::uint64_t t = first; t < last; ++t) {
            const std::uint64_t seed = spec.base_seed + t;
            std::vector<double> est;
            switch (spec.algo) {
                case Algo::veccount: {
                    VectorCounter c(*config, seed);
                    for (std::uint32_t e : stream.events) c.increment(e);
                    est = c.query();
                    ++cs.u_histogram[c.state().u];
                    if (c.state().failed) ++cs.fails;
                    break;
                }
                case Algo::dmorris: {
                    DMorrisCounter c(d, morris_a, seed);
                    for (std::uint32_t e : stream.events) c.increment(e);
                    est = c.query();
                    break;
                }
                case Algo::naive: {
                    NaiveSharedCounter c(d, spec.a_naive, seed);
                    for (std::uint32_t e : stream.events) c.increment(e);
                    est = c.query();
                    ++cs.u_histogram[c.state().u];
                    break;
                }
            }
            double err2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = est[k] - truth[k];
                cs.diff[k].add(diff);
                err2 += diff * diff;
            }
            cs.err2.add(err2);
        }
        return cs;
    };

    const std::uint64_t chunks = (spec.trials + detail::kChunkTrials - 1) / detail::kChunkTrials;
    std::vector<detail::ChunkStats> results(chunks);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, spec.threads), chunks));
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) results[c] = run_chunk(c);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) results[c] = run_chunk(c);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    detail::ChunkStats total = detail::reduce_pairwise(results, 0, results.size());
    out.mean_estimate.resize(d);
    out.mean_estimate_stderr.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        out.mean_estimate[k] = truth[k] + total.diff[k].mean;
        out.mean_estimate_stderr[k] = total.diff[k].stderr_of_mean();
    }
    out.mse = total.err2.mean;
    out.mse_stderr = total.err2.stderr_of_mean();
    if (out.norm2 > 0.0) {
        out.relative_mse = out.mse / out.norm2;
        out.relative_mse_stderr = out.mse_stderr / out.norm2;
    } else {
        out.relative_mse = out.mse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    out.u_histogram = std::move(total.u_histogram);
    out.fail_count = total.fails;
    return out;
}

inline TrialStats run_trials(const ExperimentSpec& spec) {
    return run_trials(spec, generate_stream(spec.stream, spec.base_seed));
}

}  // namespace veccount
