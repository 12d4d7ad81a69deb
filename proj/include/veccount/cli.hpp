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

// Command implementations behind the `veccount` tool. Each command writes
// machine-readable data to `out`, prose to `err`, and returns the exit code:
// 0 on success, 2 for malformed input files, 3 for bad parameters.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "veccount/analysis.hpp"
#include "veccount/baselines.hpp"
#include "veccount/counter.hpp"
#include "veccount/error.hpp"
#include "veccount/harness.hpp"
#include "veccount/state_io.hpp"
#include "veccount/stream_io.hpp"
#include "veccount/varint.hpp"

namespace veccount::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMalformed = 2;
inline constexpr int kExitParam = 3;

inline int exit_code_for(errc code) {
    switch (code) {
        case errc::stream_file_error:
        case errc::malformed_code:
        case errc::arity_mismatch:
        case errc::corrupt_state: return kExitMalformed;
        default: return kExitParam;
    }
}

/// Shortest text that round-trips the double.
inline std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::vector<double> parse_doubles(std::string_view csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = std::min(csv.find(',', pos), csv.size());
        const std::string_view tok = veccount::detail::trim(csv.substr(pos, comma - pos));
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
            fail(errc::invalid_param, "bad number '" + std::string(tok) + "'");
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

template <typename T>
T parse_unsigned(std::string_view s, std::string_view what) {
    T v{};
    if (!veccount::detail::parse_uint(veccount::detail::trim(s), v))
        fail(errc::invalid_param, "bad " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

/// A stream length given as a decimal integer or as "2^k".
struct Magnitude {
    std::string label;
    long double log2 = 0.0L;
};

inline Magnitude parse_magnitude(std::string_view s) {
    s = veccount::detail::trim(s);
    Magnitude m;
    m.label = std::string(s);
    if (s.substr(0, 2) == "2^") {
        const auto k = parse_unsigned<std::uint32_t>(s.substr(2), "exponent");
        m.log2 = static_cast<long double>(k);
    } else {
        const auto n = parse_unsigned<std::uint64_t>(s, "n");
        if (n < 1) fail(errc::invalid_param, "n must be positive");
        m.log2 = std::log2(static_cast<long double>(n));
    }
    return m;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    }
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
    std::string stream;
    bool binary = false;
    std::uint64_t n = 0;  // 0: stream length
    std::size_t d = 0;    // 0: from the stream header
    double sigma = 0.3;
    std::uint64_t seed = 0;
    Algo algo = Algo::veccount;
    std::uint64_t a_naive = 2;
    std::uint64_t morris_a = 0;
    Trigger trigger = Trigger::strict;
    std::string state_in;
    std::string state_out;
};

inline void write_vector(std::ostream& out, const std::vector<double>& v) {
    for (std::size_t k = 0; k < v.size(); ++k) out << (k ? " " : "") << format_number(v[k]);
    out << '\n';
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::corrupt_state, "cannot open state file " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opt.stream.empty()) fail(errc::invalid_param, "--stream is required");
        const Stream s = read_stream_file(opt.stream, opt.binary, opt.d);
        if (opt.d && opt.d != s.d) fail(errc::stream_file_error, "stream header dimension differs from --d");
        const std::uint64_t n = opt.n ? opt.n : std::max<std::uint64_t>(1, s.events.size());

        if ((!opt.state_in.empty() || !opt.state_out.empty()) && opt.algo != Algo::veccount)
            fail(errc::invalid_param, "state files are only supported for --algo veccount");

        std::vector<double> est;
        switch (opt.algo) {
            case Algo::veccount: {
                std::optional<VectorCounter> c;
                if (!opt.state_in.empty()) {
                    const auto bytes = read_file_bytes(opt.state_in);
                    c.emplace(deserialize(bytes));
                    if (c->config().d != s.d) fail(errc::invalid_param, "state dimension differs from stream");
                } else {
                    c.emplace(CounterConfig::make(n, s.d, opt.sigma, opt.trigger), opt.seed);
                }
                for (std::uint32_t e : s.events) c->increment(e);
                est = c->query();
                if (!opt.state_out.empty()) {
                    const auto bytes = serialize(*c);
                    std::ofstream f(opt.state_out, std::ios::binary);
                    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
                    if (!f) fail(errc::invalid_param, "cannot write " + opt.state_out);
                }
                err << "U=" << c->state().u << " code_length=" << c->code_length() << "/" << c->config().m_star
                    << (c->state().failed ? " FAILED" : "") << '\n';
                break;
            }
            case Algo::dmorris: {
                if (s.events.size() > n) fail(errc::stream_overflow, "stream longer than n");
                DMorrisCounter c(s.d, opt.morris_a ? opt.morris_a : morris_accuracy_for(opt.sigma), opt.seed);
                for (std::uint32_t e : s.events) c.increment(e);
                est = c.query();
                break;
            }
            case Algo::naive: {
                if (s.events.size() > n) fail(errc::stream_overflow, "stream longer than n");
                NaiveSharedCounter c(s.d, opt.a_naive, opt.seed);
                for (std::uint32_t e : s.events) c.increment(e);
                est = c.query();
                break;
            }
        }
        write_vector(out, est);
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// trace

struct TraceOptions {
    std::size_t d = 4;
    std::uint64_t m_star = 12;
    std::vector<double> dist{0.5, 0.25, 0.125, 0.125};
    std::uint64_t seed = 0;
    std::uint64_t steps = 1000;
    std::uint64_t u_star = 64;
};

struct TraceRow {
    std::uint64_t u = 0;
    std::vector<std::uint64_t> v;
    std::vector<std::uint64_t> estimate;
    std::vector<std::uint64_t> x;
    std::string encoded;
};

namespace detail {

inline std::string centered(std::string_view text, std::size_t width) {
    if (text.size() >= width) return std::string(text);
    const std::size_t left = (width - text.size()) / 2;
    return std::string(left, ' ') + std::string(text) + std::string(width - text.size() - left, ' ');
}

inline std::string counts_field(const std::vector<std::uint64_t>& xs) {
    std::ostringstream os;
    os << ' ';
    for (std::uint64_t x : xs) os << std::setw(5) << x;
    os << "  ";
    return os.str();
}

}  // namespace detail

inline void write_trace_header(std::ostream& out, std::size_t d) {
    const std::size_t v_width = 2 * d + 3;
    const std::size_t c_width = 5 * d + 3;
    out << "  U  |" << detail::centered("V", v_width) << '|' << detail::centered("estimate", c_width) << '|'
        << detail::centered("x", c_width) << "|  encoded V\n";
    out << std::string(5, '-') << '+' << std::string(v_width, '-') << '+' << std::string(c_width, '-') << '+'
        << std::string(c_width, '-') << '+' << std::string(15, '-') << '\n';
}

inline void write_trace_row(std::ostream& out, const TraceRow& row) {
    std::ostringstream v;
    v << ' ';
    for (std::size_t k = 0; k < row.v.size(); ++k) {
        if (k == 0)
            v << std::setw(2) << row.v[k];
        else
            v << ' ' << row.v[k];
    }
    v << "  ";
    out << std::setw(3) << row.u << "  |" << v.str() << '|' << detail::counts_field(row.estimate) << '|'
        << detail::counts_field(row.x) << "|  " << row.encoded << '\n';
}

/// Inverse of write_trace_row. The first four '|' characters separate the
/// numeric columns; everything after is the encoded vector.
inline TraceRow parse_trace_row(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        const std::size_t bar = line.find('|', pos);
        if (bar == std::string_view::npos) fail(errc::invalid_param, "trace row has too few columns");
        cols.push_back(line.substr(pos, bar - pos));
        pos = bar + 1;
    }
    const auto ints = [](std::string_view s) {
        std::vector<std::uint64_t> out;
        std::istringstream is{std::string(s)};
        for (std::uint64_t v; is >> v;) out.push_back(v);
        return out;
    };
    TraceRow row;
    const auto u = ints(cols[0]);
    if (u.size() != 1) fail(errc::invalid_param, "bad U column");
    row.u = u[0];
    row.v = ints(cols[1]);
    row.estimate = ints(cols[2]);
    row.x = ints(cols[3]);
    row.encoded = std::string(veccount::detail::trim(line.substr(pos)));
    return row;
}

/// Runs the counter on a random stream and lists the state every time (U, V)
/// changes. Scale-ups use the inclusive trigger.
inline std::vector<TraceRow> trace_rows(const TraceOptions& opt) {
    if (opt.dist.size() != opt.d) fail(errc::invalid_param, "distribution length must equal d");
    const Stream s = generate_categorical({opt.dist, opt.steps}, stream_seed(opt.seed));
    const CounterConfig cfg =
        CounterConfig::with_budget(std::max<std::uint64_t>(1, opt.steps), opt.d, opt.m_star, opt.u_star,
                                   Trigger::inclusive);
    VectorCounter c(cfg, opt.seed);
    std::vector<std::uint64_t> x(opt.d, 0);

    std::vector<TraceRow> rows;
    const auto emit = [&] {
        TraceRow r;
        r.u = c.state().u;
        r.v = c.state().v;
        for (double e : c.query()) r.estimate.push_back(static_cast<std::uint64_t>(e));
        r.x = x;
        r.encoded = encode_vec(r.v).str();
        rows.push_back(std::move(r));
    };
    emit();
    for (std::uint32_t e : s.events) {
        const std::uint64_t u_before = c.state().u;
        const std::vector<std::uint64_t> v_before = c.state().v;
        c.increment(e);
        ++x[e];
        if (c.state().u != u_before || c.state().v != v_before) emit();
    }
    return rows;
}

inline int cmd_trace(const TraceOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        check_probs(opt.dist);
        const auto rows = trace_rows(opt);
        write_trace_header(out, opt.d);
        for (const auto& r : rows) write_trace_row(out, r);
        err << rows.size() << " state changes over " << opt.steps << " increments, final U=" << rows.back().u
            << '\n';
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// experiment

/// Flat key=value experiment description. Keys: algo, n, d, sigma, trials,
/// seed, trigger, a_naive, morris_a, threads, and one stream source:
/// stream (+ binary), dist + length, or adversarial_s + adversarial_a
/// (+ adversarial_hot).
using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view t = veccount::detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string_view::npos)
            fail(errc::invalid_param, "line " + std::to_string(lineno) + ": expected key=value");
        kv[std::string(veccount::detail::trim(t.substr(0, eq)))] = std::string(veccount::detail::trim(t.substr(eq + 1)));
    }
    return kv;
}

inline Trigger parse_trigger(std::string_view s) {
    if (s == "strict") return Trigger::strict;
    if (s == "inclusive") return Trigger::inclusive;
    fail(errc::invalid_param, "trigger must be strict or inclusive");
}

inline ExperimentSpec spec_from_key_values(const KeyValues& kv) {
    static const char* known[] = {"algo",  "n",       "d",        "sigma",    "trials",  "seed",
                                  "trigger", "a_naive", "morris_a", "threads",  "stream",  "binary",
                                  "dist",  "length",  "adversarial_s", "adversarial_a", "adversarial_hot"};
    for (const auto& [k, v] : kv) {
        if (std::find(std::begin(known), std::end(known), k) == std::end(known))
            fail(errc::invalid_param, "unknown experiment key '" + k + "'");
    }
    const auto get = [&](const char* k) -> std::optional<std::string> {
        auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    ExperimentSpec spec;
    if (auto v = get("algo")) spec.algo = parse_algo(*v);
    if (auto v = get("n")) spec.n = parse_unsigned<std::uint64_t>(*v, "n");
    if (auto v = get("d")) spec.d = parse_unsigned<std::size_t>(*v, "d");
    if (auto v = get("sigma")) spec.sigma = parse_doubles(*v).at(0);
    if (auto v = get("trials")) spec.trials = parse_unsigned<std::uint64_t>(*v, "trials");
    if (auto v = get("seed")) spec.base_seed = parse_unsigned<std::uint64_t>(*v, "seed");
    if (auto v = get("trigger")) spec.trigger = parse_trigger(*v);
    if (auto v = get("a_naive")) spec.a_naive = parse_unsigned<std::uint64_t>(*v, "a_naive");
    if (auto v = get("morris_a")) spec.morris_a = parse_unsigned<std::uint64_t>(*v, "morris_a");
    if (auto v = get("threads")) spec.threads = parse_unsigned<unsigned>(*v, "threads");

    const int sources = (get("stream") ? 1 : 0) + (get("dist") ? 1 : 0) + (get("adversarial_s") ? 1 : 0);
    if (sources != 1) fail(errc::invalid_param, "exactly one of stream, dist, adversarial_s is required");
    if (auto path = get("stream")) {
        FileSource f;
        f.path = *path;
        f.binary = get("binary").value_or("false") == "true";
        f.d = spec.d;
        spec.stream = f;
    } else if (auto dist = get("dist")) {
        CategoricalSource c;
        c.probs = parse_doubles(*dist);
        const auto len = get("length");
        if (!len) fail(errc::invalid_param, "dist requires length");
        c.length = parse_unsigned<std::uint64_t>(*len, "length");
        check_probs(c.probs);
        if (spec.d && spec.d != c.probs.size()) fail(errc::invalid_param, "dist length differs from d");
        spec.stream = c;
    } else {
        AdversarialNaiveSource a;
        a.s = parse_unsigned<std::uint32_t>(*get("adversarial_s"), "adversarial_s");
        const auto av = get("adversarial_a");
        if (!av) fail(errc::invalid_param, "adversarial_s requires adversarial_a");
        a.a = parse_unsigned<std::uint64_t>(*av, "adversarial_a");
        if (auto h = get("adversarial_hot")) a.hot = parse_unsigned<std::size_t>(*h, "adversarial_hot");
        if (!spec.d) fail(errc::invalid_param, "adversarial streams need d");
        a.d = spec.d;
        spec.stream = a;
    }
    return spec;
}

inline void write_experiment_tsv(std::ostream& out, const TrialStats& st) {
    out << "statistic\tindex\tvalue\tstderr\n";
    const auto row = [&](std::string_view name, std::string_view index, const std::string& value,
                         const std::string& se = "") {
        out << name << '\t' << index << '\t' << value << '\t' << se << '\n';
    };
    const auto num = [](double v) { return format_number(v); };
    row("algo", "", std::string(to_string(st.algo)));
    row("trials", "", std::to_string(st.trials));
    row("n", "", std::to_string(st.n));
    row("d", "", std::to_string(st.x.size()));
    if (st.config) {
        row("a", "", std::to_string(st.config->a));
        row("m_star", "", std::to_string(st.config->m_star));
        row("u_star", "", std::to_string(st.config->u_star));
    }
    if (st.morris_a) row("morris_a", "", std::to_string(st.morris_a));
    row("norm2", "", num(st.norm2));
    row("mse", "", num(st.mse), num(st.mse_stderr));
    row("relative_mse", "", num(st.relative_mse), num(st.relative_mse_stderr));
    row("fail_count", "", std::to_string(st.fail_count));
    for (std::size_t k = 0; k < st.x.size(); ++k) row("x", std::to_string(k + 1), std::to_string(st.x[k]));
    for (std::size_t k = 0; k < st.x.size(); ++k)
        row("mean_estimate", std::to_string(k + 1), num(st.mean_estimate[k]), num(st.mean_estimate_stderr[k]));
    for (const auto& [u, c] : st.u_histogram) row("u_histogram", std::to_string(u), std::to_string(c));
}

inline int cmd_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const TrialStats st = run_trials(spec);
        write_experiment_tsv(out, st);
        err << to_string(st.algo) << ": " << st.trials << " trials, relative_mse=" << st.relative_mse
            << " (+/- " << st.relative_mse_stderr << "), failures=" << st.fail_count << '\n';
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsOptions {
    std::vector<Magnitude> ns;
    std::vector<std::size_t> ds;
    std::vector<double> sigmas;
};

inline int cmd_bounds(const BoundsOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opt.ns.empty() || opt.ds.empty() || opt.sigmas.empty())
            fail(errc::invalid_param, "need at least one n, d and sigma");
        out << "n\td\tsigma\tlower_bits\timpl_bits\tratio\n";
        std::size_t rows = 0;
        for (const auto& n : opt.ns)
            for (std::size_t d : opt.ds)
                for (double sigma : opt.sigmas) {
                    const StateSpaceBound lb = state_space_lower_bound(n.log2, d, sigma);
                    const SpaceBits impl = space_bits_at(n.log2, d, sigma);
                    out << n.label << '\t' << d << '\t' << format_number(sigma) << '\t' << format_number(lb.bits)
                        << '\t' << impl.total << '\t'
                        << format_number(lb.bits / static_cast<double>(impl.total)) << '\n';
                    ++rows;
                }
        err << rows << " rows; lower_bits is log2 of the state-space lower bound\n";
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// cover

struct CoverOptions {
    std::size_t d = 1;
    double sigma = 0.3;
    std::uint64_t max_increments = 100;
    std::size_t node_budget = kDefaultNodeBudget;
};

inline int cmd_cover(const CoverOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const CoverAudit a = audit_cover(opt.d, opt.sigma, opt.max_increments, opt.node_budget);
        out << "covered=" << (a.report.covered ? "true" : "false") << '\n';
        out << "level=" << format_number(a.level) << '\n';
        out << "worst_ratio=" << format_number(a.report.worst_ratio) << '\n';
        out << "worst_point=";
        for (std::size_t k = 0; k < a.report.worst_point.size(); ++k)
            out << (k ? " " : "") << format_number(a.report.worst_point[k]);
        out << '\n';
        out << "targets=" << a.targets << '\n';
        out << "estimates=" << a.reachable.estimates.size() << '\n';
        out << "states=" << a.reachable.states << '\n';
        err << "integer shell points only; the continuous shell is not sampled\n";
        return kExitOk;
    });
}

}  // namespace veccount::cli
