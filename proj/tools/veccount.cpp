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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "veccount/cli.hpp"

namespace {

using namespace veccount;

unsigned default_threads() {
    if (const char* env = std::getenv("VECCOUNT_THREADS")) {
        try {
            return static_cast<unsigned>(std::stoul(env));
        } catch (...) {
        }
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"d-dimensional approximate counting with a shared scale"};
    app.require_subcommand(1);

    // run
    cli::RunOptions run;
    std::string run_algo = "veccount";
    std::string run_trigger = "strict";
    auto* run_cmd = app.add_subcommand("run", "Feed a stream file to a counter and print its estimate");
    run_cmd->add_option("--stream", run.stream, "Stream file")->required();
    run_cmd->add_flag("--binary", run.binary, "Stream is little-endian u32 coordinates (needs --d)");
    run_cmd->add_option("--n", run.n, "Maximum stream length (default: stream length)");
    run_cmd->add_option("--d", run.d, "Dimension (default: from the stream header)");
    run_cmd->add_option("--sigma", run.sigma, "Relative error in (0, 1/3)");
    run_cmd->add_option("--seed", run.seed, "Random seed");
    run_cmd->add_option("--algo", run_algo, "veccount | dmorris | naive");
    run_cmd->add_option("--a-naive", run.a_naive, "Entry cap for the naive baseline");
    run_cmd->add_option("--morris-a", run.morris_a, "Morris accuracy parameter (default from sigma)");
    run_cmd->add_option("--trigger", run_trigger, "strict | inclusive");
    run_cmd->add_option("--state-in", run.state_in, "Resume from a saved counter state");
    run_cmd->add_option("--state-out", run.state_out, "Save the final counter state");

    // trace
    cli::TraceOptions trace;
    std::string trace_dist = "0.5,0.25,0.125,0.125";
    auto* trace_cmd = app.add_subcommand("trace", "Print the state table of one counter run");
    trace_cmd->add_option("--d", trace.d, "Dimension");
    trace_cmd->add_option("--mstar", trace.m_star, "Symbol budget for V");
    trace_cmd->add_option("--dist", trace_dist, "Comma-separated coordinate probabilities");
    trace_cmd->add_option("--seed", trace.seed, "Random seed");
    trace_cmd->add_option("--steps", trace.steps, "Number of increments");

    // experiment
    std::string spec_file;
    std::map<std::string, std::string> flags;
    const auto kv_option = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                               const std::string& help) {
        cmd->add_option_function<std::string>(flag, [&flags, key](const std::string& v) { flags[key] = v; }, help);
    };
    unsigned threads = default_threads();
    auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo trials; TSV statistics on stdout");
    exp_cmd->add_option("--spec", spec_file, "key=value experiment file");
    kv_option(exp_cmd, "--algo", "algo", "veccount | dmorris | naive");
    kv_option(exp_cmd, "--n", "n", "Maximum stream length");
    kv_option(exp_cmd, "--d", "d", "Dimension");
    kv_option(exp_cmd, "--sigma", "sigma", "Relative error");
    kv_option(exp_cmd, "--trials", "trials", "Number of trials");
    kv_option(exp_cmd, "--seed", "seed", "Base seed; trial i uses seed + i");
    kv_option(exp_cmd, "--trigger", "trigger", "strict | inclusive");
    kv_option(exp_cmd, "--a-naive", "a_naive", "Entry cap for the naive baseline");
    kv_option(exp_cmd, "--morris-a", "morris_a", "Morris accuracy parameter");
    kv_option(exp_cmd, "--stream", "stream", "Stream file");
    kv_option(exp_cmd, "--dist", "dist", "Categorical stream probabilities");
    kv_option(exp_cmd, "--length", "length", "Categorical stream length");
    kv_option(exp_cmd, "--adversarial-s", "adversarial_s", "Adversarial stream scale exponent");
    kv_option(exp_cmd, "--adversarial-a", "adversarial_a", "Adversarial stream hot multiplier");
    kv_option(exp_cmd, "--adversarial-hot", "adversarial_hot", "Number of hot coordinates");
    exp_cmd->add_flag_function(
        "--binary", [&flags](std::int64_t) { flags["binary"] = "true"; }, "Stream file is binary");
    exp_cmd->add_option("--threads", threads, "Worker threads (default: VECCOUNT_THREADS or 1)");

    // bounds
    std::vector<std::string> bound_ns;
    cli::BoundsOptions bounds;
    auto* bounds_cmd = app.add_subcommand("bounds", "Lower bound vs implemented space, TSV");
    bounds_cmd->add_option("--n", bound_ns, "Stream lengths, decimal or 2^k")->required()->delimiter(',');
    bounds_cmd->add_option("--d", bounds.ds, "Dimensions")->required()->delimiter(',');
    bounds_cmd->add_option("--sigma", bounds.sigmas, "Relative errors")->required()->delimiter(',');

    // cover
    cli::CoverOptions cover;
    auto* cover_cmd = app.add_subcommand("cover", "Check that reachable estimates cover the integer shell");
    cover_cmd->add_option("--d", cover.d, "Dimension");
    cover_cmd->add_option("--sigma", cover.sigma, "Relative error");
    cover_cmd->add_option("--max-increments", cover.max_increments, "Stream length explored");
    cover_cmd->add_option("--node-budget", cover.node_budget, "Maximum number of explored states");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitParam;
    }

    try {
        if (*run_cmd) {
            run.algo = parse_algo(run_algo);
            run.trigger = cli::parse_trigger(run_trigger);
            return cli::cmd_run(run, std::cout, std::cerr);
        }
        if (*trace_cmd) {
            trace.dist = cli::parse_doubles(trace_dist);
            return cli::cmd_trace(trace, std::cout, std::cerr);
        }
        if (*exp_cmd) {
            cli::KeyValues kv;
            if (!spec_file.empty()) {
                std::ifstream in(spec_file);
                if (!in) fail(errc::invalid_param, "cannot open " + spec_file);
                kv = cli::parse_key_values(in);
            }
            for (const auto& [k, v] : flags) kv[k] = v;
            if (!kv.count("threads")) kv["threads"] = std::to_string(threads);
            else if (exp_cmd->count("--threads")) kv["threads"] = std::to_string(threads);
            return cli::cmd_experiment(cli::spec_from_key_values(kv), std::cout, std::cerr);
        }
        if (*bounds_cmd) {
            for (const auto& s : bound_ns) bounds.ns.push_back(cli::parse_magnitude(s));
            return cli::cmd_bounds(bounds, std::cout, std::cerr);
        }
        if (*cover_cmd) return cli::cmd_cover(cover, std::cout, std::cerr);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_code_for(e.code());
    }
    return cli::kExitParam;
}
