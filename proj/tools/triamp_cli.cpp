// Copyright 2026 The triamp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end for the experiment protocols.
//
// Exit codes: 0 success, 2 configuration error, 3 every estimator trial diverged.

#include "triamp.hpp"
#include "triamp/harness/config.hpp"
#include "triamp/harness/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace triamp;
using namespace triamp::harness;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct SharedFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> workers;
    std::string algo;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
    cmd->add_option("--config", f.config, "config file (key = value lines)");
    cmd->add_option("--out", f.out, "output CSV path (stdout when omitted)");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--trials", f.trials, "trials per grid point");
    cmd->add_option("--workers", f.workers, "worker threads");
    cmd->add_option("--algo", f.algo, "comma-separated algorithms: tri-amp,bigamp-lmmse,replica");
}

ExperimentSpec build_spec(const SharedFlags& f) {
    ExperimentSpec spec = f.config.empty() ? ExperimentSpec{} : load_config(f.config);
    if (!f.out.empty()) spec.out = f.out;
    if (f.seed) spec.seed = *f.seed;
    if (f.trials) spec.trials = *f.trials;
    if (f.workers) spec.workers = *f.workers;
    if (!f.algo.empty()) spec.algorithms = triamp::harness::detail::split_list(f.algo);
    spec.validate();
    return spec;
}

template <typename Rows>
void write_rows(const ExperimentSpec& spec, const Rows& rows) {
    if (spec.out.empty()) {
        emit_csv(rows, std::cout);
    } else {
        emit_csv(rows, spec.out);
    }
}

void print_summary(const std::vector<ResultRow>& rows) {
    for (const auto& r : rows) {
        std::printf("%-13s MSE_G %8.2f dB  MSE_F %8.2f dB  MSE_H %8.2f dB  MSE_Xd %8.2f dB  SER %.3g", r.algorithm.c_str(),
                    r.mse_G_dB, r.mse_F_dB, r.mse_H_dB, r.mse_Xd_dB, r.ser);
        if (r.algorithm != "replica") {
            std::printf("  iters %.1f  diverged %d/%d", r.iterations, r.divergences, r.trials);
        }
        std::printf("\n");
    }
}

/// Re-runs trial 0 of the base point with the trajectory on, optionally
/// dumping the realization and estimates.
void trace_first_trial(const ExperimentSpec& spec, const std::string& trajectory, const std::string& snapshot) {
    GridPoint point = base_point(spec);
    SystemConfig cfg = point.cfg;
    cfg.seeds = SeedSet::derive(spec.seed, 0, 0);
    const FrameRealization frame = make_frame(cfg, spec.ensemble);
    AmpOptions opts = spec.amp;
    opts.init_seed = cfg.seeds.init;
    opts.record_trajectory = true;
    const auto res = tri_amp_run(frame.Y, frame.S, CMatrix(frame.pilots()), frame.sigma2, PriorSpec::from_config(cfg),
                                 opts, &frame);
    if (!trajectory.empty()) {
        std::ofstream os(trajectory);
        if (!os) throw std::runtime_error("cannot open '" + trajectory + "' for writing");
        emit_trajectory(res.trajectory, os);
    }
    if (!snapshot.empty()) {
        write_snapshot(snapshot, {NamedMatrix::complex("G", frame.G), NamedMatrix::complex("F", frame.F),
                                  NamedMatrix::complex("H", frame.H), NamedMatrix::real("S", frame.S),
                                  NamedMatrix::complex("X", frame.X), NamedMatrix::complex("W", frame.W),
                                  NamedMatrix::complex("Y", frame.Y), NamedMatrix::complex("G_hat", res.est.G),
                                  NamedMatrix::complex("F_hat", res.est.F), NamedMatrix::complex("H_hat", res.est.H),
                                  NamedMatrix::complex("X_hat", res.est.X)});
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-blind cascaded channel estimation for RIS-aided massive MIMO"};
    app.require_subcommand(1);

    SharedFlags flags;
    std::string trajectory;
    std::string snapshot;
    bool print_config = false;

    auto* simulate = app.add_subcommand("simulate", "run one operating point and print the metrics");
    add_shared(simulate, flags);
    simulate->add_option("--trajectory", trajectory, "per-iteration CSV of trial 0 (Tri-AMP)");
    simulate->add_option("--snapshot", snapshot, "binary snapshot of trial 0 (truth and estimates)");
    simulate->add_flag("--print-config", print_config, "echo the effective configuration and exit");

    auto* sweep_snr = app.add_subcommand("sweep-snr", "MSE/SER versus SNR (snr_list)");
    add_shared(sweep_snr, flags);
    auto* sweep_pilots = app.add_subcommand("sweep-pilots", "MSE/SER versus T_p at fixed T_d (tp_list)");
    add_shared(sweep_pilots, flags);
    auto* phase = app.add_subcommand("phase-diagram", "success map over rho_list x t_list");
    add_shared(phase, flags);
    auto* min_pilots = app.add_subcommand("min-pilots", "noiseless minimum pilot length per T (t_list)");
    add_shared(min_pilots, flags);
    auto* replica = app.add_subcommand("replica", "replica fixed points for both starts");
    add_shared(replica, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const ExperimentSpec spec = build_spec(flags);
        if (simulate->parsed()) {
            if (print_config) {
                std::cout << emit_config(spec);
                return 0;
            }
            const auto rows = run_simulate(spec);
            print_summary(rows);
            if (!spec.out.empty()) emit_csv(rows, spec.out);
            if (!trajectory.empty() || !snapshot.empty()) trace_first_trial(spec, trajectory, snapshot);
            return all_trials_failed(rows) ? kExitNumerical : 0;
        }
        if (sweep_snr->parsed() || sweep_pilots->parsed() || phase->parsed()) {
            const auto rows = sweep_snr->parsed()      ? run_snr_sweep(spec)
                              : sweep_pilots->parsed() ? run_pilot_sweep(spec)
                                                       : run_phase_diagram(spec);
            write_rows(spec, rows);
            return all_trials_failed(rows) ? kExitNumerical : 0;
        }
        if (min_pilots->parsed()) {
            const auto rows = min_pilot_search(spec);
            write_rows(spec, rows);
            return 0;
        }
        if (replica->parsed()) {
            write_rows(spec, run_replica_table(spec));
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DimensionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
