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


#pragma once

// Monte Carlo protocols: per-trial generate / estimate / score on a worker
// pool, aggregation into one row per (grid point, algorithm), and CSV output.
//
// Every trial draws from streams keyed by (seed, point, trial) and writes into
// its own result slot, so output does not depend on the worker count.

#include "triamp/baseline.hpp"
#include "triamp/frame.hpp"
#include "triamp/harness/config.hpp"
#include "triamp/metrics.hpp"
#include "triamp/replica.hpp"
#include "triamp/tri_amp.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace triamp::harness {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One grid point: the system it simulates and its sweep coordinates.
struct GridPoint {
    int index = 0;
    SystemConfig cfg;                 // sigma2 resolved; seeds assigned per trial
    std::optional<double> snr_db;
};

struct TrialRecord {
    Metrics metrics;
    AmpStatus status = AmpStatus::max_iters;
    bool first_attempt_diverged = false;
    double wall_ms = kNaN;
};

struct ResultRow {
    int point = 0;
    std::string algorithm;
    SystemConfig cfg;
    std::string ensemble;
    std::optional<double> snr_db;
    double beta = 0.0;
    int trials = 0;
    int ok_trials = 0;                 // trials that did not end diverged
    int divergences = 0;
    int first_attempt_divergences = 0;
    double mse_G_dB = kNaN, mse_G_se_dB = kNaN;
    double mse_F_dB = kNaN, mse_F_se_dB = kNaN;
    double mse_H_dB = kNaN, mse_H_se_dB = kNaN;
    double mse_Xd_dB = kNaN, mse_Xd_se_dB = kNaN;
    double ser = kNaN, ser_se = kNaN;
    double iterations = kNaN;
    std::optional<bool> success_G, success_F, success_H, success_Xd;
    std::string replica_init;
    std::optional<bool> replica_distinct;
    std::optional<bool> replica_converged;
    std::optional<double> wall_ms;
};

struct DbAggregate {
    double mean_dB = kNaN;
    double se_dB = kNaN;
};

/// Mean of linear values reported in dB, with the standard error mapped to
/// dB by the first-order (delta-method) rule se_dB = 10/ln10 * se / mean.
inline DbAggregate aggregate_db(const std::vector<double>& linear) {
    if (linear.empty()) return {};
    const double n = static_cast<double>(linear.size());
    double mean = 0.0;
    for (double v : linear) mean += v;
    mean /= n;
    double se = 0.0;
    if (linear.size() > 1) {
        double ss = 0.0;
        for (double v : linear) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / (n - 1.0) / n);
    }
    return {to_db(mean), mean > 0.0 ? 10.0 / std::numbers::ln10 * se / mean : kNaN};
}

struct MeanSe {
    double mean = kNaN;
    double se = kNaN;
};

inline MeanSe mean_se(const std::vector<double>& v) {
    if (v.empty()) return {};
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

/// Runs fn(task) for task in [0, count) on `workers` threads.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

/// Generates trial `trial` of `point` and runs one estimator on it.
inline TrialRecord run_trial(const ExperimentSpec& spec, const GridPoint& point, int trial,
                             const std::string& algorithm, const AmpOptions& amp_opts, bool record_time) {
    SystemConfig cfg = point.cfg;
    cfg.seeds = SeedSet::derive(spec.seed, static_cast<std::uint64_t>(point.index), static_cast<std::uint64_t>(trial));
    const auto start = std::chrono::steady_clock::now();
    const FrameRealization frame = make_frame(cfg, spec.ensemble);
    AmpOptions opts = amp_opts;
    opts.init_seed = cfg.seeds.init;
    const PriorSpec prior = PriorSpec::from_config(cfg);
    const CMatrix X_pilot = frame.pilots();
    const AmpResult res = algorithm == "tri-amp"
                              ? tri_amp_run(frame.Y, frame.S, X_pilot, frame.sigma2, prior, opts, &frame)
                              : bigamp_lmmse_baseline(frame.Y, frame.S, X_pilot, frame.sigma2, prior, opts, &frame);
    TrialRecord rec;
    rec.status = res.status;
    rec.first_attempt_diverged = res.first_attempt_diverged;
    if (res.status != AmpStatus::diverged) {
        rec.metrics = mse_metrics(res.est, frame, cfg.constellation == Constellation::qpsk);
    }
    rec.metrics.iterations = res.iterations;
    if (record_time) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return rec;
}

inline ResultRow row_header(const ExperimentSpec& spec, const GridPoint& p, const std::string& algorithm) {
    ResultRow row;
    row.point = p.index;
    row.algorithm = algorithm;
    row.cfg = p.cfg;
    row.ensemble = std::string(to_string(spec.ensemble.kind));
    row.snr_db = p.snr_db;
    row.beta = spec.amp.beta;
    return row;
}

inline ResultRow aggregate_trials(const ExperimentSpec& spec, const GridPoint& p, const std::string& algorithm,
                                  const std::vector<TrialRecord>& trials) {
    ResultRow row = row_header(spec, p, algorithm);
    row.trials = static_cast<int>(trials.size());
    std::vector<double> g, f, h, x, ser, iters, wall;
    for (const auto& t : trials) {
        iters.push_back(t.metrics.iterations);
        if (t.first_attempt_diverged) ++row.first_attempt_divergences;
        if (std::isfinite(t.wall_ms)) wall.push_back(t.wall_ms);
        if (t.status == AmpStatus::diverged) {
            ++row.divergences;
            continue;
        }
        ++row.ok_trials;
        g.push_back(t.metrics.mse_G);
        f.push_back(t.metrics.mse_F);
        h.push_back(t.metrics.mse_H);
        x.push_back(t.metrics.mse_Xd);
        if (!std::isnan(t.metrics.ser)) ser.push_back(t.metrics.ser);
    }
    const auto ag = aggregate_db(g), af = aggregate_db(f), ah = aggregate_db(h);
    const auto ax = p.cfg.T_d() > 0 ? aggregate_db(x) : DbAggregate{};
    row.mse_G_dB = ag.mean_dB;
    row.mse_G_se_dB = ag.se_dB;
    row.mse_F_dB = af.mean_dB;
    row.mse_F_se_dB = af.se_dB;
    row.mse_H_dB = ah.mean_dB;
    row.mse_H_se_dB = ah.se_dB;
    row.mse_Xd_dB = ax.mean_dB;
    row.mse_Xd_se_dB = ax.se_dB;
    const auto s = mean_se(ser);
    row.ser = s.mean;
    row.ser_se = s.se;
    row.iterations = mean_se(iters).mean;
    if (spec.record_time && !wall.empty()) row.wall_ms = mean_se(wall).mean;
    return row;
}

inline ResultRow replica_row(const ExperimentSpec& spec, const GridPoint& p) {
    ResultRow row = row_header(spec, p, "replica");
    const auto params = ReplicaParams::from_config(p.cfg, spec.replica_mode);
    const auto sol = solve_replica(params, spec.replica);
    const auto& st = sol.informative;
    row.mse_G_dB = to_db(st.mse_g);
    row.mse_F_dB = to_db(st.mse_f);
    row.mse_H_dB = to_db(st.mse_h);
    row.mse_Xd_dB = p.cfg.T_d() > 0 ? to_db(st.mse_xd) : kNaN;
    row.ser = st.ser;
    row.iterations = st.iterations;
    row.replica_init = std::string(to_string(st.init));
    row.replica_distinct = sol.distinct;
    row.replica_converged = st.converged;
    return row;
}

/// One row per (point, algorithm), in point order then the order of spec.algorithms.
inline std::vector<ResultRow> run_points(const ExperimentSpec& spec, const std::vector<GridPoint>& points) {
    spec.validate();
    std::vector<std::string> amp_algos;
    for (const auto& a : spec.algorithms) {
        if (a != "replica") amp_algos.push_back(a);
    }
    const int per_point = spec.trials * static_cast<int>(amp_algos.size());
    std::vector<TrialRecord> slots(points.size() * static_cast<size_t>(per_point));
    parallel_for(static_cast<int>(slots.size()), spec.workers, [&](int task) {
        const int point = task / per_point;
        const int rem = task % per_point;
        const int trial = rem / static_cast<int>(amp_algos.size());
        const int algo = rem % static_cast<int>(amp_algos.size());
        slots[static_cast<size_t>(task)] =
            run_trial(spec, points[static_cast<size_t>(point)], trial, amp_algos[static_cast<size_t>(algo)], spec.amp,
                      spec.record_time);
    });

    std::vector<ResultRow> rows;
    for (size_t pi = 0; pi < points.size(); ++pi) {
        for (const auto& a : spec.algorithms) {
            if (a == "replica") {
                rows.push_back(replica_row(spec, points[pi]));
                continue;
            }
            const auto ai = static_cast<int>(std::find(amp_algos.begin(), amp_algos.end(), a) - amp_algos.begin());
            std::vector<TrialRecord> trials;
            for (int t = 0; t < spec.trials; ++t) {
                trials.push_back(slots[pi * static_cast<size_t>(per_point) +
                                       static_cast<size_t>(t * static_cast<int>(amp_algos.size()) + ai)]);
            }
            rows.push_back(aggregate_trials(spec, points[pi], a, trials));
        }
    }
    return rows;
}

inline GridPoint base_point(const ExperimentSpec& spec) {
    GridPoint p;
    p.cfg = spec.sys;
    p.cfg.sigma2 = spec.base_sigma2();
    p.snr_db = spec.snr_db;
    p.cfg.validate();
    return p;
}

/// Single grid point at the base configuration.
inline std::vector<ResultRow> run_simulate(const ExperimentSpec& spec) { return run_points(spec, {base_point(spec)}); }

inline std::vector<ResultRow> run_snr_sweep(const ExperimentSpec& spec) {
    std::vector<double> snrs = spec.snr_list;
    if (snrs.empty() && spec.snr_db) snrs.push_back(*spec.snr_db);
    if (snrs.empty()) throw ConfigError("sweep-snr needs snr_list (or snr_db)");
    std::vector<GridPoint> points;
    for (size_t i = 0; i < snrs.size(); ++i) {
        GridPoint p;
        p.index = static_cast<int>(i);
        p.cfg = spec.sys;
        p.cfg.sigma2 = sigma_from_snr(p.cfg, snrs[i]);
        p.snr_db = snrs[i];
        p.cfg.validate();
        points.push_back(p);
    }
    return run_points(spec, points);
}

/// T_p sweep at fixed data length T_d (T = T_p + T_d for every point).
inline std::vector<ResultRow> run_pilot_sweep(const ExperimentSpec& spec) {
    if (spec.tp_list.empty()) throw ConfigError("sweep-pilots needs tp_list");
    const int T_d = spec.T_d.value_or(spec.sys.T - spec.sys.T_p);
    std::vector<GridPoint> points;
    for (size_t i = 0; i < spec.tp_list.size(); ++i) {
        GridPoint p;
        p.index = static_cast<int>(i);
        p.cfg = spec.sys;
        p.cfg.T_p = spec.tp_list[i];
        p.cfg.T = spec.tp_list[i] + T_d;
        p.cfg.sigma2 = spec.base_sigma2();
        p.snr_db = spec.snr_db;
        p.cfg.validate();
        points.push_back(p);
    }
    return run_points(spec, points);
}

/// rho x T grid at fixed T_p with per-cell success indicators.
inline std::vector<ResultRow> run_phase_diagram(const ExperimentSpec& spec) {
    if (spec.rho_list.empty() || spec.t_list.empty()) throw ConfigError("phase-diagram needs rho_list and t_list");
    std::vector<GridPoint> points;
    for (double rho : spec.rho_list) {
        for (int T : spec.t_list) {
            GridPoint p;
            p.index = static_cast<int>(points.size());
            p.cfg = spec.sys;
            p.cfg.rho = rho;
            p.cfg.T = T;
            if (p.cfg.T_p > T) {
                throw ConfigError("phase-diagram: T_p=" + std::to_string(p.cfg.T_p) + " exceeds T=" + std::to_string(T));
            }
            // the SNR definition depends on rho, so a fixed snr_db is re-resolved per cell
            p.cfg.sigma2 = spec.snr_db ? sigma_from_snr(p.cfg, *spec.snr_db) : spec.sys.sigma2;
            p.snr_db = spec.snr_db;
            p.cfg.validate();
            points.push_back(p);
        }
    }
    auto rows = run_points(spec, points);
    for (auto& r : rows) {
        auto below = [&](double db) { return std::optional<bool>(db < spec.success_mse_db); };
        r.success_G = below(r.mse_G_dB);
        r.success_F = below(r.mse_F_dB);
        r.success_H = below(r.mse_H_dB);
        r.success_Xd = std::optional<bool>(r.ser < spec.success_ser);
    }
    return rows;
}

struct PilotProbe {
    int T_p = 0;
    int successes = 0;
    int trials = 0;
};

struct MinPilotRow {
    int point = 0;
    std::string algorithm;
    SystemConfig cfg;                 // T set; T_p holds the minimum when feasible
    std::optional<int> min_T_p;       // nullopt: infeasible
    std::vector<PilotProbe> probes;   // in probing order
};

/// Noiseless success: MSEs of G, F and H below the threshold and no symbol error.
inline bool minpilot_success(const ExperimentSpec& spec, const TrialRecord& t) {
    if (t.status == AmpStatus::diverged) return false;
    const auto& m = t.metrics;
    const bool channels = m.mse_G_db() < spec.minpilot_mse_db && m.mse_F_db() < spec.minpilot_mse_db &&
                          m.mse_H_db() < spec.minpilot_mse_db;
    return channels && (std::isnan(m.ser) || m.ser == 0.0);
}

/// For each T: binary search for the smallest T_p whose probe (minpilot_trials
/// noiseless trials) has at least minpilot_required successes.
inline std::vector<MinPilotRow> min_pilot_search(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<int> Ts = spec.t_list;
    if (Ts.empty()) Ts.push_back(spec.sys.T);
    AmpOptions opts = spec.amp;
    opts.tol = spec.minpilot_tol;
    opts.max_iters = spec.minpilot_max_iters;
    std::vector<MinPilotRow> rows;
    int point = 0;
    for (int T : Ts) {
        for (const auto& algo : spec.algorithms) {
            if (algo == "replica") continue;
            MinPilotRow row;
            row.point = point;
            row.algorithm = algo;
            row.cfg = spec.sys;
            row.cfg.T = T;
            row.cfg.sigma2 = 0.0;
            std::map<int, bool> verdict;
            auto probe = [&](int T_p) {
                if (auto it = verdict.find(T_p); it != verdict.end()) return it->second;
                GridPoint p;
                p.index = point;
                p.cfg = row.cfg;
                p.cfg.T_p = T_p;
                p.cfg.validate();
                std::vector<TrialRecord> recs(static_cast<size_t>(spec.minpilot_trials));
                parallel_for(spec.minpilot_trials, spec.workers, [&](int t) {
                    recs[static_cast<size_t>(t)] = run_trial(spec, p, t, algo, opts, false);
                });
                int ok = 0;
                for (const auto& r : recs) ok += minpilot_success(spec, r) ? 1 : 0;
                row.probes.push_back({T_p, ok, spec.minpilot_trials});
                const bool pass = ok >= spec.minpilot_required;
                verdict[T_p] = pass;
                return pass;
            };
            int lo = 1;
            int hi = T;
            if (probe(hi)) {
                while (lo < hi) {
                    const int mid = lo + (hi - lo) / 2;
                    if (probe(mid)) {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                row.min_T_p = hi;
                row.cfg.T_p = hi;
            }
            rows.push_back(row);
        }
        ++point;
    }
    return rows;
}

namespace detail {

inline std::string csv_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::string csv_opt(const std::optional<double>& v) { return v ? csv_num(*v) : std::string(); }
inline std::string csv_opt(const std::optional<bool>& v) { return v ? (*v ? "1" : "0") : std::string(); }

}  // namespace detail

inline const char* result_csv_header() {
    return "point,algorithm,M,N,K,T,T_p,T_d,rho,snr_db,sigma2,ensemble,constellation,beta,trials,ok_trials,"
           "divergences,first_attempt_divergences,mse_G_dB,mse_G_se_dB,mse_F_dB,mse_F_se_dB,mse_H_dB,mse_H_se_dB,"
           "mse_Xd_dB,mse_Xd_se_dB,ser,ser_se,iterations,success_G,success_F,success_H,success_Xd,replica_init,"
           "replica_distinct,replica_converged,wall_ms_per_trial";
}

inline void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
    using detail::csv_num;
    using detail::csv_opt;
    os << result_csv_header() << "\n";
    for (const auto& r : rows) {
        os << r.point << "," << r.algorithm << "," << r.cfg.M << "," << r.cfg.N << "," << r.cfg.K << "," << r.cfg.T
           << "," << r.cfg.T_p << "," << r.cfg.T_d() << "," << csv_num(r.cfg.rho) << "," << csv_opt(r.snr_db) << ","
           << csv_num(r.cfg.sigma2) << "," << r.ensemble << "," << to_string(r.cfg.constellation) << ","
           << csv_num(r.beta) << "," << r.trials << "," << r.ok_trials << "," << r.divergences << ","
           << r.first_attempt_divergences << "," << csv_num(r.mse_G_dB) << "," << csv_num(r.mse_G_se_dB) << ","
           << csv_num(r.mse_F_dB) << "," << csv_num(r.mse_F_se_dB) << "," << csv_num(r.mse_H_dB) << ","
           << csv_num(r.mse_H_se_dB) << "," << csv_num(r.mse_Xd_dB) << "," << csv_num(r.mse_Xd_se_dB) << ","
           << csv_num(r.ser) << "," << csv_num(r.ser_se) << "," << csv_num(r.iterations) << ","
           << csv_opt(r.success_G) << "," << csv_opt(r.success_F) << "," << csv_opt(r.success_H) << ","
           << csv_opt(r.success_Xd) << "," << r.replica_init << "," << csv_opt(r.replica_distinct) << ","
           << csv_opt(r.replica_converged) << "," << csv_opt(r.wall_ms) << "\n";
    }
}

inline const char* minpilot_csv_header() { return "point,algorithm,M,N,K,T,rho,min_T_p,feasible,probes"; }

inline void emit_csv(const std::vector<MinPilotRow>& rows, std::ostream& os) {
    os << minpilot_csv_header() << "\n";
    for (const auto& r : rows) {
        std::string probes;
        for (const auto& p : r.probes) {
            if (!probes.empty()) probes += ";";
            probes += std::to_string(p.T_p) + ":" + std::to_string(p.successes) + "/" + std::to_string(p.trials);
        }
        os << r.point << "," << r.algorithm << "," << r.cfg.M << "," << r.cfg.N << "," << r.cfg.K << "," << r.cfg.T
           << "," << detail::csv_num(r.cfg.rho) << "," << (r.min_T_p ? std::to_string(*r.min_T_p) : "x") << ","
           << (r.min_T_p ? 1 : 0) << "," << probes << "\n";
    }
}

/// Full replica table: both starts for every point of the SNR axis (or the base point).
struct ReplicaRow {
    int point = 0;
    std::optional<double> snr_db;
    ReplicaParams params;
    ReplicaState state;
    bool distinct = false;
};

inline std::vector<ReplicaRow> run_replica_table(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<GridPoint> points;
    if (spec.snr_list.empty()) {
        points.push_back(base_point(spec));
    } else {
        for (size_t i = 0; i < spec.snr_list.size(); ++i) {
            GridPoint p;
            p.index = static_cast<int>(i);
            p.cfg = spec.sys;
            p.cfg.sigma2 = sigma_from_snr(p.cfg, spec.snr_list[i]);
            p.snr_db = spec.snr_list[i];
            points.push_back(p);
        }
    }
    std::vector<ReplicaRow> rows(points.size() * 2);
    parallel_for(static_cast<int>(points.size()), spec.workers, [&](int i) {
        const auto& p = points[static_cast<size_t>(i)];
        const auto params = ReplicaParams::from_config(p.cfg, spec.replica_mode);
        const auto sol = solve_replica(params, spec.replica);
        rows[2 * static_cast<size_t>(i)] = {p.index, p.snr_db, params, sol.uninformative, sol.distinct};
        rows[2 * static_cast<size_t>(i) + 1] = {p.index, p.snr_db, params, sol.informative, sol.distinct};
    });
    return rows;
}

inline const char* replica_csv_header() {
    return "point,snr_db,sigma2,M,N,K,T_p,T_d,rho,mode,init,converged,distinct,invalid_regime,iterations,m_g,m_f,m_h,"
           "m_xd,m_cp,m_cd,mt_g,mt_f,mt_h,mt_xd,a_p,a_d,b_p,b_d,mse_G_dB,mse_F_dB,mse_H_dB,mse_Xd_dB,ser";
}

inline void emit_csv(const std::vector<ReplicaRow>& rows, std::ostream& os) {
    using detail::csv_num;
    os << replica_csv_header() << "\n";
    for (const auto& r : rows) {
        const auto& p = r.params;
        const auto& s = r.state;
        os << r.point << "," << detail::csv_opt(r.snr_db) << "," << csv_num(p.sigma2) << "," << csv_num(p.M) << ","
           << csv_num(p.N) << "," << csv_num(p.K) << "," << csv_num(p.T_p) << "," << csv_num(p.T_d) << ","
           << csv_num(p.rho) << "," << to_string(p.mode) << "," << to_string(s.init) << "," << (s.converged ? 1 : 0)
           << "," << (r.distinct ? 1 : 0) << "," << (s.invalid_regime ? 1 : 0) << "," << s.iterations << ","
           << csv_num(s.m_g) << "," << csv_num(s.m_f) << "," << csv_num(s.m_h) << "," << csv_num(s.m_xd) << ","
           << csv_num(s.m_cp) << "," << csv_num(s.m_cd) << "," << csv_num(s.mt_g) << "," << csv_num(s.mt_f) << ","
           << csv_num(s.mt_h) << "," << csv_num(s.mt_xd) << "," << csv_num(s.a_p) << "," << csv_num(s.a_d) << ","
           << csv_num(s.b_p) << "," << csv_num(s.b_d) << "," << csv_num(to_db(s.mse_g)) << ","
           << csv_num(to_db(s.mse_f)) << "," << csv_num(to_db(s.mse_h)) << ","
           << csv_num(p.T_d > 0 ? to_db(s.mse_xd) : kNaN) << "," << csv_num(s.ser) << "\n";
    }
}

template <typename Rows>
void emit_csv(const Rows& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    emit_csv(rows, os);
}

/// Trajectory CSV: iteration, mse_G_dB, mse_F_dB, mse_H_dB, mse_Xd_dB, ser, residual.
inline void emit_trajectory(const std::vector<TrajectoryPoint>& traj, std::ostream& os) {
    using detail::csv_num;
    os << "iteration,mse_G_dB,mse_F_dB,mse_H_dB,mse_Xd_dB,ser,residual\n";
    for (const auto& p : traj) {
        os << p.iteration << "," << csv_num(p.mse_G_dB) << "," << csv_num(p.mse_F_dB) << "," << csv_num(p.mse_H_dB)
           << "," << csv_num(p.mse_Xd_dB) << "," << csv_num(p.ser) << "," << csv_num(p.residual) << "\n";
    }
}

/// True when every estimator trial in `rows` ended diverged (and there was at least one).
inline bool all_trials_failed(const std::vector<ResultRow>& rows) {
    int trials = 0;
    int failed = 0;
    for (const auto& r : rows) {
        trials += r.trials;
        failed += r.divergences;
    }
    return trials > 0 && failed == trials;
}

}  // namespace triamp::harness
