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

// Trilinear AMP for Y = G (S o (F X)) + H X + W.
//
// Each iteration runs an outer bilinear pass on Z = [G H][C; X], an inner
// bilinear pass on C = S o (F X) whose output channel is the outer Gaussian
// message on C, fuses the two Gaussian messages on X with the symbol prior,
// and finally damps the posterior estimates.

#include "triamp/denoisers.hpp"
#include "triamp/frame.hpp"
#include "triamp/linalg.hpp"
#include "triamp/metrics.hpp"
#include "triamp/rng.hpp"
#include "triamp/system_config.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace triamp {

enum class InitMode { random_prior, zero_mean, oracle_truth };
enum class DirectLink { present, absent };
enum class AmpStatus { converged, max_iters, diverged };

inline std::string_view to_string(InitMode m) {
    switch (m) {
        case InitMode::random_prior: return "random-prior";
        case InitMode::zero_mean: return "zero-mean";
        case InitMode::oracle_truth: return "oracle-truth";
    }
    return "?";
}

inline std::string_view to_string(DirectLink d) { return d == DirectLink::present ? "present" : "absent"; }

inline std::string_view to_string(AmpStatus s) {
    switch (s) {
        case AmpStatus::converged: return "converged";
        case AmpStatus::max_iters: return "max-iters";
        case AmpStatus::diverged: return "diverged";
    }
    return "?";
}

/// Zero-mean Gaussian priors on the channels and the data alphabet.
/// Pilot columns always get a point mass at the known symbol.
struct PriorSpec {
    double q_g = 1.0;
    double q_f = 1.0;
    double q_h = 1.0;
    Constellation data = Constellation::qpsk;
    double q_x = 1.0;

    static PriorSpec from_config(const SystemConfig& cfg) {
        return {cfg.q_g, cfg.q_f, cfg.q_h, cfg.constellation, 1.0};
    }

    XPrior data_prior() const {
        return data == Constellation::qpsk ? XPrior{XPriorKind::qpsk, 1.0, {}}
                                           : XPrior{XPriorKind::gaussian, q_x, {}};
    }
};

/// Which quantities the convex-combination damping touches.
struct DampingSet {
    bool residuals = true;  // (u, v_u) and (eta, v_eta)
    bool channels = true;   // posteriors of G, H, F
    bool data = true;       // posterior of X
    bool cascade = true;    // posterior of C
    bool variances = true;  // damp the posterior variances along with the means

    bool operator==(const DampingSet&) const = default;
};

struct AmpOptions {
    double beta = 0.15;
    int max_iters = 500;
    double tol = 1e-8;
    InitMode init_mode = InitMode::random_prior;
    DirectLink direct_link = DirectLink::present;
    double init_scale = 1.0;          // std-dev multiplier of random-prior channel means
    std::uint64_t init_seed = 0;
    DampingSet damping{};
    bool restart_on_divergence = true;
    double var_floor = kVarianceFloor;
    double blowup_ratio = 1e8;        // ||Z_hat||^2 > ratio * ||Y||^2 counts as divergence
    bool record_trajectory = false;

    void validate() const {
        if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
        if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
        if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
        if (!(var_floor > 0.0)) throw ConfigError("var_floor must be > 0");
    }

    bool operator==(const AmpOptions&) const = default;
};

struct Posterior {
    CMatrix mean;
    RMatrix var;
};

/// Everything the iteration carries from one step to the next.
struct AmpState {
    Posterior G, F, H, X, C;   // committed (damped) estimates
    CMatrix Z;                 // G C + H X of the committed estimates

    // outer pass
    CMatrix p_hat;
    RMatrix v_p;
    CMatrix z_hat;
    RMatrix v_z;
    CMatrix u_hat;
    RMatrix v_u;
    CMatrix qhat_g, qhat_h;
    RMatrix v_qg, v_qh;
    CMatrix xi, r_x;           // outer messages toward C and X
    RMatrix v_xi, v_rx;

    // inner pass
    CMatrix r_c;
    RMatrix v_rc;
    CMatrix eta;
    RMatrix v_eta;
    CMatrix qhat_f;
    RMatrix v_qf;
    CMatrix gamma;             // inner message toward X
    RMatrix v_gamma;

    // proposals of the current iteration, committed by apply_damping
    Posterior G_next, F_next, H_next, X_next, C_next;

    bool has_residuals = false;
    int floored_entries = 0;
    int T_p = 0;
};

namespace detail {

inline CMatrix times(const RMatrix& r, const CMatrix& c) { return (r.cast<Complex>().array() * c.array()).matrix(); }

inline RMatrix floored_inverse(const RMatrix& prec, double floor) {
    return prec.cwiseMax(floor).cwiseInverse();
}

inline CMatrix draw_prior(Philox4x32& rng, Eigen::Index rows, Eigen::Index cols, double variance, double scale) {
    CMatrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            out(i, j) = scale * rng.complex_normal(variance);
        }
    }
    return out;
}

template <typename Fn>
Posterior denoise_entries(const CMatrix& r, const RMatrix& v, Fn&& fn) {
    Posterior out{CMatrix(r.rows(), r.cols()), RMatrix(r.rows(), r.cols())};
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        for (Eigen::Index i = 0; i < r.rows(); ++i) {
            const ScalarPosterior p = fn(r(i, j), v(i, j), i, j);
            out.mean(i, j) = p.mean;
            out.var(i, j) = p.var;
        }
    }
    return out;
}

}  // namespace detail

/// Initial state per the chosen mode. Pilot columns of X are clamped, C and
/// its variance follow from F and X, and both residual terms start at zero.
inline AmpState init_state(const CMatrix& Y, const RMatrix& S, const CMatrix& X_pilot, const PriorSpec& prior,
                           const AmpOptions& opts, const FrameRealization* truth = nullptr) {
    const auto M = Y.rows();
    const auto T = Y.cols();
    const auto N = S.rows();
    const auto K = X_pilot.rows();
    const auto T_p = X_pilot.cols();
    require_shape(S, N, T, "S");
    if (T_p > T) throw DimensionError("X_pilot has more columns than Y");

    AmpState st;
    st.T_p = static_cast<int>(T_p);
    const bool link = opts.direct_link == DirectLink::present;
    const double q_h = link ? prior.q_h : 0.0;

    switch (opts.init_mode) {
        case InitMode::random_prior: {
            auto rng = make_rng(opts.init_seed);
            st.G.mean = detail::draw_prior(rng, M, N, prior.q_g, opts.init_scale);
            st.H.mean = detail::draw_prior(rng, M, K, q_h, opts.init_scale);
            st.F.mean = detail::draw_prior(rng, N, K, prior.q_f, opts.init_scale);
            break;
        }
        case InitMode::zero_mean:
            st.G.mean = CMatrix::Zero(M, N);
            st.H.mean = CMatrix::Zero(M, K);
            st.F.mean = CMatrix::Zero(N, K);
            break;
        case InitMode::oracle_truth:
            if (truth == nullptr) throw ConfigError("oracle-truth initialization needs the true realization");
            require_shape(truth->G, M, N, "truth G");
            require_shape(truth->F, N, K, "truth F");
            require_shape(truth->H, M, K, "truth H");
            require_shape(truth->X, K, T, "truth X");
            st.G = {truth->G, RMatrix::Zero(M, N)};
            st.F = {truth->F, RMatrix::Zero(N, K)};
            st.H = {link ? truth->H : CMatrix::Zero(M, K), RMatrix::Zero(M, K)};
            st.X = {truth->X, RMatrix::Zero(K, T)};
            break;
    }
    if (opts.init_mode != InitMode::oracle_truth) {
        st.G.var = RMatrix::Constant(M, N, prior.q_g);
        st.H.var = RMatrix::Constant(M, K, q_h);
        st.F.var = RMatrix::Constant(N, K, prior.q_f);
        st.X.mean = CMatrix::Zero(K, T);
        st.X.var = RMatrix::Constant(K, T, prior.q_x);
    }
    st.X.mean.leftCols(T_p) = X_pilot;
    st.X.var.leftCols(T_p).setZero();

    st.C.mean = detail::times(S, st.F.mean * st.X.mean);
    st.C.var = S.cwiseProduct(st.F.var * st.X.var);
    st.Z = st.G.mean * st.C.mean + st.H.mean * st.X.mean;

    st.u_hat = CMatrix::Zero(M, T);
    st.v_u = RMatrix::Zero(M, T);
    st.eta = CMatrix::Zero(N, T);
    st.v_eta = RMatrix::Zero(N, T);
    return st;
}

/// Convex combination beta * current + (1 - beta) * previous, entrywise.
template <typename A, typename B>
auto apply_damping(const A& current, const B& previous, double beta) {
    return (beta * current + (1.0 - beta) * previous).eval();
}

inline Complex apply_damping(Complex current, Complex previous, double beta) {
    return beta * current + (1.0 - beta) * previous;
}

inline double apply_damping(double current, double previous, double beta) {
    return beta * current + (1.0 - beta) * previous;
}

/// Outer bilinear pass on Z = G C + H X observed through AWGN of variance sigma2.
/// Refreshes p, z, u and the G/H pseudo-observations, proposes G and H
/// posteriors, and emits the Gaussian messages (xi, v_xi) toward C and
/// (r_x, v_rx) toward X.
inline void outer_step(AmpState& st, const CMatrix& Y, double sigma2, const PriorSpec& prior,
                       const AmpOptions& opts) {
    const double floor = opts.var_floor;
    const bool link = opts.direct_link == DirectLink::present;
    const RMatrix aG = st.G.mean.cwiseAbs2();
    const RMatrix aC = st.C.mean.cwiseAbs2();
    const RMatrix aH = st.H.mean.cwiseAbs2();
    const RMatrix aX = st.X.mean.cwiseAbs2();

    RMatrix v_pbar = aG * st.C.var + st.G.var * aC;
    CMatrix p_bar = st.G.mean * st.C.mean;
    RMatrix v_p = v_pbar + st.G.var * st.C.var;
    if (link) {
        v_pbar += aH * st.X.var + st.H.var * aX;
        p_bar += st.H.mean * st.X.mean;
        v_p += aH * st.X.var + st.H.var * aX + st.H.var * st.X.var;
    }
    st.floored_entries += static_cast<int>((v_p.array() < floor).count());
    st.v_p = v_p.cwiseMax(floor);
    st.p_hat = p_bar - detail::times(v_pbar, st.u_hat);

    const RMatrix denom = (st.v_p.array() + sigma2).matrix();
    st.v_z = (sigma2 * st.v_p.array() / denom.array()).matrix();
    st.z_hat = ((sigma2 * st.p_hat.array() + st.v_p.cast<Complex>().array() * Y.array()) /
                denom.cast<Complex>().array())
                   .matrix();

    const CMatrix u_new = ((Y - st.p_hat).array() / denom.cast<Complex>().array()).matrix();
    const RMatrix vu_new = denom.cwiseInverse();
    if (st.has_residuals && opts.damping.residuals) {
        st.u_hat = apply_damping(u_new, st.u_hat, opts.beta);
        st.v_u = apply_damping(vu_new, st.v_u, opts.beta);
    } else {
        st.u_hat = u_new;
        st.v_u = vu_new;
    }

    // messages toward C
    st.v_xi = detail::floored_inverse(aG.transpose() * st.v_u, floor);
    st.xi = detail::times((RMatrix::Ones(st.C.mean.rows(), st.C.mean.cols()) -
                           st.v_xi.cwiseProduct(st.G.var.transpose() * st.v_u)),
                          st.C.mean) +
            detail::times(st.v_xi, st.G.mean.adjoint() * st.u_hat);

    // G pseudo-observations and posterior proposal
    st.v_qg = detail::floored_inverse(st.v_u * aC.transpose(), floor);
    st.qhat_g = detail::times((RMatrix::Ones(st.G.mean.rows(), st.G.mean.cols()) -
                               st.v_qg.cwiseProduct(st.v_u * st.C.var.transpose())),
                              st.G.mean) +
                detail::times(st.v_qg, st.u_hat * st.C.mean.adjoint());
    st.G_next = detail::denoise_entries(st.qhat_g, st.v_qg, [&](Complex r, double v, auto, auto) {
        return denoise_gaussian(r, v, prior.q_g, floor);
    });

    const auto K = st.X.mean.rows();
    const auto T = st.X.mean.cols();
    if (link) {
        st.v_rx = detail::floored_inverse(aH.transpose() * st.v_u, floor);
        st.r_x = detail::times((RMatrix::Ones(K, T) - st.v_rx.cwiseProduct(st.H.var.transpose() * st.v_u)),
                               st.X.mean) +
                 detail::times(st.v_rx, st.H.mean.adjoint() * st.u_hat);
        st.v_qh = detail::floored_inverse(st.v_u * aX.transpose(), floor);
        st.qhat_h = detail::times((RMatrix::Ones(st.H.mean.rows(), K) -
                                   st.v_qh.cwiseProduct(st.v_u * st.X.var.transpose())),
                                  st.H.mean) +
                    detail::times(st.v_qh, st.u_hat * st.X.mean.adjoint());
        st.H_next = detail::denoise_entries(st.qhat_h, st.v_qh, [&](Complex r, double v, auto, auto) {
            return denoise_gaussian(r, v, prior.q_h, floor);
        });
    } else {
        st.v_rx = RMatrix::Constant(K, T, std::numeric_limits<double>::infinity());
        st.r_x = CMatrix::Zero(K, T);
        st.H_next = st.H;
    }
}

/// Inner bilinear pass on C = S o (F X) with output channel CN(c; xi, v_xi).
/// Proposes C and F posteriors and emits (gamma, v_gamma) toward X.
/// Masked entries (s = 0) carry zero residual and so never reach F or X.
inline void inner_step(AmpState& st, const RMatrix& S, const PriorSpec& prior, const AmpOptions& opts) {
    const double floor = opts.var_floor;
    const auto N = S.rows();
    const auto T = S.cols();
    const auto K = st.F.mean.cols();
    const RMatrix aF = st.F.mean.cwiseAbs2();
    const RMatrix aX = st.X.mean.cwiseAbs2();

    const RMatrix v_rbar = S.cwiseProduct(aF * st.X.var + st.F.var * aX);
    const CMatrix r_bar = detail::times(S, st.F.mean * st.X.mean);
    const RMatrix v_rc = (v_rbar + S.cwiseProduct(st.F.var * st.X.var)).cwiseMax(floor);
    st.r_c = r_bar - detail::times(v_rbar, st.eta);
    st.v_rc = v_rc;

    CMatrix eta_new(N, T);
    RMatrix veta_new(N, T);
    st.C_next = {CMatrix(N, T), RMatrix(N, T)};
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index n = 0; n < N; ++n) {
            const bool s = S(n, t) != 0.0;
            const auto c = denoise_c(st.r_c(n, t), st.v_rc(n, t), st.xi(n, t), st.v_xi(n, t), s, floor);
            st.C_next.mean(n, t) = c.mean;
            st.C_next.var(n, t) = c.var;
            if (s) {
                const double total = st.v_rc(n, t) + st.v_xi(n, t);
                eta_new(n, t) = (st.xi(n, t) - st.r_c(n, t)) / total;
                veta_new(n, t) = 1.0 / total;
            } else {
                eta_new(n, t) = Complex{};
                veta_new(n, t) = 0.0;
            }
        }
    }
    if (st.has_residuals && opts.damping.residuals) {
        st.eta = apply_damping(eta_new, st.eta, opts.beta);
        st.v_eta = apply_damping(veta_new, st.v_eta, opts.beta);
    } else {
        st.eta = eta_new;
        st.v_eta = veta_new;
    }

    st.v_qf = detail::floored_inverse(st.v_eta * aX.transpose(), floor);
    st.qhat_f = detail::times((RMatrix::Ones(N, K) - st.v_qf.cwiseProduct(st.v_eta * st.X.var.transpose())),
                              st.F.mean) +
                detail::times(st.v_qf, st.eta * st.X.mean.adjoint());
    st.F_next = detail::denoise_entries(st.qhat_f, st.v_qf, [&](Complex r, double v, auto, auto) {
        return denoise_gaussian(r, v, prior.q_f, floor);
    });

    st.v_gamma = detail::floored_inverse(aF.transpose() * st.v_eta, floor);
    st.gamma = detail::times((RMatrix::Ones(K, T) - st.v_gamma.cwiseProduct(st.F.var.transpose() * st.v_eta)),
                             st.X.mean) +
               detail::times(st.v_gamma, st.F.mean.adjoint() * st.eta);
}

/// Combines the outer and inner messages on X with the data prior.
inline void fuse_x_step(AmpState& st, const CMatrix& X_pilot, const PriorSpec& prior) {
    const XPrior data = prior.data_prior();
    const auto T_p = X_pilot.cols();
    st.X_next = detail::denoise_entries(st.r_x, st.v_rx, [&](Complex r, double v, Eigen::Index k, Eigen::Index t) {
        if (t < T_p) return ScalarPosterior{X_pilot(k, t), 0.0, false};
        return denoise_x(r, v, st.gamma(k, t), st.v_gamma(k, t), data);
    });
}

/// Commits the proposals: damped where the damping set asks for it, then
/// re-clamps the pilots exactly and refreshes Z.
inline void apply_damping(AmpState& st, const CMatrix& X_pilot, const AmpOptions& opts) {
    const double b = opts.beta;
    auto commit = [&](Posterior& cur, const Posterior& next, bool enabled) {
        if (!enabled) {
            cur = next;
            return;
        }
        cur.mean = apply_damping(next.mean, cur.mean, b);
        cur.var = opts.damping.variances ? apply_damping(next.var, cur.var, b) : next.var;
    };
    commit(st.G, st.G_next, opts.damping.channels);
    commit(st.H, st.H_next, opts.damping.channels);
    commit(st.F, st.F_next, opts.damping.channels);
    commit(st.X, st.X_next, opts.damping.data);
    commit(st.C, st.C_next, opts.damping.cascade);
    const auto T_p = X_pilot.cols();
    st.X.mean.leftCols(T_p) = X_pilot;
    st.X.var.leftCols(T_p).setZero();
    st.Z = st.G.mean * st.C.mean + st.H.mean * st.X.mean;
    st.has_residuals = true;
}

struct TrajectoryPoint {
    int iteration = 0;
    double mse_G_dB = 0.0;
    double mse_F_dB = 0.0;
    double mse_H_dB = 0.0;
    double mse_Xd_dB = 0.0;
    double ser = 0.0;
    double residual = 0.0;  // ||Y - Z_hat||^2 / ||Y||^2
};

struct AmpResult {
    Estimates est;
    RMatrix var_G, var_F, var_H, var_X;
    Posterior C;
    CMatrix Xd_hard;
    std::vector<TrajectoryPoint> trajectory;
    int iterations = 0;
    AmpStatus status = AmpStatus::max_iters;
    bool first_attempt_diverged = false;
    double beta_used = 0.0;
    int floored_entries = 0;
};

namespace detail {

enum class InnerModel { trilinear, independent_c };

inline bool state_finite(const AmpState& st) {
    return st.Z.allFinite() && st.G.mean.allFinite() && st.F.mean.allFinite() && st.H.mean.allFinite() &&
           st.X.mean.allFinite() && st.G.var.allFinite() && st.F.var.allFinite() && st.X.var.allFinite();
}

/// Independent-C variant of the inner pass: C gets its Bernoulli-Gaussian prior
/// from S directly and X receives no inner message.
inline void independent_c_step(AmpState& st, const RMatrix& S, double c_var, const AmpOptions& opts) {
    const auto N = S.rows();
    const auto T = S.cols();
    st.C_next = {CMatrix(N, T), RMatrix(N, T)};
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index n = 0; n < N; ++n) {
            const bool s = S(n, t) != 0.0;
            const auto c = s && c_var > 0.0
                               ? denoise_gaussian(st.xi(n, t), st.v_xi(n, t), c_var, opts.var_floor)
                               : ScalarPosterior{};
            st.C_next.mean(n, t) = c.mean;
            st.C_next.var(n, t) = c.var;
        }
    }
    st.F_next = st.F;
    const auto K = st.X.mean.rows();
    st.gamma = CMatrix::Zero(K, T);
    st.v_gamma = RMatrix::Constant(K, T, std::numeric_limits<double>::infinity());
}

inline TrajectoryPoint trajectory_point(int iter, const AmpState& st, const CMatrix& Y, const PriorSpec& prior,
                                        const FrameRealization* truth) {
    TrajectoryPoint p;
    p.iteration = iter;
    const double y_energy = Y.squaredNorm();
    p.residual = y_energy > 0.0 ? (Y - st.Z).squaredNorm() / y_energy : (Y - st.Z).squaredNorm();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (truth == nullptr) {
        p.mse_G_dB = p.mse_F_dB = p.mse_H_dB = p.mse_Xd_dB = p.ser = nan;
        return p;
    }
    const auto m = mse_metrics({st.G.mean, st.F.mean, st.H.mean, st.X.mean}, *truth,
                               prior.data == Constellation::qpsk);
    p.mse_G_dB = m.mse_G_db();
    p.mse_F_dB = m.mse_F_db();
    p.mse_H_dB = m.mse_H_db();
    p.mse_Xd_dB = m.mse_Xd_db();
    p.ser = m.ser;
    return p;
}

inline AmpResult run_attempt(const CMatrix& Y, const RMatrix& S, const CMatrix& X_pilot, double sigma2,
                             const PriorSpec& prior, const AmpOptions& opts, const FrameRealization* truth,
                             InnerModel model) {
    AmpState st = init_state(Y, S, X_pilot, prior, opts, truth);
    AmpResult res;
    res.beta_used = opts.beta;
    const double y_energy = Y.squaredNorm();
    const double c_var = static_cast<double>(X_pilot.rows()) * prior.q_f * prior.q_x;
    CMatrix Z_prev = st.Z;
    for (int it = 1; it <= opts.max_iters; ++it) {
        outer_step(st, Y, sigma2, prior, opts);
        if (model == InnerModel::trilinear) {
            inner_step(st, S, prior, opts);
        } else {
            independent_c_step(st, S, c_var, opts);
        }
        fuse_x_step(st, X_pilot, prior);
        apply_damping(st, X_pilot, opts);
        res.iterations = it;

        const double z_energy = st.Z.squaredNorm();
        if (!state_finite(st) || z_energy > opts.blowup_ratio * std::max(y_energy, 1e-300)) {
            res.status = AmpStatus::diverged;
            break;
        }
        if (opts.record_trajectory) res.trajectory.push_back(trajectory_point(it, st, Y, prior, truth));
        const double change = (st.Z - Z_prev).squaredNorm();
        if (change < opts.tol * z_energy || (change == 0.0 && z_energy == 0.0)) {
            res.status = AmpStatus::converged;
            break;
        }
        Z_prev = st.Z;
    }
    res.est = {st.G.mean, st.F.mean, st.H.mean, st.X.mean};
    res.var_G = st.G.var;
    res.var_F = st.F.var;
    res.var_H = st.H.var;
    res.var_X = st.X.var;
    res.C = st.C;
    res.floored_entries = st.floored_entries;
    return res;
}

inline AmpResult run_with_restart(const CMatrix& Y, const RMatrix& S, const CMatrix& X_pilot, double sigma2,
                                  const PriorSpec& prior, const AmpOptions& opts, const FrameRealization* truth,
                                  InnerModel model) {
    opts.validate();
    const auto T = Y.cols();
    require_shape(S, S.rows(), T, "S");
    if (X_pilot.cols() > T) throw DimensionError("X_pilot has more columns than Y");
    AmpResult res = run_attempt(Y, S, X_pilot, sigma2, prior, opts, truth, model);
    if (res.status == AmpStatus::diverged) {
        res.first_attempt_diverged = true;
        if (opts.restart_on_divergence) {
            AmpOptions retry = opts;
            retry.beta = opts.beta / 2.0;
            res = run_attempt(Y, S, X_pilot, sigma2, prior, retry, truth, model);
            res.first_attempt_diverged = true;
        }
    }
    return res;
}

inline CMatrix hard_decisions(const CMatrix& X_mean, Eigen::Index T_p, Constellation c) {
    const CMatrix data = X_mean.rightCols(X_mean.cols() - T_p);
    return c == Constellation::qpsk ? qpsk_hard_decision(data) : data;
}

}  // namespace detail

/// Runs Tri-AMP on one frame. `truth`, when given, enables the per-iteration
/// trajectory metrics and the oracle-truth initialization.
inline AmpResult tri_amp_run(const CMatrix& Y, const RMatrix& S, const CMatrix& X_pilot, double sigma2,
                             const PriorSpec& prior, const AmpOptions& opts,
                             const FrameRealization* truth = nullptr) {
    AmpResult res = detail::run_with_restart(Y, S, X_pilot, sigma2, prior, opts, truth,
                                             detail::InnerModel::trilinear);
    res.Xd_hard = detail::hard_decisions(res.est.X, X_pilot.cols(), prior.data);
    return res;
}

}  // namespace triamp
