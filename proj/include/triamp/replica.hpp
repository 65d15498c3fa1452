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

// Large-system fixed point of the replica analysis. Each unknown is seen
// through a scalar AWGN channel whose SNR (m_tilde) depends on the overlaps
// m between truth and posterior mean; MSE = power - overlap.

#include "triamp/quadrature.hpp"
#include "triamp/system_config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string_view>

namespace triamp {

enum class ReplicaMode { full, no_direct_link, no_ris };
enum class ReplicaInit { uninformative, informative, custom };

inline std::string_view to_string(ReplicaMode m) {
    switch (m) {
        case ReplicaMode::full: return "full";
        case ReplicaMode::no_direct_link: return "no-direct-link";
        case ReplicaMode::no_ris: return "no-ris";
    }
    return "?";
}

inline std::string_view to_string(ReplicaInit i) {
    switch (i) {
        case ReplicaInit::uninformative: return "uninformative";
        case ReplicaInit::informative: return "informative";
        case ReplicaInit::custom: return "custom";
    }
    return "?";
}

struct ReplicaParams {
    double M = 64, N = 32, K = 8, T_p = 24, T_d = 76;
    double rho = 0.3;
    double sigma2 = 0.0;
    double q_g = 1.0, q_f = 1.0, q_h = 1.0;
    double q_xp = 1.0, q_xd = 1.0;
    Constellation data = Constellation::qpsk;
    ReplicaMode mode = ReplicaMode::full;

    static ReplicaParams from_config(const SystemConfig& cfg, ReplicaMode mode = ReplicaMode::full) {
        ReplicaParams p;
        p.M = cfg.M;
        p.N = cfg.N;
        p.K = cfg.K;
        p.T_p = cfg.T_p;
        p.T_d = cfg.T_d();
        p.rho = cfg.rho;
        p.sigma2 = cfg.sigma2;
        p.q_g = cfg.q_g;
        p.q_f = cfg.q_f;
        p.q_h = cfg.q_h;
        p.data = cfg.constellation;
        p.mode = mode;
        return p;
    }

    void validate() const {
        if (!(M > 0 && N > 0 && K > 0 && T_p >= 0 && T_d >= 0)) throw ConfigError("replica dimensions invalid");
        if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
        if (!(sigma2 >= 0.0)) throw ConfigError("sigma2 must be >= 0");
        if (!(q_g >= 0 && q_f >= 0 && q_h >= 0 && q_xp >= 0 && q_xd >= 0)) {
            throw ConfigError("replica powers must be >= 0");
        }
    }

    // powers as seen by the active mode
    double eff_q_g() const { return mode == ReplicaMode::no_ris ? 0.0 : q_g; }
    double eff_q_f() const { return mode == ReplicaMode::no_ris ? 0.0 : q_f; }
    double eff_q_h() const { return mode == ReplicaMode::no_direct_link ? 0.0 : q_h; }
};

struct SecondMoments {
    double q_cp = 0.0;
    double q_cd = 0.0;
};

/// Power of the pilot-phase and data-phase cascade entries c = s * sum_k f x.
inline SecondMoments second_moments(const ReplicaParams& p) {
    return {p.rho * p.K * p.eff_q_f() * p.q_xp, p.rho * p.K * p.eff_q_f() * p.q_xd};
}

struct ReplicaState {
    double m_g = 0, m_f = 0, m_h = 0, m_xd = 0, m_cp = 0, m_cd = 0;
    double mt_g = 0, mt_f = 0, mt_h = 0, mt_xd = 0;
    double a_p = 0, a_d = 0, b_p = 0, b_d = 0;
    double mse_g = 0, mse_f = 0, mse_h = 0, mse_xd = 0, ser = 0;
    int iterations = 0;
    bool converged = false;
    bool invalid_regime = false;
    ReplicaInit init = ReplicaInit::uninformative;

    std::array<double, 6> overlaps() const { return {m_g, m_f, m_h, m_xd, m_cp, m_cd}; }
};

struct ReplicaOptions {
    double relaxation = 0.5;
    double tol = 1e-12;
    int max_iters = 100000;
    int quad_nodes = 61;

    bool operator==(const ReplicaOptions&) const = default;
};

inline double scalar_mmse_gaussian(double m_tilde, double q) { return q / (1.0 + q * m_tilde); }

/// 1 - E tanh(m + sqrt(m) Z) for unit-power QPSK at effective SNR m, clamped to [0, 1].
inline double scalar_mmse_qpsk(double m_tilde, int nodes = 61) {
    if (!(m_tilde > 0.0)) return 1.0;
    const auto& rule = gauss_hermite(nodes);
    const double root = std::sqrt(m_tilde);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights(i) * std::tanh(m_tilde + root * rule.nodes(i));
    }
    return std::clamp(1.0 - acc, 0.0, 1.0);
}

/// Asymptotic QPSK symbol error rate 2Q(sqrt m) - Q(sqrt m)^2.
inline double ser_asymptotic(double m_tilde) {
    const double q = qfunc(std::sqrt(std::max(m_tilde, 0.0)));
    return 2.0 * q - q * q;
}

namespace detail {

struct Guarded {
    bool invalid = false;
    double inv(double denom) {
        if (denom < 0.0) invalid = true;
        return 1.0 / std::max(denom, 1e-300);
    }
};

// m_c = q_c - rho K d / (1 + M K m_g a d),  d = q_x q_f - m_x m_f
inline double cascade_overlap(const ReplicaParams& p, double q_c, double q_x, double m_x, double m_g,
                              double m_f, double a, Guarded& guard) {
    const double d = q_x * p.eff_q_f() - m_x * m_f;
    return q_c - p.rho * p.K * d * guard.inv(1.0 + p.M * p.K * m_g * a * d);
}

inline double rx_precision(const ReplicaParams& p, double m_g, double m_f, double q_x, double m_x, double a,
                           Guarded& guard) {
    if (!(m_g > 0.0)) return 0.0;
    const double denom = guard.inv(p.M * m_g * a) + p.K * (p.eff_q_f() * q_x - m_f * m_x);
    return p.rho * guard.inv(denom);
}

}  // namespace detail

/// One unrelaxed application of the fixed-point map. The returned state holds
/// the updated overlaps plus the auxiliaries and MSEs they were computed from.
inline ReplicaState replica_update(const ReplicaParams& p, const ReplicaState& s, int quad_nodes = 61) {
    const auto mom = second_moments(p);
    const double q_g = p.eff_q_g(), q_f = p.eff_q_f(), q_h = p.eff_q_h();
    detail::Guarded guard;
    ReplicaState out = s;

    switch (p.mode) {
        case ReplicaMode::full:
            out.a_p = guard.inv(p.sigma2 + p.N * (q_g * mom.q_cp - s.m_g * s.m_cp) +
                                p.K * p.q_xp * (q_h - s.m_h));
            out.a_d = guard.inv(p.sigma2 + p.N * (q_g * mom.q_cd - s.m_g * s.m_cd) +
                                p.K * (q_h * p.q_xd - s.m_h * s.m_xd));
            break;
        case ReplicaMode::no_direct_link:
            out.a_p = guard.inv(p.sigma2 + p.N * (q_g * mom.q_cp - s.m_g * s.m_cp));
            out.a_d = guard.inv(p.sigma2 + p.N * (q_g * mom.q_cd - s.m_g * s.m_cd));
            break;
        case ReplicaMode::no_ris:
            out.a_p = guard.inv(p.sigma2 + p.K * p.q_xp * (q_h - s.m_h));
            out.a_d = guard.inv(p.sigma2 + p.K * (q_h * p.q_xd - s.m_h * s.m_xd));
            break;
    }

    if (p.mode == ReplicaMode::no_ris) {
        out.b_p = out.b_d = 0.0;
        out.m_cp = out.m_cd = 0.0;
        out.mt_g = out.mt_f = 0.0;
    } else {
        out.b_p = detail::rx_precision(p, s.m_g, s.m_f, p.q_xp, p.q_xp, out.a_p, guard);
        out.b_d = detail::rx_precision(p, s.m_g, s.m_f, p.q_xd, s.m_xd, out.a_d, guard);
        out.m_cp = detail::cascade_overlap(p, mom.q_cp, p.q_xp, p.q_xp, s.m_g, s.m_f, out.a_p, guard);
        out.m_cd = detail::cascade_overlap(p, mom.q_cd, p.q_xd, s.m_xd, s.m_g, s.m_f, out.a_d, guard);
        out.mt_g = p.T_p * out.m_cp * out.a_p + p.T_d * out.m_cd * out.a_d;
        out.mt_f = p.T_p * p.q_xp * out.b_p + p.T_d * s.m_xd * out.b_d;
    }

    if (p.mode == ReplicaMode::no_direct_link) {
        out.mt_h = 0.0;
        out.mt_xd = p.N * s.m_f * out.b_d;
    } else if (p.mode == ReplicaMode::no_ris) {
        out.mt_h = p.T_p * p.q_xp * out.a_p + p.T_d * s.m_xd * out.a_d;
        out.mt_xd = p.M * s.m_h * out.a_d;
    } else {
        out.mt_h = p.T_p * p.q_xp * out.a_p + p.T_d * s.m_xd * out.a_d;
        out.mt_xd = p.N * s.m_f * out.b_d + p.M * s.m_h * out.a_d;
    }
    if (out.mt_g < 0 || out.mt_f < 0 || out.mt_h < 0 || out.mt_xd < 0) guard.invalid = true;
    out.mt_g = std::max(out.mt_g, 0.0);
    out.mt_f = std::max(out.mt_f, 0.0);
    out.mt_h = std::max(out.mt_h, 0.0);
    out.mt_xd = std::max(out.mt_xd, 0.0);

    out.mse_g = scalar_mmse_gaussian(out.mt_g, q_g);
    out.mse_f = scalar_mmse_gaussian(out.mt_f, q_f);
    out.mse_h = scalar_mmse_gaussian(out.mt_h, q_h);
    if (p.data == Constellation::qpsk) {
        out.mse_xd = p.q_xd * scalar_mmse_qpsk(out.mt_xd / p.q_xd, quad_nodes);
        out.ser = ser_asymptotic(out.mt_xd / p.q_xd);
    } else {
        out.mse_xd = scalar_mmse_gaussian(out.mt_xd, p.q_xd);
        out.ser = std::numeric_limits<double>::quiet_NaN();
    }
    if (p.T_d == 0) out.ser = std::numeric_limits<double>::quiet_NaN();
    out.m_g = q_g - out.mse_g;
    out.m_f = q_f - out.mse_f;
    out.m_h = q_h - out.mse_h;
    out.m_xd = p.q_xd - out.mse_xd;
    out.invalid_regime = s.invalid_regime || guard.invalid;
    return out;
}

/// Largest componentwise change of the overlaps under one map application.
inline double replica_residual(const ReplicaParams& p, const ReplicaState& s, int quad_nodes = 61) {
    const auto next = replica_update(p, s, quad_nodes).overlaps();
    const auto cur = s.overlaps();
    double worst = 0.0;
    for (size_t i = 0; i < cur.size(); ++i) worst = std::max(worst, std::abs(next[i] - cur[i]));
    return worst;
}

inline ReplicaState replica_start(const ReplicaParams& p, ReplicaInit init) {
    ReplicaState s;
    s.init = init;
    if (init == ReplicaInit::informative) {
        const double near = 1.0 - 1e-9;
        const auto mom = second_moments(p);
        s.m_g = p.eff_q_g() * near;
        s.m_f = p.eff_q_f() * near;
        s.m_h = p.eff_q_h() * near;
        s.m_xd = p.q_xd * near;
        s.m_cp = mom.q_cp * near;
        s.m_cd = mom.q_cd * near;
    }
    return s;
}

/// Relaxed fixed-point iteration from `start` until the largest overlap change
/// drops below the tolerance. The returned state keeps the overlaps it
/// converged to; auxiliaries and MSEs come from the map evaluated there.
inline ReplicaState replica_fixed_point(const ReplicaParams& p, ReplicaState start,
                                        const ReplicaOptions& opts = {}) {
    p.validate();
    ReplicaState s = start;
    s.converged = false;
    const double w = opts.relaxation;
    for (int it = 1; it <= opts.max_iters; ++it) {
        const ReplicaState next = replica_update(p, s, opts.quad_nodes);
        const auto a = s.overlaps();
        const auto b = next.overlaps();
        double change = 0.0;
        for (size_t i = 0; i < a.size(); ++i) change = std::max(change, std::abs(b[i] - a[i]));
        s.m_g = w * next.m_g + (1 - w) * s.m_g;
        s.m_f = w * next.m_f + (1 - w) * s.m_f;
        s.m_h = w * next.m_h + (1 - w) * s.m_h;
        s.m_xd = w * next.m_xd + (1 - w) * s.m_xd;
        s.m_cp = w * next.m_cp + (1 - w) * s.m_cp;
        s.m_cd = w * next.m_cd + (1 - w) * s.m_cd;
        s.invalid_regime = next.invalid_regime;
        s.iterations = it;
        if (!(change >= opts.tol)) {
            s.converged = std::isfinite(change);
            break;
        }
    }
    ReplicaState out = replica_update(p, s, opts.quad_nodes);
    out.m_g = s.m_g;
    out.m_f = s.m_f;
    out.m_h = s.m_h;
    out.m_xd = s.m_xd;
    out.m_cp = s.m_cp;
    out.m_cd = s.m_cd;
    out.mse_g = p.eff_q_g() - s.m_g;
    out.mse_f = p.eff_q_f() - s.m_f;
    out.mse_h = p.eff_q_h() - s.m_h;
    out.mse_xd = p.q_xd - s.m_xd;
    out.iterations = s.iterations;
    out.converged = s.converged;
    out.init = start.init;
    return out;
}

inline ReplicaState replica_fixed_point(const ReplicaParams& p, ReplicaInit init, const ReplicaOptions& opts = {}) {
    return replica_fixed_point(p, replica_start(p, init), opts);
}

struct ReplicaSolution {
    ReplicaState uninformative;
    ReplicaState informative;
    bool distinct = false;  // the two starts reached fixed points more than 1e-6 apart
};

inline ReplicaSolution solve_replica(const ReplicaParams& p, const ReplicaOptions& opts = {}) {
    ReplicaSolution sol{replica_fixed_point(p, ReplicaInit::uninformative, opts),
                        replica_fixed_point(p, ReplicaInit::informative, opts), false};
    const auto a = sol.uninformative.overlaps();
    const auto b = sol.informative.overlaps();
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-6) sol.distinct = true;
    }
    return sol;
}

}  // namespace triamp
