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

#include "triamp/frame.hpp"
#include "triamp/linalg.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace triamp {

struct AmbiguityResolution {
    CMatrix G;
    CMatrix F;
    CVector alpha;                   // per-RIS-element scale applied to G's columns
    std::vector<bool> degenerate;    // true where the estimated column was zero
};

/// Removes the G diag(d), diag(1/d) F ambiguity against the true channels.
///
/// alpha_n is the least-squares fit of g_n by alpha * g_hat_n; column n of G is
/// scaled by alpha_n and row n of F by 1/alpha_n, so the cascade is unchanged.
/// A zero estimated column carries no scale information and keeps alpha_n = 1.
inline AmbiguityResolution resolve_diagonal_ambiguity(const CMatrix& G_hat, const CMatrix& F_hat,
                                                      const CMatrix& G_true, const CMatrix& F_true) {
    require_shape(G_true, G_hat.rows(), G_hat.cols(), "G_true");
    require_shape(F_hat, G_hat.cols(), F_hat.cols(), "F_hat");
    require_shape(F_true, F_hat.rows(), F_hat.cols(), "F_true");
    const auto N = G_hat.cols();
    AmbiguityResolution out{G_hat, F_hat, CVector::Ones(N), std::vector<bool>(static_cast<size_t>(N), false)};
    for (Eigen::Index n = 0; n < N; ++n) {
        const double energy = G_hat.col(n).squaredNorm();
        if (!(energy > 0.0)) {
            out.degenerate[static_cast<size_t>(n)] = true;
            continue;
        }
        const Complex a = G_hat.col(n).dot(G_true.col(n)) / energy;  // dot() conjugates the first operand
        if (a == Complex{}) {
            out.degenerate[static_cast<size_t>(n)] = true;
            continue;
        }
        out.alpha(n) = a;
        out.G.col(n) *= a;
        out.F.row(n) /= a;
    }
    return out;
}

/// Normalized squared errors of one estimate set.
struct Metrics {
    double mse_G = 0.0;
    double mse_F = 0.0;
    double mse_H = 0.0;
    double mse_Xd = 0.0;
    double ser = 0.0;   // NaN when there is no QPSK data block
    int iterations = 0;

    double mse_G_db() const { return to_db(mse_G); }
    double mse_F_db() const { return to_db(mse_F); }
    double mse_H_db() const { return to_db(mse_H); }
    double mse_Xd_db() const { return to_db(mse_Xd); }
};

/// ||A - B||_F^2 / (rows * cols); zero for empty blocks.
inline double normalized_sq_error(const auto& estimate, const auto& truth) {
    require_shape(estimate, truth.rows(), truth.cols(), "estimate");
    const double count = static_cast<double>(truth.size());
    return count > 0 ? (estimate - truth).squaredNorm() / count : 0.0;
}

/// Nearest unit-power QPSK point, entrywise.
inline CMatrix qpsk_hard_decision(const CMatrix& soft) {
    const double a = 1.0 / std::numbers::sqrt2;
    CMatrix out(soft.rows(), soft.cols());
    for (Eigen::Index j = 0; j < soft.cols(); ++j) {
        for (Eigen::Index i = 0; i < soft.rows(); ++i) {
            const Complex z = soft(i, j);
            out(i, j) = {z.real() >= 0.0 ? a : -a, z.imag() >= 0.0 ? a : -a};
        }
    }
    return out;
}

/// Fraction of mismatched symbols between two QPSK blocks.
inline double ser_metric(const CMatrix& decided, const CMatrix& truth) {
    require_shape(decided, truth.rows(), truth.cols(), "decided");
    if (truth.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    Eigen::Index errors = 0;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        for (Eigen::Index i = 0; i < truth.rows(); ++i) {
            const Complex d = decided(i, j);
            const Complex t = truth(i, j);
            if ((d.real() >= 0.0) != (t.real() >= 0.0) || (d.imag() >= 0.0) != (t.imag() >= 0.0)) {
                ++errors;
            }
        }
    }
    return static_cast<double>(errors) / static_cast<double>(truth.size());
}

struct Estimates {
    CMatrix G, F, H, X;
};

/// MSEs normalized by MN, NK, MK and K T_d; G and F are ambiguity-resolved first.
/// `qpsk_data` selects whether an SER is reported.
inline Metrics mse_metrics(const Estimates& est, const FrameRealization& truth, bool qpsk_data = true) {
    const auto resolved = resolve_diagonal_ambiguity(est.G, est.F, truth.G, truth.F);
    Metrics m;
    m.mse_G = normalized_sq_error(resolved.G, truth.G);
    m.mse_F = normalized_sq_error(resolved.F, truth.F);
    m.mse_H = normalized_sq_error(est.H, truth.H);
    const auto T_d = truth.X.cols() - truth.T_p;
    const CMatrix Xd_hat = est.X.rightCols(T_d);
    const CMatrix Xd = truth.X.rightCols(T_d);
    m.mse_Xd = normalized_sq_error(Xd_hat, Xd);
    m.ser = (qpsk_data && T_d > 0) ? ser_metric(qpsk_hard_decision(Xd_hat), Xd)
                                   : std::numeric_limits<double>::quiet_NaN();
    return m;
}

}  // namespace triamp
