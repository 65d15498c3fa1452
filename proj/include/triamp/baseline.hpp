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

// Two-stage baseline: bilinear AMP on Z = [G H][C; X] with C treated as an
// unknown with a Bernoulli-Gaussian prior fixed by S, then a row-wise linear
// MMSE fit of F from the estimated C and X.

#include "triamp/linalg.hpp"
#include "triamp/tri_amp.hpp"

#include <vector>

namespace triamp {

/// Row-wise LMMSE of F from C ~ S o (F X) + noise.
///
/// For row n only the columns with s_nt = 1 enter the regression:
/// f_n = c_a X_a^H (X_a X_a^H + (noise_var(n) / q_f) I)^{-1}.
/// Rows with no active columns, or q_f = 0, return the prior mean 0.
inline CMatrix lmmse_rows(const CMatrix& C, const RVector& noise_var, const CMatrix& X, const RMatrix& S, double q_f) {
    const auto N = C.rows();
    const auto T = C.cols();
    const auto K = X.rows();
    require_shape(X, K, T, "X");
    require_shape(S, N, T, "S");
    if (noise_var.size() != N) throw DimensionError("noise_var must have one entry per row of C");
    CMatrix F = CMatrix::Zero(N, K);
    if (q_f <= 0.0) return F;
    std::vector<Eigen::Index> active;
    for (Eigen::Index n = 0; n < N; ++n) {
        active.clear();
        for (Eigen::Index t = 0; t < T; ++t) {
            if (S(n, t) != 0.0) active.push_back(t);
        }
        if (active.empty()) continue;
        const auto A = static_cast<Eigen::Index>(active.size());
        CMatrix Xa(K, A);
        CVector ca(A);
        for (Eigen::Index i = 0; i < A; ++i) {
            Xa.col(i) = X.col(active[static_cast<size_t>(i)]);
            ca(i) = C(n, active[static_cast<size_t>(i)]);
        }
        CMatrix gram = Xa * Xa.adjoint();
        gram.diagonal().array() += noise_var(n) / q_f;
        const CVector rhs = Xa * ca.conjugate();
        const CVector f_conj = gram.completeOrthogonalDecomposition().solve(rhs);
        F.row(n) = f_conj.adjoint();
    }
    return F;
}

/// Outer-only bilinear AMP followed by lmmse_rows. The LMMSE noise level of row
/// n is the mean posterior variance of its unmasked C entries.
inline AmpResult bigamp_lmmse_baseline(const CMatrix& Y, const RMatrix& S, const CMatrix& X_pilot, double sigma2,
                                       const PriorSpec& prior, const AmpOptions& opts,
                                       const FrameRealization* truth = nullptr) {
    AmpOptions first = opts;
    first.record_trajectory = false;
    AmpResult res = detail::run_with_restart(Y, S, X_pilot, sigma2, prior, first, nullptr,
                                             detail::InnerModel::independent_c);
    const auto N = S.rows();
    RVector noise_var = RVector::Zero(N);
    for (Eigen::Index n = 0; n < N; ++n) {
        double total = 0.0;
        int count = 0;
        for (Eigen::Index t = 0; t < S.cols(); ++t) {
            if (S(n, t) != 0.0) {
                total += res.C.var(n, t);
                ++count;
            }
        }
        noise_var(n) = count > 0 ? total / count : 0.0;
    }
    res.est.F = lmmse_rows(res.C.mean, noise_var, res.est.X, S, prior.q_f);
    res.var_F = RMatrix::Constant(N, X_pilot.rows(), std::numeric_limits<double>::quiet_NaN());
    res.Xd_hard = detail::hard_decisions(res.est.X, X_pilot.cols(), prior.data);
    if (opts.record_trajectory && truth != nullptr) {
        AmpState final_state;
        final_state.G.mean = res.est.G;
        final_state.F.mean = res.est.F;
        final_state.H.mean = res.est.H;
        final_state.X.mean = res.est.X;
        final_state.Z = res.est.G * res.C.mean + res.est.H * res.est.X;
        res.trajectory.push_back(detail::trajectory_point(res.iterations, final_state, Y, prior, truth));
    }
    return res;
}

}  // namespace triamp
