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

#include "triamp/channel.hpp"
#include "triamp/linalg.hpp"
#include "triamp/rng.hpp"
#include "triamp/system_config.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace triamp {

/// Unit-power QPSK alphabet, index = 2*b_im + b_re with bit 1 meaning negative.
inline const std::array<Complex, 4>& qpsk_alphabet() {
    static const std::array<Complex, 4> alphabet = [] {
        const double a = 1.0 / std::numbers::sqrt2;
        return std::array<Complex, 4>{Complex{a, a}, Complex{-a, a}, Complex{a, -a}, Complex{-a, -a}};
    }();
    return alphabet;
}

/// i.i.d. Bernoulli(rho) on/off pattern of the RIS elements, N x T, entries 0/1.
inline RMatrix gen_bernoulli_mask(int N, int T, double rho, std::uint64_t seed) {
    auto rng = make_rng(seed);
    RMatrix S(N, T);
    for (int t = 0; t < T; ++t) {
        for (int n = 0; n < N; ++n) {
            S(n, t) = rng.bernoulli(rho) ? 1.0 : 0.0;
        }
    }
    return S;
}

/// Transmit block X = [X_p, X_d]; the first T_p columns are known pilots.
struct DataFrame {
    CMatrix X;
    int T_p = 0;

    auto pilots() const { return X.leftCols(T_p); }
    auto data() const { return X.rightCols(X.cols() - T_p); }
};

inline DataFrame gen_data_frame(const SystemConfig& cfg, std::uint64_t seed) {
    auto rng = make_rng(seed);
    DataFrame frame{CMatrix(cfg.K, cfg.T), cfg.T_p};
    const auto& alphabet = qpsk_alphabet();
    for (int t = 0; t < cfg.T; ++t) {
        for (int k = 0; k < cfg.K; ++k) {
            if (cfg.constellation == Constellation::qpsk) {
                frame.X(k, t) = alphabet[rng() & 3u];
            } else {
                frame.X(k, t) = rng.complex_normal(1.0);
            }
        }
    }
    return frame;
}

/// G (S o (F X)) + H X without noise.
inline CMatrix noiseless_output(const CMatrix& G, const CMatrix& F, const CMatrix& H, const CMatrix& X,
                                const RMatrix& S) {
    const auto M = G.rows();
    const auto N = G.cols();
    const auto K = F.cols();
    const auto T = X.cols();
    require_shape(F, N, K, "F");
    require_shape(H, M, K, "H");
    require_shape(X, K, T, "X");
    require_shape(S, N, T, "S");
    const CMatrix C = S.cast<Complex>().cwiseProduct(F * X);
    return G * C + H * X;
}

struct Observation {
    CMatrix Y;
    CMatrix W;
};

/// Y = G (S o (F X)) + H X + W with W ~ CN(0, sigma2) drawn from `seed`.
inline Observation forward_model(const CMatrix& G, const CMatrix& F, const CMatrix& H, const CMatrix& X,
                                 const RMatrix& S, double sigma2, std::uint64_t seed) {
    Observation obs;
    obs.Y = noiseless_output(G, F, H, X, S);
    obs.W = CMatrix::Zero(obs.Y.rows(), obs.Y.cols());
    if (sigma2 > 0.0) {
        auto rng = make_rng(seed);
        for (Eigen::Index t = 0; t < obs.W.cols(); ++t) {
            for (Eigen::Index m = 0; m < obs.W.rows(); ++m) {
                obs.W(m, t) = rng.complex_normal(sigma2);
            }
        }
    }
    obs.Y += obs.W;
    return obs;
}

/// One complete draw of the system with its pilot/data partition.
struct FrameRealization {
    CMatrix G, F, H;
    RMatrix S;
    CMatrix X, W, Y;
    int T_p = 0;
    double sigma2 = 0.0;

    auto pilots() const { return X.leftCols(T_p); }
    auto data() const { return X.rightCols(X.cols() - T_p); }
};

inline FrameRealization make_frame(const SystemConfig& cfg, const ChannelEnsemble& ensemble) {
    cfg.validate();
    FrameRealization fr;
    auto ch = gen_channels(cfg, ensemble, cfg.seeds.channels);
    fr.G = std::move(ch.G);
    fr.F = std::move(ch.F);
    fr.H = std::move(ch.H);
    fr.S = gen_bernoulli_mask(cfg.N, cfg.T, cfg.rho, cfg.seeds.mask);
    fr.X = gen_data_frame(cfg, cfg.seeds.data).X;
    fr.T_p = cfg.T_p;
    fr.sigma2 = cfg.sigma2;
    auto obs = forward_model(fr.G, fr.F, fr.H, fr.X, fr.S, cfg.sigma2, cfg.seeds.noise);
    fr.W = std::move(obs.W);
    fr.Y = std::move(obs.Y);
    return fr;
}

}  // namespace triamp
