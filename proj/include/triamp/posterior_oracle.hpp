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

// Exact posterior means of the data block by enumerating every QPSK
// hypothesis. Only usable on toy instances; meant as a test oracle.

#include "triamp/channel.hpp"
#include "triamp/frame.hpp"
#include "triamp/linalg.hpp"
#include "triamp/rng.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace triamp {

inline constexpr int kOracleMaxSymbols = 8;

struct OracleInput {
    CMatrix Y;
    RMatrix S;
    CMatrix X_pilot;
    int K = 0;
    double sigma2 = 1.0;
    std::optional<Channels> known;  // when absent, channels are averaged over prior draws
    int channel_samples = 2000;
    double q_g = 1.0, q_f = 1.0, q_h = 1.0;
    std::uint64_t seed = 0;
};

/// Posterior mean of X_d (K x T_d) under a uniform QPSK prior.
inline CMatrix brute_force_posterior_oracle(const OracleInput& in) {
    const auto T = in.Y.cols();
    const auto T_p = in.X_pilot.cols();
    const auto T_d = T - T_p;
    const int unknown = in.K * static_cast<int>(T_d);
    if (unknown > kOracleMaxSymbols) {
        throw std::invalid_argument("posterior oracle refuses more than 8 unknown symbols");
    }
    if (!(in.sigma2 > 0.0)) throw std::invalid_argument("posterior oracle needs sigma2 > 0");

    std::vector<Channels> draws;
    if (in.known) {
        draws.push_back(*in.known);
    } else {
        auto rng = make_rng(in.seed);
        const auto M = in.Y.rows();
        const auto N = in.S.rows();
        for (int l = 0; l < in.channel_samples; ++l) {
            Channels c{CMatrix(M, N), CMatrix(N, in.K), CMatrix(M, in.K)};
            for (auto* mat : {&c.G, &c.F, &c.H}) {
                const double var = mat == &c.G ? in.q_g : (mat == &c.F ? in.q_f : in.q_h);
                for (Eigen::Index j = 0; j < mat->cols(); ++j) {
                    for (Eigen::Index i = 0; i < mat->rows(); ++i) (*mat)(i, j) = rng.complex_normal(var);
                }
            }
            draws.push_back(std::move(c));
        }
    }

    const auto& alphabet = qpsk_alphabet();
    const std::uint64_t hypotheses = std::uint64_t{1} << (2 * unknown);
    std::vector<double> logw;
    std::vector<std::uint64_t> label;
    logw.reserve(hypotheses * draws.size());
    CMatrix X(in.K, T);
    X.leftCols(T_p) = in.X_pilot;
    for (std::uint64_t h = 0; h < hypotheses; ++h) {
        for (int i = 0; i < unknown; ++i) {
            X(i % in.K, T_p + i / in.K) = alphabet[(h >> (2 * i)) & 3u];
        }
        for (const auto& ch : draws) {
            const CMatrix Z = noiseless_output(ch.G, ch.F, ch.H, X, in.S);
            logw.push_back(-(in.Y - Z).squaredNorm() / in.sigma2);
            label.push_back(h);
        }
    }
    double top = -std::numeric_limits<double>::infinity();
    for (double w : logw) top = std::max(top, w);
    CMatrix mean = CMatrix::Zero(in.K, T_d);
    double total = 0.0;
    for (size_t idx = 0; idx < logw.size(); ++idx) {
        const double w = std::exp(logw[idx] - top);
        total += w;
        for (int i = 0; i < unknown; ++i) {
            mean(i % in.K, i / in.K) += w * alphabet[(label[idx] >> (2 * i)) & 3u];
        }
    }
    return mean / total;
}

}  // namespace triamp
