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


#include "triamp/frame.hpp"
#include "triamp/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace triamp {
namespace {

CMatrix random_matrix(int rows, int cols, std::uint64_t seed) {
    auto rng = make_rng(seed);
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.complex_normal();
    return m;
}

TEST(Ambiguity, InjectedDiagonalIsRemoved) {
    const CMatrix G = random_matrix(6, 4, 1);
    const CMatrix F = random_matrix(4, 3, 2);
    const CVector d = random_matrix(4, 1, 3).col(0);
    const CMatrix G_hat = G * d.asDiagonal();
    const CMatrix F_hat = d.cwiseInverse().asDiagonal() * F;
    const auto res = resolve_diagonal_ambiguity(G_hat, F_hat, G, F);
    EXPECT_LT(normalized_sq_error(res.G, G), 1e-28);
    EXPECT_LT(normalized_sq_error(res.F, F), 1e-28);
    for (bool flag : res.degenerate) EXPECT_FALSE(flag);
}

TEST(Ambiguity, UnitScalingIsIdentity) {
    const CMatrix G = random_matrix(5, 3, 4);
    const CMatrix F = random_matrix(3, 2, 5);
    const auto res = resolve_diagonal_ambiguity(G, F, G, F);
    EXPECT_LT((res.G - G).norm(), 1e-14);
    EXPECT_LT((res.F - F).norm(), 1e-14);
    EXPECT_LT((res.alpha - CVector::Ones(3)).norm(), 1e-14);
}

TEST(Ambiguity, CascadeUnchanged) {
    const CMatrix G_hat = random_matrix(5, 3, 6);
    const CMatrix F_hat = random_matrix(3, 2, 7);
    const auto res = resolve_diagonal_ambiguity(G_hat, F_hat, random_matrix(5, 3, 8), random_matrix(3, 2, 9));
    for (Eigen::Index n = 0; n < 3; ++n) {
        const CMatrix before = G_hat.col(n) * F_hat.row(n);
        const CMatrix after = res.G.col(n) * res.F.row(n);
        EXPECT_LT((before - after).norm(), 1e-12 * before.norm());
    }
}

// alpha_n must minimise |alpha g_hat - g|^2; compare against a dense grid around it.
TEST(Ambiguity, AlphaMatchesGridSearch) {
    const CMatrix G_hat = random_matrix(3, 2, 10);
    const CMatrix G = random_matrix(3, 2, 11);
    const auto res = resolve_diagonal_ambiguity(G_hat, random_matrix(2, 1, 12), G, random_matrix(2, 1, 13));
    for (Eigen::Index n = 0; n < 2; ++n) {
        double best = std::numeric_limits<double>::infinity();
        Complex best_alpha{};
        for (double re = -3.0; re <= 3.0; re += 0.002) {
            for (double im = -3.0; im <= 3.0; im += 0.002) {
                const double cost = (Complex{re, im} * G_hat.col(n) - G.col(n)).squaredNorm();
                if (cost < best) {
                    best = cost;
                    best_alpha = {re, im};
                }
            }
        }
        EXPECT_LT(std::abs(best_alpha - res.alpha(n)), 0.002);
        EXPECT_LE((res.alpha(n) * G_hat.col(n) - G.col(n)).squaredNorm(), best + 1e-12);
    }
}

TEST(Ambiguity, ZeroColumnKeepsUnitScaleAndFlags) {
    CMatrix G_hat = random_matrix(4, 3, 14);
    G_hat.col(1).setZero();
    const CMatrix F_hat = random_matrix(3, 2, 15);
    const auto res = resolve_diagonal_ambiguity(G_hat, F_hat, random_matrix(4, 3, 16), random_matrix(3, 2, 17));
    EXPECT_TRUE(res.degenerate[1]);
    EXPECT_FALSE(res.degenerate[0]);
    EXPECT_EQ(res.alpha(1), Complex(1.0, 0.0));
    EXPECT_EQ(CMatrix(res.F.row(1)), CMatrix(F_hat.row(1)));
}

FrameRealization tiny_truth(int K, int T, int T_p) {
    SystemConfig cfg;
    cfg.M = 3;
    cfg.N = 2;
    cfg.K = K;
    cfg.T = T;
    cfg.T_p = T_p;
    cfg.seeds = SeedSet::derive(1);
    return make_frame(cfg, ChannelEnsemble::iid());
}

TEST(Mse, ExactEstimateIsZero) {
    const auto fr = tiny_truth(2, 6, 2);
    const auto m = mse_metrics({fr.G, fr.F, fr.H, fr.X}, fr);
    EXPECT_EQ(m.mse_G, 0.0);
    EXPECT_EQ(m.mse_F, 0.0);
    EXPECT_EQ(m.mse_H, 0.0);
    EXPECT_EQ(m.mse_Xd, 0.0);
    EXPECT_EQ(m.ser, 0.0);
    EXPECT_EQ(m.mse_G_db(), -std::numeric_limits<double>::infinity());
}

TEST(Mse, SingleEntry) {
    CMatrix truth(1, 1), est(1, 1);
    truth(0, 0) = {1.0, 0.0};
    est(0, 0) = {0.0, 0.0};
    EXPECT_EQ(normalized_sq_error(est, truth), 1.0);
}

TEST(Mse, ZeroEstimateOfUnitVarianceTruthIsZeroDb) {
    double acc = 0.0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        const CMatrix H = random_matrix(8, 4, 100 + static_cast<std::uint64_t>(r));
        acc += normalized_sq_error(CMatrix::Zero(8, 4), H);
    }
    EXPECT_NEAR(acc / reps, 1.0, 5.0 / std::sqrt(reps * 32.0));
}

TEST(Mse, NormalizesByDataBlockOnly) {
    const auto fr = tiny_truth(2, 6, 2);
    CMatrix X_hat = fr.X;
    X_hat.leftCols(2).setZero();   // pilot errors are not scored
    X_hat(0, 5) = -fr.X(0, 5);     // one data symbol flipped
    const auto m = mse_metrics({fr.G, fr.F, fr.H, X_hat}, fr);
    EXPECT_NEAR(m.mse_Xd, 4.0 / 8.0, 1e-15);
    EXPECT_NEAR(m.ser, 1.0 / 8.0, 1e-15);
}

TEST(Ser, Counting) {
    SystemConfig cfg;
    cfg.K = 3;
    cfg.T = 5;
    cfg.T_p = 0;
    const CMatrix X = gen_data_frame(cfg, 2).X;
    EXPECT_EQ(ser_metric(X, X), 0.0);
    EXPECT_EQ(ser_metric(-X, X), 1.0);
    CMatrix one = X;
    one(2, 4) = std::conj(one(2, 4));
    EXPECT_NEAR(ser_metric(one, X), 1.0 / 15.0, 1e-15);
    EXPECT_TRUE(std::isnan(ser_metric(CMatrix(3, 0), CMatrix(3, 0))));
}

TEST(HardDecision, NearestQpskPoint) {
    CMatrix soft(1, 3);
    soft << Complex{0.3, -0.01}, Complex{-2.0, 5.0}, Complex{-0.1, -0.1};
    const CMatrix hard = qpsk_hard_decision(soft);
    const auto& a = qpsk_alphabet();
    EXPECT_EQ(hard(0, 0), a[2]);
    EXPECT_EQ(hard(0, 1), a[1]);
    EXPECT_EQ(hard(0, 2), a[3]);
}

}  // namespace
}  // namespace triamp
