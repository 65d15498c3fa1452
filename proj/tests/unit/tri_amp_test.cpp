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


#include "triamp/metrics.hpp"
#include "triamp/posterior_oracle.hpp"
#include "triamp/tri_amp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

namespace triamp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMatrix random_c(Eigen::Index rows, Eigen::Index cols, Philox4x32& rng, double var = 1.0) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.complex_normal(var);
    return m;
}

RMatrix random_var(Eigen::Index rows, Eigen::Index cols, Philox4x32& rng, double lo, double hi) {
    RMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = lo + (hi - lo) * rng.uniform();
    return m;
}

SystemConfig small_config(int M, int N, int K, int T, int T_p, double snr_db, std::uint64_t seed) {
    SystemConfig cfg;
    cfg.M = M;
    cfg.N = N;
    cfg.K = K;
    cfg.T = T;
    cfg.T_p = T_p;
    cfg.sigma2 = std::isinf(snr_db) ? 0.0 : sigma_from_snr(cfg, snr_db);
    cfg.seeds = SeedSet::derive(seed);
    return cfg;
}

TEST(Damping, Examples) {
    EXPECT_EQ(apply_damping(1.0, 0.0, 0.15), 0.15);
    EXPECT_EQ(apply_damping(2.0, 4.0, 1.0), 2.0);
    EXPECT_EQ(apply_damping(2.0, 4.0, 0.0), 4.0);
    EXPECT_EQ(apply_damping(Complex{1.0, 1.0}, Complex{0.0, 0.0}, 0.5), Complex(0.5, 0.5));
    RMatrix a = RMatrix::Constant(2, 2, 1.0), b = RMatrix::Zero(2, 2);
    EXPECT_EQ(apply_damping(a, b, 0.25), RMatrix::Constant(2, 2, 0.25));
}

// Hand-state used by the step transcription tests.
AmpState random_state(Eigen::Index M, Eigen::Index N, Eigen::Index K, Eigen::Index T, const RMatrix& S,
                      std::uint64_t seed) {
    auto rng = make_rng(seed);
    AmpState st;
    st.G = {random_c(M, N, rng), random_var(M, N, rng, 0.1, 0.9)};
    st.H = {random_c(M, K, rng), random_var(M, K, rng, 0.1, 0.9)};
    st.F = {random_c(N, K, rng), random_var(N, K, rng, 0.1, 0.9)};
    st.X = {random_c(K, T, rng), random_var(K, T, rng, 0.1, 0.9)};
    st.C = {detail::times(S, random_c(N, T, rng)), S.cwiseProduct(random_var(N, T, rng, 0.1, 0.9))};
    st.Z = st.G.mean * st.C.mean + st.H.mean * st.X.mean;
    st.u_hat = random_c(M, T, rng, 0.3);
    st.v_u = random_var(M, T, rng, 0.5, 1.0);
    st.eta = detail::times(S, random_c(N, T, rng, 0.3));
    st.v_eta = S.cwiseProduct(random_var(N, T, rng, 0.5, 1.0));
    st.has_residuals = true;
    return st;
}

// Explicit-loop transcription of the outer pass, undamped.
TEST(OuterStep, MatchesLoopTranscription) {
    const int M = 2, N = 2, K = 1, T = 3;
    RMatrix S(N, T);
    S << 1, 0, 1, 1, 1, 0;
    AmpState st = random_state(M, N, K, T, S, 31);
    auto rng = make_rng(32);
    const CMatrix Y = random_c(M, T, rng);
    const double s2 = 0.3;
    const PriorSpec prior{0.8, 1.0, 0.6, Constellation::qpsk, 1.0};
    AmpOptions opts;
    opts.damping.residuals = false;
    const AmpState before = st;
    outer_step(st, Y, s2, prior, opts);

    const auto& G = before.G;
    const auto& C = before.C;
    const auto& H = before.H;
    const auto& X = before.X;
    CMatrix u(M, T);
    RMatrix vu(M, T);
    for (int m = 0; m < M; ++m) {
        for (int t = 0; t < T; ++t) {
            double vbar = 0.0, vp = 0.0;
            Complex pbar{};
            for (int n = 0; n < N; ++n) {
                vbar += std::norm(G.mean(m, n)) * C.var(n, t) + G.var(m, n) * std::norm(C.mean(n, t));
                vp += G.var(m, n) * C.var(n, t);
                pbar += G.mean(m, n) * C.mean(n, t);
            }
            for (int k = 0; k < K; ++k) {
                vbar += std::norm(H.mean(m, k)) * X.var(k, t) + H.var(m, k) * std::norm(X.mean(k, t));
                vp += H.var(m, k) * X.var(k, t);
                pbar += H.mean(m, k) * X.mean(k, t);
            }
            vp += vbar;
            const Complex p = pbar - vbar * before.u_hat(m, t);
            EXPECT_NEAR(st.v_p(m, t), vp, 1e-13);
            EXPECT_LT(std::abs(st.p_hat(m, t) - p), 1e-13);
            EXPECT_NEAR(st.v_z(m, t), s2 * vp / (s2 + vp), 1e-13);
            EXPECT_LT(std::abs(st.z_hat(m, t) - (s2 * p + vp * Y(m, t)) / (s2 + vp)), 1e-13);
            u(m, t) = (Y(m, t) - p) / (s2 + vp);
            vu(m, t) = 1.0 / (s2 + vp);
            EXPECT_LT(std::abs(st.u_hat(m, t) - u(m, t)), 1e-13);
            EXPECT_NEAR(st.v_u(m, t), vu(m, t), 1e-13);
        }
    }
    for (int n = 0; n < N; ++n) {
        for (int t = 0; t < T; ++t) {
            double prec = 0.0, corr = 0.0;
            Complex back{};
            for (int m = 0; m < M; ++m) {
                prec += std::norm(G.mean(m, n)) * vu(m, t);
                corr += G.var(m, n) * vu(m, t);
                back += std::conj(G.mean(m, n)) * u(m, t);
            }
            const double v = 1.0 / prec;
            EXPECT_NEAR(st.v_xi(n, t), v, 1e-12 * v);
            EXPECT_LT(std::abs(st.xi(n, t) - (C.mean(n, t) * (1.0 - v * corr) + v * back)), 1e-12);
        }
    }
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) {
            double prec = 0.0, corr = 0.0;
            Complex back{};
            for (int t = 0; t < T; ++t) {
                prec += vu(m, t) * std::norm(C.mean(n, t));
                corr += vu(m, t) * C.var(n, t);
                back += u(m, t) * std::conj(C.mean(n, t));
            }
            const double v = 1.0 / prec;
            const Complex q = G.mean(m, n) * (1.0 - v * corr) + v * back;
            EXPECT_LT(std::abs(st.qhat_g(m, n) - q), 1e-12);
            EXPECT_LT(std::abs(st.G_next.mean(m, n) - q * (0.8 / (0.8 + v))), 1e-12);
            EXPECT_NEAR(st.G_next.var(m, n), 0.8 * v / (0.8 + v), 1e-12);
        }
        for (int k = 0; k < K; ++k) {
            double prec = 0.0, corr = 0.0;
            Complex back{};
            for (int t = 0; t < T; ++t) {
                prec += vu(m, t) * std::norm(X.mean(k, t));
                corr += vu(m, t) * X.var(k, t);
                back += u(m, t) * std::conj(X.mean(k, t));
            }
            const double v = 1.0 / prec;
            const Complex q = H.mean(m, k) * (1.0 - v * corr) + v * back;
            EXPECT_LT(std::abs(st.H_next.mean(m, k) - q * (0.6 / (0.6 + v))), 1e-12);
        }
    }
    for (int k = 0; k < K; ++k) {
        for (int t = 0; t < T; ++t) {
            double prec = 0.0, corr = 0.0;
            Complex back{};
            for (int m = 0; m < M; ++m) {
                prec += std::norm(H.mean(m, k)) * vu(m, t);
                corr += H.var(m, k) * vu(m, t);
                back += std::conj(H.mean(m, k)) * u(m, t);
            }
            const double v = 1.0 / prec;
            EXPECT_NEAR(st.v_rx(k, t), v, 1e-12 * v);
            EXPECT_LT(std::abs(st.r_x(k, t) - (X.mean(k, t) * (1.0 - v * corr) + v * back)), 1e-12);
        }
    }
}

TEST(OuterStep, NoiselessChannelPinsZToY) {
    const int M = 3, N = 2, K = 2, T = 4;
    const RMatrix S = RMatrix::Ones(N, T);
    AmpState st = random_state(M, N, K, T, S, 40);
    auto rng = make_rng(41);
    const CMatrix Y = random_c(M, T, rng);
    outer_step(st, Y, 0.0, PriorSpec{}, AmpOptions{});
    EXPECT_EQ(st.v_z, RMatrix::Zero(M, T));
    EXPECT_LT((st.z_hat - Y).norm(), 1e-14);
}

TEST(OuterStep, AbsentDirectLinkSilencesH) {
    const int M = 3, N = 2, K = 2, T = 4;
    const RMatrix S = RMatrix::Ones(N, T);
    AmpState st = random_state(M, N, K, T, S, 42);
    auto rng = make_rng(43);
    AmpOptions opts;
    opts.direct_link = DirectLink::absent;
    const Posterior H = st.H;
    outer_step(st, random_c(M, T, rng), 0.1, PriorSpec{}, opts);
    EXPECT_TRUE((st.v_rx.array() == kInf).all());
    EXPECT_EQ(st.H_next.mean, H.mean);
}

// Truth with exact noiseless Y and zero variances leaves no residual.
TEST(OuterStep, TruthIsResidualFree) {
    const auto cfg = small_config(8, 4, 2, 10, 4, kInf, 3);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    AmpOptions opts;
    opts.init_mode = InitMode::oracle_truth;
    AmpState st = init_state(fr.Y, fr.S, fr.pilots(), PriorSpec{}, opts, &fr);
    outer_step(st, fr.Y, 1.0, PriorSpec{}, opts);
    EXPECT_LT(st.u_hat.cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((st.xi - fr.S.cast<Complex>().cwiseProduct(fr.F * fr.X)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((st.z_hat - fr.Y).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(InnerStep, MatchesLoopTranscription) {
    const int N = 2, K = 1, T = 3;
    RMatrix S(N, T);
    S << 1, 0, 1, 1, 1, 0;
    AmpState st = random_state(2, N, K, T, S, 50);
    auto rng = make_rng(51);
    st.xi = random_c(N, T, rng);
    st.v_xi = random_var(N, T, rng, 0.2, 0.7);
    const PriorSpec prior{1.0, 0.7, 1.0, Constellation::qpsk, 1.0};
    AmpOptions opts;
    opts.damping.residuals = false;
    const AmpState before = st;
    inner_step(st, S, prior, opts);

    const auto& F = before.F;
    const auto& X = before.X;
    CMatrix eta(N, T);
    RMatrix veta(N, T);
    for (int n = 0; n < N; ++n) {
        for (int t = 0; t < T; ++t) {
            const double s = S(n, t);
            double vbar = 0.0, vv = 0.0;
            Complex rbar{};
            for (int k = 0; k < K; ++k) {
                vbar += s * (std::norm(F.mean(n, k)) * X.var(k, t) + F.var(n, k) * std::norm(X.mean(k, t)));
                vv += s * F.var(n, k) * X.var(k, t);
                rbar += s * F.mean(n, k) * X.mean(k, t);
            }
            const double vrc = std::max(vbar + vv, kVarianceFloor);
            const Complex rc = rbar - vbar * before.eta(n, t);
            EXPECT_NEAR(st.v_rc(n, t), vrc, 1e-14);
            EXPECT_LT(std::abs(st.r_c(n, t) - rc), 1e-14);
            const double vx = before.v_xi(n, t);
            const Complex x = before.xi(n, t);
            if (s != 0.0) {
                EXPECT_LT(std::abs(st.C_next.mean(n, t) - (vx * rc + vrc * x) / (vx + vrc)), 1e-13);
                EXPECT_NEAR(st.C_next.var(n, t), vx * vrc / (vx + vrc), 1e-13);
                eta(n, t) = (x - rc) / (vx + vrc);
                veta(n, t) = 1.0 / (vx + vrc);
            } else {
                EXPECT_EQ(st.C_next.mean(n, t), Complex{});
                EXPECT_EQ(st.C_next.var(n, t), 0.0);
                eta(n, t) = 0.0;
                veta(n, t) = 0.0;
            }
            EXPECT_LT(std::abs(st.eta(n, t) - eta(n, t)), 1e-13);
            EXPECT_NEAR(st.v_eta(n, t), veta(n, t), 1e-13);
        }
    }
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
            double prec = 0.0, corr = 0.0;
            Complex back{};
            for (int t = 0; t < T; ++t) {
                prec += veta(n, t) * std::norm(X.mean(k, t));
                corr += veta(n, t) * X.var(k, t);
                back += eta(n, t) * std::conj(X.mean(k, t));
            }
            const double v = 1.0 / prec;
            const Complex q = F.mean(n, k) * (1.0 - v * corr) + v * back;
            EXPECT_LT(std::abs(st.qhat_f(n, k) - q), 1e-12);
            EXPECT_LT(std::abs(st.F_next.mean(n, k) - q * (0.7 / (0.7 + v))), 1e-12);
            EXPECT_NEAR(st.F_next.var(n, k), 0.7 * v / (0.7 + v), 1e-12);
        }
    }
    for (int k = 0; k < K; ++k) {
        for (int t = 0; t < T; ++t) {
            double prec = 0.0, corr = 0.0;
            Complex back{};
            for (int n = 0; n < N; ++n) {
                prec += std::norm(F.mean(n, k)) * veta(n, t);
                corr += F.var(n, k) * veta(n, t);
                back += std::conj(F.mean(n, k)) * eta(n, t);
            }
            const double v = 1.0 / prec;
            EXPECT_NEAR(st.v_gamma(k, t), v, 1e-12 * v);
            EXPECT_LT(std::abs(st.gamma(k, t) - (X.mean(k, t) * (1.0 - v * corr) + v * back)), 1e-12);
        }
    }
}

TEST(InnerStep, AllOffMaskLeavesPriorAndSilencesX) {
    const int N = 3, K = 2, T = 4;
    const RMatrix S = RMatrix::Zero(N, T);
    AmpState st = random_state(2, N, K, T, S, 60);
    auto rng = make_rng(61);
    st.xi = random_c(N, T, rng);
    st.v_xi = random_var(N, T, rng, 0.2, 0.7);
    inner_step(st, S, PriorSpec{}, AmpOptions{});
    EXPECT_LT(st.F_next.mean.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((st.F_next.var.array() - 1.0).abs().maxCoeff(), 1e-10);
    EXPECT_GE(st.v_gamma.minCoeff(), 1e11);
    EXPECT_EQ(st.C_next.mean, CMatrix::Zero(N, T));
}

TEST(InnerStep, AllOnMaskAtTruthHasNoResidual) {
    auto cfg = small_config(8, 4, 2, 10, 4, kInf, 4);
    cfg.rho = 1.0;
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    AmpOptions opts;
    opts.init_mode = InitMode::oracle_truth;
    AmpState st = init_state(fr.Y, fr.S, fr.pilots(), PriorSpec{}, opts, &fr);
    outer_step(st, fr.Y, 1.0, PriorSpec{}, opts);
    inner_step(st, fr.S, PriorSpec{}, opts);
    EXPECT_LT(st.eta.cwiseAbs().maxCoeff(), 1e-10);
}

// Perturbing the outer message at s = 0 entries must not reach F or X.
TEST(InnerStep, MaskedEntriesAreInert) {
    const int N = 4, K = 2, T = 6;
    auto rng = make_rng(70);
    RMatrix S(N, T);
    for (Eigen::Index i = 0; i < S.size(); ++i) S(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    AmpState a = random_state(3, N, K, T, S, 71);
    a.xi = random_c(N, T, rng);
    a.v_xi = random_var(N, T, rng, 0.2, 0.7);
    AmpState b = a;
    for (Eigen::Index i = 0; i < S.size(); ++i) {
        if (S(i) == 0.0) {
            b.xi(i) = rng.complex_normal(100.0);
            b.v_xi(i) = 1e-6 + rng.uniform();
        }
    }
    inner_step(a, S, PriorSpec{}, AmpOptions{});
    inner_step(b, S, PriorSpec{}, AmpOptions{});
    EXPECT_EQ(a.F_next.mean, b.F_next.mean);
    EXPECT_EQ(a.F_next.var, b.F_next.var);
    EXPECT_EQ(a.gamma, b.gamma);
    EXPECT_EQ(a.v_gamma, b.v_gamma);
    EXPECT_EQ(a.C_next.mean, b.C_next.mean);
}

TEST(FuseX, PilotsClampedAndDataFused) {
    const int K = 2, T = 4;
    auto rng = make_rng(80);
    AmpState st;
    st.r_x = random_c(K, T, rng);
    st.v_rx = random_var(K, T, rng, 0.2, 1.0);
    st.gamma = random_c(K, T, rng);
    st.v_gamma = random_var(K, T, rng, 0.2, 1.0);
    const CMatrix pilots = random_c(K, 2, rng);
    fuse_x_step(st, pilots, PriorSpec{});
    EXPECT_EQ(CMatrix(st.X_next.mean.leftCols(2)), pilots);
    EXPECT_EQ(RMatrix(st.X_next.var.leftCols(2)), RMatrix::Zero(K, 2));
    const auto p = denoise_x(st.r_x(1, 3), st.v_rx(1, 3), st.gamma(1, 3), st.v_gamma(1, 3), XPrior{});
    EXPECT_EQ(st.X_next.mean(1, 3), p.mean);
}

// Runs the loop by hand so that every intermediate state can be inspected.
TEST(Iteration, InvariantsHoldEveryIteration) {
    const auto cfg = small_config(32, 16, 4, 40, 12, 20.0, 5);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    const PriorSpec prior = PriorSpec::from_config(cfg);
    AmpOptions opts;
    opts.init_seed = 9;
    AmpState st = init_state(fr.Y, fr.S, fr.pilots(), prior, opts);
    for (int it = 0; it < 60; ++it) {
        outer_step(st, fr.Y, cfg.sigma2, prior, opts);
        EXPECT_TRUE((st.v_z.array() <= st.v_p.array().min(cfg.sigma2) * (1 + 1e-12)).all());
        inner_step(st, fr.S, prior, opts);
        fuse_x_step(st, fr.pilots(), prior);
        EXPECT_LE(st.G_next.var.maxCoeff(), prior.q_g);
        EXPECT_LE(st.F_next.var.maxCoeff(), prior.q_f);
        EXPECT_LE(st.H_next.var.maxCoeff(), prior.q_h);
        EXPECT_LE(st.X_next.var.maxCoeff(), 1.0);
        apply_damping(st, fr.pilots(), opts);
        EXPECT_EQ(CMatrix(st.X.mean.leftCols(cfg.T_p)), CMatrix(fr.pilots()));
        EXPECT_EQ(st.X.var.leftCols(cfg.T_p).maxCoeff(), 0.0);
        for (Eigen::Index i = 0; i < fr.S.size(); ++i) {
            if (fr.S(i) == 0.0) {
                ASSERT_EQ(st.C.mean(i), Complex{});
                ASSERT_EQ(st.C.var(i), 0.0);
            }
        }
        EXPECT_LT((st.Z - (st.G.mean * st.C.mean + st.H.mean * st.X.mean)).norm(), 1e-12 * (1 + st.Z.norm()));
    }
}

// beta = 1 is damping in name only; it must match a run with damping switched off.
TEST(Iteration, UnitBetaEqualsNoDamping) {
    const auto cfg = small_config(16, 8, 2, 20, 6, 20.0, 6);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    AmpOptions a;
    a.beta = 1.0;
    a.max_iters = 8;
    a.restart_on_divergence = false;
    AmpOptions b = a;
    b.beta = 0.15;
    b.damping = {false, false, false, false, false};
    const auto prior = PriorSpec::from_config(cfg);
    const auto ra = tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, prior, a);
    const auto rb = tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, prior, b);
    EXPECT_EQ(ra.est.G, rb.est.G);
    EXPECT_EQ(ra.est.F, rb.est.F);
    EXPECT_EQ(ra.est.H, rb.est.H);
    EXPECT_EQ(ra.est.X, rb.est.X);
}

TEST(Run, OracleTruthStaysAtTruth) {
    const auto cfg = small_config(32, 16, 4, 40, 12, kInf, 7);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    AmpOptions opts;
    opts.init_mode = InitMode::oracle_truth;
    opts.max_iters = 50;
    opts.record_trajectory = true;
    const auto res = tri_amp_run(fr.Y, fr.S, fr.pilots(), 1e-10, PriorSpec::from_config(cfg), opts, &fr);
    ASSERT_FALSE(res.trajectory.empty());
    EXPECT_LT(res.trajectory.back().residual, 1e-8);
    EXPECT_EQ(res.trajectory.back().ser, 0.0);
}

TEST(Run, RecoversChannelsAtHighSnr) {
    const auto cfg = small_config(64, 32, 8, 100, 24, 30.0, 8);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    AmpOptions opts;
    opts.init_seed = 8;
    const auto res = tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, PriorSpec::from_config(cfg), opts);
    EXPECT_NE(res.status, AmpStatus::diverged);
    const auto m = mse_metrics(res.est, fr);
    EXPECT_LT(m.mse_G_db(), -20.0);
    EXPECT_LT(m.mse_F_db(), -20.0);
    EXPECT_LT(m.mse_H_db(), -15.0);
    EXPECT_EQ(m.ser, 0.0);
    EXPECT_EQ(res.Xd_hard.cols(), cfg.T_d());
}

TEST(Run, AllPilotFrameHasNoDataBlock) {
    const auto cfg = small_config(16, 8, 2, 12, 12, 20.0, 9);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    const auto res = tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, PriorSpec::from_config(cfg), AmpOptions{});
    EXPECT_EQ(res.Xd_hard.cols(), 0);
    EXPECT_EQ(res.est.X, fr.X);
    EXPECT_TRUE(std::isnan(mse_metrics(res.est, fr).ser));
}

TEST(Run, RejectsBadOptions) {
    const auto cfg = small_config(4, 2, 1, 4, 2, 20.0, 10);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    AmpOptions opts;
    opts.beta = 1.5;
    EXPECT_THROW(tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, PriorSpec{}, opts), ConfigError);
    opts = {};
    opts.init_mode = InitMode::oracle_truth;
    EXPECT_THROW(tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, PriorSpec{}, opts), ConfigError);
    EXPECT_THROW(tri_amp_run(fr.Y, RMatrix::Ones(2, 5), fr.pilots(), cfg.sigma2, PriorSpec{}, AmpOptions{}),
                 DimensionError);
}

TEST(Run, DivergenceTriggersSingleRestart) {
    const auto cfg = small_config(64, 32, 8, 100, 24, 20.0, 11);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    AmpOptions opts;
    opts.beta = 1.0;
    opts.restart_on_divergence = false;
    int diverged = 0;
    for (std::uint64_t s = 0; s < 3; ++s) {
        opts.init_seed = s;
        const auto r = tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, PriorSpec::from_config(cfg), opts);
        if (r.status == AmpStatus::diverged) {
            ++diverged;
            EXPECT_TRUE(r.first_attempt_diverged);
            opts.restart_on_divergence = true;
            const auto again = tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, PriorSpec::from_config(cfg), opts);
            EXPECT_TRUE(again.first_attempt_diverged);
            EXPECT_EQ(again.beta_used, 0.5);
            opts.restart_on_divergence = false;
        }
    }
    EXPECT_GT(diverged, 0);
}

// Relabeling RIS elements or users permutes the estimates the same way.
TEST(Run, PermutationEquivariance) {
    const auto cfg = small_config(24, 8, 3, 30, 8, 10.0, 12);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    AmpOptions opts;
    opts.init_mode = InitMode::oracle_truth;
    opts.max_iters = 40;
    const PriorSpec prior = PriorSpec::from_config(cfg);
    const auto base = tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, prior, opts, &fr);

    Eigen::PermutationMatrix<Eigen::Dynamic> pn(cfg.N), pk(cfg.K);
    pn.indices() << 3, 0, 7, 5, 1, 6, 2, 4;
    pk.indices() << 2, 0, 1;
    FrameRealization q = fr;
    q.G = fr.G * pn;
    q.F = pn.transpose() * fr.F * pk;
    q.S = pn.transpose() * fr.S;
    q.H = fr.H * pk;
    q.X = pk.transpose() * fr.X;
    ASSERT_LT((noiseless_output(q.G, q.F, q.H, q.X, q.S) + fr.W - fr.Y).norm(), 1e-12);
    const auto perm = tri_amp_run(fr.Y, q.S, q.pilots(), cfg.sigma2, prior, opts, &q);
    const double tol = 1e-8;
    EXPECT_LT((perm.est.G - base.est.G * pn).norm(), tol * base.est.G.norm());
    EXPECT_LT((perm.est.F - pn.transpose() * base.est.F * pk).norm(), tol * base.est.F.norm());
    EXPECT_LT((perm.est.H - base.est.H * pk).norm(), tol * base.est.H.norm());
    EXPECT_LT((perm.est.X - pk.transpose() * base.est.X).norm(), tol * base.est.X.norm());
}

OracleInput toy_oracle_input(const FrameRealization& fr, int K, double sigma2) {
    OracleInput in;
    in.Y = fr.Y;
    in.S = fr.S;
    in.X_pilot = fr.pilots();
    in.K = K;
    in.sigma2 = sigma2;
    in.known = Channels{fr.G, fr.F, fr.H};
    return in;
}

// With the channels known the columns decouple, so each data column can be
// checked against its own four-hypothesis sum.
TEST(PosteriorOracle, KnownChannelsDecoupleColumns) {
    auto cfg = small_config(2, 2, 1, 3, 1, 5.0, 13);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    const auto mean = brute_force_posterior_oracle(toy_oracle_input(fr, 1, cfg.sigma2));
    const auto& a = qpsk_alphabet();
    for (int j = 0; j < 2; ++j) {
        const int t = 1 + j;
        double w[4], top = -kInf, total = 0.0;
        for (int s = 0; s < 4; ++s) {
            CVector z = fr.H.col(0) * a[s];
            for (int n = 0; n < 2; ++n) z += fr.G.col(n) * (fr.S(n, t) * fr.F(n, 0) * a[s]);
            w[s] = -(fr.Y.col(t) - z).squaredNorm() / cfg.sigma2;
            top = std::max(top, w[s]);
        }
        Complex m{};
        for (int s = 0; s < 4; ++s) total += (w[s] = std::exp(w[s] - top));
        for (int s = 0; s < 4; ++s) m += w[s] / total * a[s];
        EXPECT_LT(std::abs(mean(0, j) - m), 1e-12);
    }
}

TEST(PosteriorOracle, Limits) {
    const auto cfg = small_config(4, 2, 2, 5, 1, kInf, 14);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    const auto sharp = brute_force_posterior_oracle(toy_oracle_input(fr, 2, 1e-6));
    EXPECT_LT((sharp - CMatrix(fr.data())).cwiseAbs().maxCoeff(), 1e-9);
    const auto flat = brute_force_posterior_oracle(toy_oracle_input(fr, 2, 1e12));
    EXPECT_LT(flat.cwiseAbs().maxCoeff(), 1e-5);
}

TEST(PosteriorOracle, RefusesLargeProblems) {
    const auto cfg = small_config(4, 2, 3, 5, 2, kInf, 15);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    EXPECT_THROW(brute_force_posterior_oracle(toy_oracle_input(fr, 3, 1.0)), std::invalid_argument);
    EXPECT_THROW(brute_force_posterior_oracle(toy_oracle_input(fr, 2, 0.0)), std::invalid_argument);
}

// At high SNR Tri-AMP's symbol decisions should agree with the exact
// known-channel posterior.
TEST(PosteriorOracle, AgreesWithTriAmpDecisions) {
    const auto cfg = small_config(32, 16, 2, 28, 24, 25.0, 16);
    const auto fr = make_frame(cfg, ChannelEnsemble::iid());
    const auto exact = brute_force_posterior_oracle(toy_oracle_input(fr, 2, cfg.sigma2));
    AmpOptions opts;
    opts.init_seed = 3;
    const auto res = tri_amp_run(fr.Y, fr.S, fr.pilots(), cfg.sigma2, PriorSpec::from_config(cfg), opts);
    EXPECT_EQ(qpsk_hard_decision(exact), res.Xd_hard);
    EXPECT_LT((res.est.X.rightCols(4) - exact).norm() / exact.norm(), 0.05);
}

}  // namespace
}  // namespace triamp
