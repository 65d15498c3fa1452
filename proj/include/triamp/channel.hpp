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

#include "triamp/linalg.hpp"
#include "triamp/rng.hpp"
#include "triamp/system_config.hpp"

#include <cstdint>
#include <string_view>

namespace triamp {

enum class EnsembleKind { iid, correlated };

/// Rayleigh channel ensemble. The correlated kind colors i.i.d. draws with
/// exponential correlation matrices: G = C_gl G' C_gr, F = C_f F', H = C_h H'.
struct ChannelEnsemble {
    EnsembleKind kind = EnsembleKind::iid;
    Complex c_gl{0.0, 0.0};
    Complex c_gr{0.0, 0.0};
    Complex c_f{0.0, 0.0};
    Complex c_h{0.0, 0.0};

    static ChannelEnsemble iid() { return {}; }

    static ChannelEnsemble correlated(Complex gl, Complex gr, Complex f, Complex h) {
        return {EnsembleKind::correlated, gl, gr, f, h};
    }

    void validate() const {
        if (kind == EnsembleKind::iid) {
            if (c_gl != Complex{} || c_gr != Complex{} || c_f != Complex{} || c_h != Complex{}) {
                throw ConfigError("iid ensemble carries no correlation coefficients");
            }
            return;
        }
        for (const Complex c : {c_gl, c_gr, c_f, c_h}) {
            if (!(std::abs(c) < 1.0)) {
                throw ConfigError("correlation coefficients must satisfy |c| < 1");
            }
        }
    }

    bool operator==(const ChannelEnsemble&) const = default;
};

inline std::string_view to_string(EnsembleKind k) { return k == EnsembleKind::iid ? "iid" : "correlated"; }

/// Hermitian exponential correlation matrix: entry (i, j) = c^(i-j) for i >= j.
inline CMatrix gen_correlation_matrix(int dim, Complex c) {
    if (!(std::abs(c) < 1.0)) {
        throw ConfigError("exponential correlation requires |c| < 1");
    }
    CMatrix R = CMatrix::Identity(dim, dim);
    for (int d = 1; d < dim; ++d) {
        const Complex power = std::pow(c, d);
        for (int j = 0; j + d < dim; ++j) {
            R(j + d, j) = power;
            R(j, j + d) = std::conj(power);
        }
    }
    return R;
}

struct Channels {
    CMatrix G;  // RIS -> BS, M x N
    CMatrix F;  // users -> RIS, N x K
    CMatrix H;  // users -> BS, M x K
};

namespace detail {

inline CMatrix draw_iid(Philox4x32& rng, int rows, int cols, double variance) {
    CMatrix out(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            out(i, j) = rng.complex_normal(variance);
        }
    }
    return out;
}

}  // namespace detail

/// Draws (G, F, H) from the `seed` stream. The correlated kind consumes the
/// same i.i.d. draws and applies the literal matrix products, so c = 0
/// reproduces the i.i.d. realization exactly.
inline Channels gen_channels(const SystemConfig& cfg, const ChannelEnsemble& ensemble, std::uint64_t seed) {
    ensemble.validate();
    auto rng = make_rng(seed);
    Channels ch;
    ch.G = detail::draw_iid(rng, cfg.M, cfg.N, cfg.q_g);
    ch.F = detail::draw_iid(rng, cfg.N, cfg.K, cfg.q_f);
    ch.H = detail::draw_iid(rng, cfg.M, cfg.K, cfg.q_h);
    if (ensemble.kind == EnsembleKind::correlated) {
        if (ensemble.c_gl != Complex{}) ch.G = gen_correlation_matrix(cfg.M, ensemble.c_gl) * ch.G;
        if (ensemble.c_gr != Complex{}) ch.G = ch.G * gen_correlation_matrix(cfg.N, ensemble.c_gr);
        if (ensemble.c_f != Complex{}) ch.F = gen_correlation_matrix(cfg.N, ensemble.c_f) * ch.F;
        if (ensemble.c_h != Complex{}) ch.H = gen_correlation_matrix(cfg.M, ensemble.c_h) * ch.H;
    }
    return ch;
}

}  // namespace triamp
