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

// Scalar posterior-mean/variance maps applied entrywise by the AMP passes.

#include "triamp/frame.hpp"
#include "triamp/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace triamp {

inline constexpr double kVarianceFloor = 1e-12;

struct ScalarPosterior {
    Complex mean{};
    double var = 0.0;
    bool floored = false;  // an input variance was replaced by the floor
};

/// Zero-mean Gaussian prior of variance q observed as r = x + CN(0, v).
inline ScalarPosterior denoise_gaussian(Complex r, double v, double q, double floor = kVarianceFloor) {
    ScalarPosterior out;
    if (!(v > 0.0)) {
        v = floor;
        out.floored = true;
    }
    if (q <= 0.0) return out;
    if (std::isinf(v)) {
        out.var = q;
        return out;
    }
    const double denom = q + v;
    out.mean = r * (q / denom);
    out.var = q * v / denom;
    return out;
}

struct QpskPosterior {
    Complex mean{};
    double var = 1.0;
    std::array<double, 4> probs{0.25, 0.25, 0.25, 0.25};  // indexed like qpsk_alphabet()
};

/// Unit-power QPSK prior observed through CN(0, v) noise, by enumerating the
/// four hypotheses. Log-weights are shifted by their maximum before exp().
inline QpskPosterior denoise_qpsk(Complex r, double v) {
    const auto& alphabet = qpsk_alphabet();
    QpskPosterior out;
    if (std::isinf(v)) return out;
    v = std::max(v, std::numeric_limits<double>::min());
    std::array<double, 4> logit{};
    for (int s = 0; s < 4; ++s) {
        const double l = 2.0 * (r * std::conj(alphabet[s])).real() / v;
        logit[s] = std::clamp(l, -1e300, 1e300);
    }
    const double top = *std::max_element(logit.begin(), logit.end());
    double total = 0.0;
    for (int s = 0; s < 4; ++s) {
        out.probs[s] = std::exp(logit[s] - top);
        total += out.probs[s];
    }
    out.mean = {};
    for (int s = 0; s < 4; ++s) {
        out.probs[s] /= total;
        out.mean += out.probs[s] * alphabet[s];
    }
    out.var = std::max(0.0, 1.0 - std::norm(out.mean));
    return out;
}

/// Entry of C = S o (F X): a point mass at 0 when s = 0, otherwise the
/// product of the inner Gaussian CN(r_c, v_rc) and the outer one CN(xi, v_xi).
inline ScalarPosterior denoise_c(Complex r_c, double v_rc, Complex xi, double v_xi, bool s,
                                 double floor = kVarianceFloor) {
    ScalarPosterior out;
    if (!s) return out;
    if (!(v_rc > 0.0)) {
        v_rc = floor;
        out.floored = true;
    }
    if (!(v_xi > 0.0)) {
        v_xi = floor;
        out.floored = true;
    }
    const double denom = v_rc + v_xi;
    out.var = v_rc * v_xi / denom;
    out.mean = (v_xi * r_c + v_rc * xi) / denom;
    return out;
}

enum class XPriorKind { qpsk, gaussian, pilot };

struct XPrior {
    XPriorKind kind = XPriorKind::qpsk;
    double variance = 1.0;   // gaussian kind only
    Complex pilot{};         // pilot kind only
};

/// Fuses the outer message CN(r_x, v_rx) with the inner message CN(gamma, v_gx)
/// and applies the symbol prior. An infinite variance marks an absent message.
inline ScalarPosterior denoise_x(Complex r_x, double v_rx, Complex gamma, double v_gx, const XPrior& prior) {
    if (prior.kind == XPriorKind::pilot) return {prior.pilot, 0.0, false};
    const double prec_r = std::isinf(v_rx) ? 0.0 : 1.0 / v_rx;
    const double prec_g = std::isinf(v_gx) ? 0.0 : 1.0 / v_gx;
    const double prec = prec_r + prec_g;
    if (!(prec > 0.0)) {
        if (prior.kind == XPriorKind::qpsk) return {Complex{}, 1.0, false};
        return {Complex{}, prior.variance, false};
    }
    const double v = 1.0 / prec;
    const Complex r = (prec_r * r_x + prec_g * gamma) * v;
    if (prior.kind == XPriorKind::qpsk) {
        const auto post = denoise_qpsk(r, v);
        return {post.mean, post.var, false};
    }
    return denoise_gaussian(r, v, prior.variance);
}

}  // namespace triamp
