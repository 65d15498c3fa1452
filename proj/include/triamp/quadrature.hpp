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

#include <Eigen/Eigenvalues>

#include <cmath>
#include <mutex>
#include <map>
#include <numbers>
#include <stdexcept>

namespace triamp {

/// Nodes and weights for E[f(Z)], Z ~ N(0, 1): sum_i w_i f(x_i). The weights sum to one.
struct GaussHermiteRule {
    RVector nodes;
    RVector weights;
};

/// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
inline GaussHermiteRule make_gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
    RMatrix J = RMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(J);
    GaussHermiteRule rule{eig.eigenvalues(), eig.eigenvectors().row(0).transpose().cwiseAbs2()};
    rule.weights /= rule.weights.sum();
    return rule;
}

/// Cached rule; safe to call from several threads.
inline const GaussHermiteRule& gauss_hermite(int n) {
    static std::mutex mu;
    static std::map<int, GaussHermiteRule> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_hermite(n)).first;
    return it->second;
}

/// Standard normal tail probability.
inline double qfunc(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace triamp
