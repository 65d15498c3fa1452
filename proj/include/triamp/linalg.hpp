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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace triamp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Raised when matrix operands disagree in shape.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require_shape(const auto& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()));
    }
}

/// Entrywise |a|^2 as a real matrix.
inline RMatrix abs2(const CMatrix& a) { return a.cwiseAbs2(); }

inline double to_db(double linear) {
    return linear > 0.0 ? 10.0 * std::log10(linear) : -std::numeric_limits<double>::infinity();
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

}  // namespace triamp
