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

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace triamp {

/// Invalid configuration values or malformed config files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Constellation { qpsk, gaussian };

inline std::string_view to_string(Constellation c) {
    return c == Constellation::qpsk ? "qpsk" : "gaussian";
}

inline Constellation parse_constellation(std::string_view s) {
    if (s == "qpsk" || s == "QPSK") return Constellation::qpsk;
    if (s == "gaussian" || s == "Gaussian") return Constellation::gaussian;
    throw ConfigError("unknown constellation '" + std::string(s) + "' (expected qpsk or gaussian)");
}

/// Dimensions, pilot split, mask density, priors and noise of one RIS-aided uplink.
///
/// M BS antennas, N RIS elements, K single-antenna users, frames of T symbols of
/// which the first T_p are pilots. Channel entries are zero-mean complex Gaussian
/// with variances q_g, q_f, q_h; data symbols have unit power.
struct SystemConfig {
    int M = 64;
    int N = 32;
    int K = 8;
    int T = 100;
    int T_p = 24;
    double rho = 0.3;
    double sigma2 = 0.0;
    double q_g = 1.0;
    double q_f = 1.0;
    double q_h = 1.0;
    Constellation constellation = Constellation::qpsk;
    SeedSet seeds = SeedSet::derive(0);

    int T_d() const { return T - T_p; }

    void validate() const {
        if (M < 1 || N < 1 || K < 1 || T < 1) {
            throw ConfigError("dimensions M, N, K, T must all be >= 1");
        }
        if (T_p < 0 || T_p > T) {
            throw ConfigError("T_p must lie in [0, T]; got T_p=" + std::to_string(T_p) +
                              " T=" + std::to_string(T));
        }
        if (!(rho >= 0.0 && rho <= 1.0)) {
            throw ConfigError("rho must lie in [0, 1]");
        }
        if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
            throw ConfigError("sigma2 must be finite and >= 0");
        }
        if (!(q_g >= 0.0 && q_f >= 0.0 && q_h >= 0.0)) {
            throw ConfigError("prior variances q_g, q_f, q_h must be >= 0");
        }
    }

    bool operator==(const SystemConfig&) const = default;
};

/// Noise variance giving the requested average receive SNR:
/// sigma2 = (rho N K q_g q_f + K q_h) / 10^(snr/10), unit data power.
inline double sigma_from_snr(const SystemConfig& cfg, double snr_db) {
    const double signal = cfg.rho * cfg.N * cfg.K * cfg.q_g * cfg.q_f + cfg.K * cfg.q_h;
    return signal / from_db(snr_db);
}

inline double snr_from_sigma(const SystemConfig& cfg, double sigma2) {
    const double signal = cfg.rho * cfg.N * cfg.K * cfg.q_g * cfg.q_f + cfg.K * cfg.q_h;
    return to_db(signal / sigma2);
}

}  // namespace triamp
