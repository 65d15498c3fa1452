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

// Counter-based random numbers. Every (master seed, purpose, point, trial)
// tuple maps to its own Philox4x32-10 stream, so a trial's draws do not
// depend on which worker ran it or in what order.

#include "triamp/linalg.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace triamp {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    Philox4x32() = default;

    /// `seed` keys the generator; `stream` selects an independent counter range.
    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    result_type operator()() {
        if (lane_ == 4) {
            refill();
        }
        return buffer_[lane_++];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
    }

    /// Standard real normal by Box-Muller; the paired value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Circularly-symmetric complex normal with E|z|^2 = variance.
    Complex complex_normal(double variance = 1.0) {
        const double scale = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {scale * re, scale * im};
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// One Philox block for an explicit counter; exposed for known-answer tests.
    static Block block(Block counter, Key key) {
        constexpr std::uint32_t kMul0 = 0xD2511F53u;
        constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
        constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return counter;
    }

private:
    void refill() {
        const Block ctr{static_cast<std::uint32_t>(position_), static_cast<std::uint32_t>(position_ >> 32),
                        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = block(ctr, key_);
        ++position_;
        lane_ = 0;
    }

    Key key_{0, 0};
    std::uint64_t stream_ = 0;
    std::uint64_t position_ = 0;
    Block buffer_{};
    int lane_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Named purposes; each draws from a disjoint stream.
enum class StreamTag : std::uint64_t { channels = 1, data = 2, mask = 3, noise = 4, init = 5 };

/// Per-purpose stream identifiers for one realization.
struct SeedSet {
    std::uint64_t channels = 0;
    std::uint64_t data = 0;
    std::uint64_t mask = 0;
    std::uint64_t noise = 0;
    std::uint64_t init = 0;

    /// Streams for trial `trial` of grid point `point` under `master`.
    static SeedSet derive(std::uint64_t master, std::uint64_t point = 0, std::uint64_t trial = 0) {
        const std::uint64_t base = splitmix64(splitmix64(master ^ splitmix64(point)) ^ splitmix64(~trial));
        auto tagged = [base](StreamTag t) { return splitmix64(base + static_cast<std::uint64_t>(t)); };
        return {tagged(StreamTag::channels), tagged(StreamTag::data), tagged(StreamTag::mask),
                tagged(StreamTag::noise), tagged(StreamTag::init)};
    }

    bool operator==(const SeedSet&) const = default;
};

inline Philox4x32 make_rng(std::uint64_t stream_seed) {
    return Philox4x32(stream_seed, splitmix64(stream_seed ^ 0x5851F42D4C957F2Dull));
}

}  // namespace triamp
