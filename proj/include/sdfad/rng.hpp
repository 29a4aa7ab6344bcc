// Copyright Contributors to the sdfad Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

#include "sdfad/vec3.hpp"

namespace sdfad {

/// Counter-based pseudo-random generator (SplitMix64). The state is a plain
/// 64-bit counter advanced by the golden-ratio increment; every output is a
/// pure function of (key, draw index), so sequences can be reproduced from
/// the seed alone and independent streams are derived by key mixing rather
/// than by jumping. Not cryptographic.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    /// Derive the generator for a named stream of `seed`. Streams with
    /// different ids produce statistically independent sequences.
    SplitMix64(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(seed + kGamma * (stream + 1))) {}

    /// Child generator for stream id `stream`, independent of this one.
    SplitMix64 split(std::uint64_t stream) const {
        return SplitMix64(mix(state_ + kGamma * (stream + 1)), 0x5d3fad);
    }

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Unbiased integer in [0, n) via 128-bit multiply rejection.
    std::uint64_t next_below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller; the paired value is cached, so a
    /// stream yields one normal per call but two per pair of uniform draws.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_double(); // (0, 1], keeps log finite
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * kPi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    Vec3 next_normal_vec3() {
        const double a = next_normal();
        const double b = next_normal();
        const double c = next_normal();
        return {a, b, c};
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sdfad
