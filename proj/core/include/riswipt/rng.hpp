#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace riswipt {

/// splitmix64 step; used both as a seed scrambler and to derive sub-streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Trial seed for sweep point `point` / repetition `trial` under `base`.
/// Documented mix so sweeps can be sharded: two splitmix64 rounds over the
/// indices keep distinct (point, trial) pairs decorrelated.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t point, std::uint64_t trial) {
    std::uint64_t x = splitmix64(base ^ (0x9e3779b97f4a7c15ULL * (point + 1)));
    return splitmix64(x ^ (0xbf58476d1ce4e5b9ULL * (trial + 1)));
}

/// Named sub-stream of a trial seed (channel draws, per-slot phase inits, ...).
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ (0xd1342543de82ef95ULL * (tag + 1)));
}

/// Deterministic random source. mt19937_64 output is pinned by the standard;
/// uniforms and normals are derived with explicit arithmetic (no
/// std::*_distribution) so streams are reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Circularly-symmetric complex normal, E|z|^2 = 1.
    std::complex<double> cnormal() {
        const double s = 1.0 / std::sqrt(2.0);
        return {s * normal(), s * normal()};
    }

    /// Unit-modulus complex number with phase uniform on [0, 2*pi).
    std::complex<double> unit_phase() {
        const double theta = 2.0 * M_PI * uniform();
        return {std::cos(theta), std::sin(theta)};
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace riswipt
