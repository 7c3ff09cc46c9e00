#ifndef AAE_RNG_HPP
#define AAE_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace aae {

using Rng = std::mt19937_64;

// splitmix64 step, used to derive independent streams from a base seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return mix_seed(base ^ mix_seed(salt));
}

// Uniform double in [0, 1) with 53 random bits.  Hand-rolled instead of
// std::uniform_real_distribution so the sampling sequence is pinned down by
// the engine alone.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Marsaglia polar method; deterministic given the engine state.
inline double standard_normal(Rng& rng) {
    for (;;) {
        double u = 2.0 * uniform01(rng) - 1.0;
        double v = 2.0 * uniform01(rng) - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

inline std::complex<double> standard_normal_complex(Rng& rng) {
    double re = standard_normal(rng);
    double im = standard_normal(rng);
    return {re, im};
}

}  // namespace aae

#endif
