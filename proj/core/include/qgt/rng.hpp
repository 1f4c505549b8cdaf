#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qgt {

// Uniform double in [0, 1) with 53 random bits. std::uniform_real_distribution
// is implementation-defined, so draws go through this instead to keep streams
// identical across standard libraries.
inline double uniform_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Modulo bias is rejected away.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Standard normal via Box-Muller on uniform_double draws (two per call pair).
inline double normal_double(std::mt19937_64& rng) {
    double u1 = uniform_double(rng);
    double u2 = uniform_double(rng);
    if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Derives an independent child seed from a master seed and a stream label.
// Used to split one experiment seed into per-cell streams that stay stable
// no matter which order the cells execute in.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    return detail::splitmix64(master ^ detail::splitmix64(stream + 0x517cc1b727220a95ULL));
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(master, a), b);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    return mix_seed(mix_seed(master, a, b), c);
}

// Fisher-Yates shuffle with explicit draws (std::shuffle is not
// reproducible across standard libraries).
template <typename Vec>
void shuffle_indices(Vec& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace qgt
