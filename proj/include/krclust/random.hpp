#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "krclust/matrix.hpp"

namespace krclust {

/// Engine used for every stochastic step. The helpers below avoid the
/// implementation-defined std distributions so results match across
/// standard libraries.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream seed for sub-run `index` (restart, client, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [0, n), unbiased by rejection.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Standard normal via Box-Muller (one variate per call).
double standard_normal(Rng& rng);

/// k distinct indices from [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

/// k-means++ style D² seeding over the rows of `points`: the first index is
/// uniform, each later one is drawn with probability proportional to its
/// squared distance to the nearest index chosen so far. When every remaining
/// distance is zero, an unchosen index is drawn uniformly.
std::vector<std::size_t> d2_sample(const Matrix& points, std::size_t k, Rng& rng);

}  // namespace krclust
