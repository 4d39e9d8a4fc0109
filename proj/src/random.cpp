#include "krclust/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "krclust/error.hpp"

namespace krclust {

std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw DomainError("uniform_index over an empty range");
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return static_cast<std::size_t>(draw % bound);
}

double standard_normal(Rng& rng) {
    double u1;
    do {
        u1 = uniform01(rng);
    } while (u1 <= 0.0);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
    if (k > n) throw InsufficientDataError("cannot sample " + std::to_string(k) + " distinct points from " + std::to_string(n));
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(rng, n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

std::vector<std::size_t> d2_sample(const Matrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows();
    if (k > n) throw InsufficientDataError("cannot seed " + std::to_string(k) + " points from " + std::to_string(n));
    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    if (k == 0) return chosen;

    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<bool> taken(n, false);
    auto take = [&](std::size_t idx) {
        chosen.push_back(idx);
        taken[idx] = true;
        for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], squared_distance(points.row(i), points.row(idx)));
    };

    take(uniform_index(rng, n));
    while (chosen.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!taken[i]) total += dist[i];
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            std::size_t pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i] || dist[i] <= 0.0) continue;
                acc += dist[i];
                pick = i;
                if (acc > target) break;
            }
            take(pick);
        } else {
            std::size_t skip = uniform_index(rng, n - chosen.size());
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                if (skip-- == 0) {
                    take(i);
                    break;
                }
            }
        }
    }
    return chosen;
}

}  // namespace krclust
