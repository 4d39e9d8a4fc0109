#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "krclust/krkmeans.hpp"

namespace krclust {

struct LloydConfig {
    std::size_t k = 1;
    std::size_t max_iter = 200;
    double tol = 1e-4;
    std::size_t n_restarts = 20;
    std::uint64_t seed = 0;
    InitMethod init = InitMethod::Random;
    std::size_t threads = 1;

    void validate() const;
};

struct LloydResult {
    Matrix centroids;
    Assignment assignment;
    double inertia = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restart_index = 0;
    std::vector<double> inertia_trace;
};

/// Seeds for a single Lloyd run (uniform sample or D² seeding).
Matrix lloyd_init(const Dataset& data, const LloydConfig& cfg, Rng& rng);

/// One Lloyd iteration: assign, recompute means, reseed empty clusters.
struct LloydStep {
    Matrix centroids;
    Assignment assignment;
    std::vector<double> min_sq_dist;
    double movement = 0.0;
};
LloydStep lloyd_step(const Dataset& data, const Matrix& centroids, Rng& rng);

LloydResult lloyd_fit_from(const Dataset& data, Matrix start, const LloydConfig& cfg, Rng& rng);

/// Best-of-n_restarts Lloyd k-Means. Restart r uses the same seed stream as
/// restart r of krclust::fit, so p = 1 Khatri-Rao fits replay it exactly.
LloydResult lloyd_fit(const Dataset& data, const LloydConfig& cfg);

struct NaiveConfig {
    std::vector<std::size_t> cardinalities;  // exactly two sets
    Aggregator aggregator = Aggregator::Sum;
    std::size_t descent_max_iter = 5000;
    double descent_tol = 1e-4;
    LloydConfig inner;  // k is overridden with h_1 * h_2

    void validate() const;
};

struct Decomposition {
    ProtoSets protosets;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Residual after each half-update (set 1, then set 2, ...).
    std::vector<double> residual_trace;
};

/// Σ_{i,j} ‖µ_{i,j} − m_1^i ⊕ m_2^j‖² over the flat-ordered centroid rows.
double decomposition_residual(const Matrix& centroids, const ProtoSets& ps);

/// Alternating least-squares fit of two protocentroid sets to h_1·h_2 given
/// centroids (row i·h_2 + j is µ_{i,j}). Set 1 starts at µ_{i,1}, set 2 at
/// the aggregator's neutral element.
Decomposition naive_decompose(const Matrix& centroids, std::span<const std::size_t> cardinalities, Aggregator agg,
                              const NaiveConfig& cfg);

/// Same, from an explicit starting point.
Decomposition naive_decompose_from(const Matrix& centroids, ProtoSets start, const NaiveConfig& cfg);

/// Lloyd with h_1·h_2 clusters, decompose the centroids, reassign.
FitResult naive_fit(const Dataset& data, const NaiveConfig& cfg);

}  // namespace krclust
