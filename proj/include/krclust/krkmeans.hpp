#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "krclust/core.hpp"
#include "krclust/random.hpp"

namespace krclust {

enum class InitMethod { Random, PlusPlus };

/// MemoryEfficient computes each centroid on the fly from the protocentroids;
/// TimeEfficient materializes all ∏ h_q centroids once per assignment pass.
/// Both produce bit-identical results.
enum class StorageMode { MemoryEfficient, TimeEfficient };

std::string_view to_string(InitMethod init) noexcept;
std::string_view to_string(StorageMode mode) noexcept;

struct FitConfig {
    std::vector<std::size_t> cardinalities;
    Aggregator aggregator = Aggregator::Sum;
    std::size_t max_iter = 200;
    double tol = 1e-4;
    std::size_t n_restarts = 20;
    std::uint64_t seed = 0;
    InitMethod init = InitMethod::Random;
    StorageMode storage = StorageMode::MemoryEfficient;
    /// Restarts run on up to this many threads. Each restart owns its RNG
    /// stream, so the result does not depend on the thread count.
    std::size_t threads = 1;

    /// Throws ConfigError on p = 0, any h_q = 0, max_iter = 0 or n_restarts = 0.
    void validate() const;
};

struct FitResult {
    ProtoSets protosets;
    Assignment assignment;
    double inertia = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restart_index = 0;
    /// Inertia after every assignment pass of the winning restart, ending
    /// with the final assignment.
    std::vector<double> inertia_trace;
};

/// Counters exposed for the complexity and storage checks.
struct AssignStats {
    std::size_t distance_evaluations = 0;
    /// Scalars held for protocentroids plus any centroid buffers.
    std::size_t centroid_scalars = 0;
};

struct AssignResult {
    Assignment assignment;
    std::vector<double> min_sq_dist;
    AssignStats stats;

    double inertia() const;
};

ProtoSets init_random(const Dataset& data, const FitConfig& cfg, Rng& rng);
ProtoSets init_plus_plus(const Dataset& data, const FitConfig& cfg, Rng& rng);
ProtoSets initialize(const Dataset& data, const FitConfig& cfg, Rng& rng);

/// Nearest materialized centroid for every point; ties go to the lowest flat index.
AssignResult assign(const Dataset& data, const ProtoSets& ps, StorageMode mode = StorageMode::MemoryEfficient);

struct UpdateResult {
    ProtoSets protosets;
    /// (set, index) of protocentroids with no points in any incident cell.
    std::vector<std::pair<std::size_t, std::size_t>> empty;
};

/// Closed-form least-squares update of every protocentroid, set by set, each
/// set seeing the already-updated values of earlier sets.
UpdateResult update_protosets(const Dataset& data, const Assignment& asg, const ProtoSets& ps);

/// Replaces each protocentroid whose incident cells are all empty by a
/// uniformly drawn data point. Others are left untouched.
ProtoSets handle_empty(ProtoSets ps, const Assignment& asg, const Dataset& data, Rng& rng);

/// Σ over cells of the squared distance between old and new centroids.
double centroid_movement(const ProtoSets& before, const ProtoSets& after);

/// One assign → update → empty-handling pass.
struct StepResult {
    ProtoSets protosets;
    AssignResult assigned;
    double movement = 0.0;
};
StepResult step(const Dataset& data, const ProtoSets& ps, StorageMode mode, Rng& rng);

/// Best-of-n_restarts Khatri-Rao k-Means.
FitResult fit(const Dataset& data, const FitConfig& cfg);

/// Runs a single restart from a given starting point (used by fit and by
/// tests that replay trajectories).
FitResult fit_from(const Dataset& data, ProtoSets start, const FitConfig& cfg, Rng& rng);

}  // namespace krclust
