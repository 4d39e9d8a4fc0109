#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "krclust/core.hpp"

namespace krclust {

struct BlobSpec {
    std::size_t n = 100;
    std::size_t m = 2;
    std::size_t k = 3;
    double cluster_std = 1.0;
    double center_min = -10.0;
    double center_max = 10.0;
    std::uint64_t seed = 0;
};

/// Isotropic Gaussian blobs. Points are emitted cluster by cluster; cluster
/// c receives n/k points, plus one more for the first n mod k clusters.
Dataset gen_blobs(const BlobSpec& spec);

enum class ProtoSampler { StandardNormal, UniformPositive };

struct KrStructSpec {
    std::vector<std::size_t> cardinalities{3, 3};
    Aggregator aggregator = Aggregator::Sum;
    std::size_t m = 2;
    std::size_t points_per_cluster = 100;
    double noise_std = 0.0;
    ProtoSampler sampler = ProtoSampler::StandardNormal;
    std::uint64_t seed = 0;
};

struct KrStructured {
    Dataset data;
    ProtoSets protosets;
};

/// Points scattered around the ∏ h_q centroids of random protocentroids.
/// Labels are flat cell indices. Product requires the UniformPositive sampler
/// (entries in [0.5, 2]).
KrStructured gen_kr_structured(const KrStructSpec& spec);

/// Per-feature z-scoring; zero-variance features are only centered.
Dataset standardize(const Dataset& data);

}  // namespace krclust
