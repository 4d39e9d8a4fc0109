#include "krclust/datagen.hpp"

#include <cmath>

#include "krclust/random.hpp"

namespace krclust {

Dataset gen_blobs(const BlobSpec& spec) {
    if (spec.n == 0 || spec.m == 0 || spec.k == 0) throw ConfigError("blobs need n, m, k >= 1");
    if (spec.k > spec.n) throw ConfigError("blobs need k <= n");
    if (!(spec.cluster_std >= 0.0)) throw ConfigError("cluster_std must be non-negative");
    if (!(spec.center_min < spec.center_max)) throw ConfigError("center box must be a non-empty interval");

    Rng rng(derive_seed(spec.seed, 0));
    Matrix centers(spec.k, spec.m);
    for (double& v : centers.values()) v = uniform_real(rng, spec.center_min, spec.center_max);

    Matrix points(spec.n, spec.m);
    std::vector<std::int64_t> labels;
    labels.reserve(spec.n);
    std::size_t row = 0;
    for (std::size_t c = 0; c < spec.k; ++c) {
        const std::size_t count = spec.n / spec.k + (c < spec.n % spec.k ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i, ++row) {
            for (std::size_t d = 0; d < spec.m; ++d)
                points(row, d) = centers(c, d) + spec.cluster_std * standard_normal(rng);
            labels.push_back(static_cast<std::int64_t>(c));
        }
    }
    return Dataset(std::move(points), std::move(labels));
}

KrStructured gen_kr_structured(const KrStructSpec& spec) {
    if (spec.cardinalities.empty() || spec.m == 0 || spec.points_per_cluster == 0)
        throw ConfigError("KR-structured data needs p >= 1, m >= 1 and points_per_cluster >= 1");
    if (!(spec.noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
    if (spec.aggregator == Aggregator::Product && spec.sampler != ProtoSampler::UniformPositive)
        throw ConfigError("the product aggregator requires the uniform-positive protocentroid sampler");

    Rng rng(derive_seed(spec.seed, 0));
    std::vector<Matrix> sets;
    for (auto h : spec.cardinalities) {
        if (h == 0) throw ConfigError("cardinalities must be >= 1");
        Matrix set(h, spec.m);
        for (double& v : set.values())
            v = spec.sampler == ProtoSampler::StandardNormal ? standard_normal(rng) : uniform_real(rng, 0.5, 2.0);
        sets.push_back(std::move(set));
    }
    ProtoSets ps(std::move(sets), spec.aggregator);
    const Matrix centroids = materialize_centroids(ps);

    Matrix points(centroids.rows() * spec.points_per_cluster, spec.m);
    std::vector<std::int64_t> labels;
    labels.reserve(points.rows());
    std::size_t row = 0;
    for (std::size_t c = 0; c < centroids.rows(); ++c)
        for (std::size_t i = 0; i < spec.points_per_cluster; ++i, ++row) {
            for (std::size_t d = 0; d < spec.m; ++d)
                points(row, d) = centroids(c, d) + (spec.noise_std > 0.0 ? spec.noise_std * standard_normal(rng) : 0.0);
            labels.push_back(static_cast<std::int64_t>(c));
        }
    return KrStructured{Dataset(std::move(points), std::move(labels)), std::move(ps)};
}

Dataset standardize(const Dataset& data) {
    const std::size_t n = data.size();
    const std::size_t m = data.dim();
    Matrix out = data.points();
    for (std::size_t d = 0; d < m; ++d) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += out(i, d);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (out(i, d) - mean) * (out(i, d) - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) out(i, d) = sd > 0.0 ? (out(i, d) - mean) / sd : out(i, d) - mean;
    }
    return Dataset(std::move(out), data.labels());
}

}  // namespace krclust
