#include "krclust/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <optional>
#include <thread>

#include "detail/accumulate.hpp"

namespace krclust {

void LloydConfig::validate() const {
    if (k == 0) throw ConfigError("k must be >= 1");
    if (max_iter == 0) throw ConfigError("max_iter must be >= 1");
    if (n_restarts == 0) throw ConfigError("n_restarts must be >= 1");
    if (!(tol >= 0.0)) throw ConfigError("tol must be non-negative");
}

Matrix lloyd_init(const Dataset& data, const LloydConfig& cfg, Rng& rng) {
    if (cfg.k > data.size())
        throw InsufficientDataError("k = " + std::to_string(cfg.k) + " exceeds the number of points " +
                                    std::to_string(data.size()));
    const auto picks = cfg.init == InitMethod::Random ? sample_without_replacement(rng, data.size(), cfg.k)
                                                      : d2_sample(data.points(), cfg.k, rng);
    Matrix centroids(cfg.k, data.dim());
    for (std::size_t c = 0; c < cfg.k; ++c) centroids.set_row(c, data.point(picks[c]));
    return centroids;
}

LloydStep lloyd_step(const Dataset& data, const Matrix& centroids, Rng& rng) {
    const std::size_t n = data.size();
    const std::size_t m = data.dim();
    const std::size_t k = centroids.rows();
    if (centroids.cols() != m) throw DimensionError("centroid dimension does not match data");

    std::vector<std::size_t> labels(n, 0);
    std::vector<double> dmin(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.point(i);
        for (std::size_t c = 0; c < k; ++c) {
            const double d = squared_distance(x, centroids.row(c));
            if (d < dmin[i]) {
                dmin[i] = d;
                labels[i] = c;
            }
        }
    }
    Assignment asg(std::move(labels), k);

    std::vector<detail::CompensatedSum> sums(k * m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.point(i);
        const std::size_t c = asg.cells[i];
        for (std::size_t d = 0; d < m; ++d) sums[c * m + d].add(x[d]);
    }
    Matrix next = centroids;
    for (std::size_t c = 0; c < k; ++c) {
        if (asg.counts[c] == 0) continue;
        const double count = static_cast<double>(asg.counts[c]);
        for (std::size_t d = 0; d < m; ++d) next(c, d) = sums[c * m + d].value() / count;
    }
    for (std::size_t c = 0; c < k; ++c)
        if (asg.counts[c] == 0) next.set_row(c, data.point(uniform_index(rng, n)));

    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) movement += squared_distance(centroids.row(c), next.row(c));
    return LloydStep{std::move(next), std::move(asg), std::move(dmin), movement};
}

LloydResult lloyd_fit_from(const Dataset& data, Matrix start, const LloydConfig& cfg, Rng& rng) {
    Matrix centroids = std::move(start);
    LloydResult out;
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        auto s = lloyd_step(data, centroids, rng);
        double inertia = 0.0;
        for (double d : s.min_sq_dist) inertia += d;
        out.inertia_trace.push_back(inertia);
        centroids = std::move(s.centroids);
        out.iterations = it;
        if (s.movement < cfg.tol) {
            out.converged = true;
            break;
        }
    }
    // Final assignment against the last centroids.
    Rng scratch(0);
    auto last = lloyd_step(data, centroids, scratch);
    out.inertia = 0.0;
    for (double d : last.min_sq_dist) out.inertia += d;
    out.inertia_trace.push_back(out.inertia);
    out.assignment = std::move(last.assignment);
    out.centroids = std::move(centroids);
    return out;
}

LloydResult lloyd_fit(const Dataset& data, const LloydConfig& cfg) {
    cfg.validate();
    if (cfg.k > data.size())
        throw InsufficientDataError("k = " + std::to_string(cfg.k) + " exceeds the number of points " +
                                    std::to_string(data.size()));
    const std::size_t restarts = cfg.n_restarts;
    std::vector<std::optional<LloydResult>> results(restarts);
    std::vector<std::exception_ptr> errors(restarts);
    auto run_one = [&](std::size_t r) {
        try {
            Rng rng(derive_seed(cfg.seed, r));
            auto start = lloyd_init(data, cfg, rng);
            results[r] = lloyd_fit_from(data, std::move(start), cfg, rng);
            results[r]->restart_index = r;
        } catch (...) {
            errors[r] = std::current_exception();
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, restarts);
    if (workers == 1) {
        for (std::size_t r = 0; r < restarts; ++r) run_one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < restarts; r = next++) run_one(r);
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (results[r]->inertia < results[best]->inertia) best = r;
    return std::move(*results[best]);
}

void NaiveConfig::validate() const {
    if (cardinalities.size() != 2) throw ConfigError("the naive approach decomposes into exactly two sets");
    if (cardinalities[0] == 0 || cardinalities[1] == 0) throw ConfigError("cardinalities must be >= 1");
    if (descent_max_iter == 0) throw ConfigError("descent_max_iter must be >= 1");
    if (!(descent_tol >= 0.0)) throw ConfigError("descent_tol must be non-negative");
}

double decomposition_residual(const Matrix& centroids, const ProtoSets& ps) {
    if (centroids.rows() != ps.num_cells() || centroids.cols() != ps.dim())
        throw DimensionError("centroid matrix does not match the protocentroid cell space");
    std::vector<double> mu(ps.dim());
    double total = 0.0;
    CellCursor cursor(ps.cardinalities());
    std::size_t flat = 0;
    do {
        ps.centroid(cursor.tuple(), mu);
        total += squared_distance(centroids.row(flat++), mu);
    } while (cursor.next());
    return total;
}

namespace {

// Exact least-squares solve for one set with the other held fixed.
void half_update(const Matrix& mu, Aggregator agg, const Matrix& fixed, Matrix& target, bool target_is_first) {
    const std::size_t m = mu.cols();
    const std::size_t h2 = target_is_first ? fixed.rows() : target.rows();
    for (std::size_t a = 0; a < target.rows(); ++a) {
        for (std::size_t c = 0; c < m; ++c) {
            detail::CompensatedSum num, den;
            for (std::size_t b = 0; b < fixed.rows(); ++b) {
                const std::size_t row = target_is_first ? a * h2 + b : b * h2 + a;
                const double other = fixed(b, c);
                if (agg == Aggregator::Sum) {
                    num.add(mu(row, c) - other);
                    den.add(1.0);
                } else {
                    num.add(mu(row, c) * other);
                    den.add(other * other);
                }
            }
            if (den.value() < 1e-12) continue;
            target(a, c) = num.value() / den.value();
        }
    }
}

}  // namespace

Decomposition naive_decompose_from(const Matrix& centroids, ProtoSets start, const NaiveConfig& cfg) {
    if (start.num_sets() != 2) throw ConfigError("the naive approach decomposes into exactly two sets");
    const Aggregator agg = start.aggregator();
    Matrix first = start.set(0);
    Matrix second = start.set(1);
    if (centroids.rows() != first.rows() * second.rows())
        throw DimensionError("expected " + std::to_string(first.rows() * second.rows()) + " centroids, got " +
                             std::to_string(centroids.rows()));

    Decomposition out{std::move(start), 0.0, 0, false, {}};
    for (std::size_t it = 1; it <= cfg.descent_max_iter; ++it) {
        half_update(centroids, agg, second, first, true);
        out.residual_trace.push_back(decomposition_residual(centroids, ProtoSets({first, second}, agg)));
        half_update(centroids, agg, first, second, false);
        out.protosets = ProtoSets({first, second}, agg);
        out.residual = decomposition_residual(centroids, out.protosets);
        out.residual_trace.push_back(out.residual);
        out.iterations = it;
        if (out.residual < cfg.descent_tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

Decomposition naive_decompose(const Matrix& centroids, std::span<const std::size_t> cardinalities, Aggregator agg,
                              const NaiveConfig& cfg) {
    if (cardinalities.size() != 2) throw ConfigError("the naive approach decomposes into exactly two sets");
    const std::size_t h1 = cardinalities[0];
    const std::size_t h2 = cardinalities[1];
    if (h1 == 0 || h2 == 0) throw ConfigError("cardinalities must be >= 1");
    if (centroids.rows() != h1 * h2)
        throw DimensionError("expected " + std::to_string(h1 * h2) + " centroids, got " +
                             std::to_string(centroids.rows()));
    const std::size_t m = centroids.cols();
    Matrix first(h1, m);
    for (std::size_t i = 0; i < h1; ++i) first.set_row(i, centroids.row(i * h2));
    Matrix second(h2, m, neutral_element(agg));
    return naive_decompose_from(centroids, ProtoSets({std::move(first), std::move(second)}, agg), cfg);
}

FitResult naive_fit(const Dataset& data, const NaiveConfig& cfg) {
    cfg.validate();
    LloydConfig inner = cfg.inner;
    inner.k = cfg.cardinalities[0] * cfg.cardinalities[1];
    const auto clustered = lloyd_fit(data, inner);
    auto decomposition = naive_decompose(clustered.centroids, cfg.cardinalities, cfg.aggregator, cfg);
    auto assigned = assign(data, decomposition.protosets);
    const double inertia = assigned.inertia();
    return FitResult{std::move(decomposition.protosets),
                     std::move(assigned.assignment),
                     inertia,
                     decomposition.iterations,
                     decomposition.converged,
                     clustered.restart_index,
                     {clustered.inertia, inertia}};
}

}  // namespace krclust
