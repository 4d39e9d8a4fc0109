#include "krclust/krkmeans.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "detail/accumulate.hpp"

namespace krclust {

namespace {

constexpr double kDenominatorFloor = 1e-12;
constexpr double kInitDivisorFloor = 1e-9;
constexpr double kInitJitter = 1e-6;

std::size_t required_plus_plus_seeds(std::span<const std::size_t> h) {
    std::size_t s = 1;
    for (auto hq : h) s += hq - 1;
    return s;
}

void check_dims(const Dataset& data, const ProtoSets& ps) {
    if (data.dim() != ps.dim())
        throw DimensionError("data dimension " + std::to_string(data.dim()) + " does not match protocentroid dimension " +
                             std::to_string(ps.dim()));
}

// Per-point protocentroid tuples, decoded once per update.
std::vector<std::size_t> point_tuples(const Assignment& asg, std::span<const std::size_t> h) {
    const std::size_t p = h.size();
    std::vector<std::size_t> tuples(asg.cells.size() * p);
    for (std::size_t i = 0; i < asg.cells.size(); ++i) {
        std::size_t flat = asg.cells[i];
        for (std::size_t q = p; q-- > 0;) {
            tuples[i * p + q] = flat % h[q];
            flat /= h[q];
        }
    }
    return tuples;
}

// Number of points whose cell uses protocentroid j of set q, for every (q, j).
std::vector<std::vector<std::size_t>> incident_counts(const Assignment& asg, std::span<const std::size_t> h) {
    std::vector<std::vector<std::size_t>> out(h.size());
    for (std::size_t q = 0; q < h.size(); ++q) out[q].assign(h[q], 0);
    CellCursor cursor(h);
    std::size_t flat = 0;
    do {
        const auto c = asg.counts[flat++];
        if (c == 0) continue;
        for (std::size_t q = 0; q < h.size(); ++q) out[q][cursor.tuple()[q]] += c;
    } while (cursor.next());
    return out;
}

}  // namespace

std::string_view to_string(InitMethod init) noexcept {
    return init == InitMethod::Random ? "random" : "plusplus";
}

std::string_view to_string(StorageMode mode) noexcept {
    return mode == StorageMode::MemoryEfficient ? "mem" : "time";
}

void FitConfig::validate() const {
    if (cardinalities.empty()) throw ConfigError("at least one protocentroid set is required");
    for (auto h : cardinalities)
        if (h == 0) throw ConfigError("protocentroid set cardinalities must be >= 1");
    cell_count(cardinalities);
    if (max_iter == 0) throw ConfigError("max_iter must be >= 1");
    if (n_restarts == 0) throw ConfigError("n_restarts must be >= 1");
    if (!(tol >= 0.0)) throw ConfigError("tol must be non-negative");
}

double AssignResult::inertia() const {
    double total = 0.0;
    for (double d : min_sq_dist) total += d;
    return total;
}

ProtoSets init_random(const Dataset& data, const FitConfig& cfg, Rng& rng) {
    std::vector<Matrix> sets;
    sets.reserve(cfg.cardinalities.size());
    for (auto h : cfg.cardinalities) {
        if (h > data.size())
            throw InsufficientDataError("need at least " + std::to_string(h) + " points to initialize a set, have " +
                                        std::to_string(data.size()));
        Matrix set(h, data.dim());
        const auto picks = sample_without_replacement(rng, data.size(), h);
        for (std::size_t j = 0; j < h; ++j) set.set_row(j, data.point(picks[j]));
        sets.push_back(std::move(set));
    }
    return ProtoSets(std::move(sets), cfg.aggregator);
}

ProtoSets init_plus_plus(const Dataset& data, const FitConfig& cfg, Rng& rng) {
    const auto& h = cfg.cardinalities;
    const std::size_t m = data.dim();
    const std::size_t needed = required_plus_plus_seeds(h);
    if (needed > data.size())
        throw InsufficientDataError("k-means++ style initialization needs " + std::to_string(needed) + " points, have " +
                                    std::to_string(data.size()));
    const auto seeds = d2_sample(data.points(), needed, rng);
    const Aggregator agg = cfg.aggregator;

    std::vector<Matrix> sets;
    Matrix first(h[0], m);
    for (std::size_t j = 0; j < h[0]; ++j) first.set_row(j, data.point(seeds[j]));

    // The anchor m_1^1 divides every later seed under Product; keep it away from zero.
    if (agg == Aggregator::Product && h.size() > 1) {
        for (std::size_t c = 0; c < m; ++c) {
            double& v = first(0, c);
            while (std::fabs(v) < kInitDivisorFloor) {
                const double sign = std::signbit(v) ? -1.0 : 1.0;
                v = sign * kInitDivisorFloor + kInitJitter * standard_normal(rng);
            }
        }
    }
    sets.push_back(std::move(first));

    std::size_t next_seed = h[0];
    for (std::size_t q = 1; q < h.size(); ++q) {
        Matrix set(h[q], m, neutral_element(agg));
        for (std::size_t j = 1; j < h[q]; ++j) {
            const auto seed = data.point(seeds[next_seed++]);
            for (std::size_t c = 0; c < m; ++c)
                set(j, c) = agg == Aggregator::Sum ? seed[c] - sets[0](0, c) : seed[c] / sets[0](0, c);
        }
        sets.push_back(std::move(set));
    }
    return ProtoSets(std::move(sets), agg);
}

ProtoSets initialize(const Dataset& data, const FitConfig& cfg, Rng& rng) {
    return cfg.init == InitMethod::Random ? init_random(data, cfg, rng) : init_plus_plus(data, cfg, rng);
}

AssignResult assign(const Dataset& data, const ProtoSets& ps, StorageMode mode) {
    check_dims(data, ps);
    const std::size_t n = data.size();
    const std::size_t m = data.dim();
    const auto h = ps.cardinalities();
    const std::size_t cells = cell_count(h);

    std::vector<std::size_t> best(n, 0);
    std::vector<double> dmin(n, std::numeric_limits<double>::infinity());
    AssignStats stats;
    stats.distance_evaluations = n * cells;

    if (mode == StorageMode::MemoryEfficient) {
        // Cells outer, one centroid buffer reused across cells.
        stats.centroid_scalars = ps.num_protocentroids() * m + m;
        std::vector<double> centroid(m);
        CellCursor cursor(h);
        std::size_t flat = 0;
        do {
            ps.centroid(cursor.tuple(), centroid);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = squared_distance(data.point(i), centroid);
                if (d < dmin[i]) {
                    dmin[i] = d;
                    best[i] = flat;
                }
            }
            ++flat;
        } while (cursor.next());
    } else {
        const Matrix centroids = materialize_centroids(ps);
        stats.centroid_scalars = ps.num_protocentroids() * m + cells * m;
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = data.point(i);
            for (std::size_t c = 0; c < cells; ++c) {
                const double d = squared_distance(x, centroids.row(c));
                if (d < dmin[i]) {
                    dmin[i] = d;
                    best[i] = c;
                }
            }
        }
    }
    return AssignResult{Assignment(std::move(best), cells), std::move(dmin), stats};
}

UpdateResult update_protosets(const Dataset& data, const Assignment& asg, const ProtoSets& ps) {
    check_dims(data, ps);
    const auto h = ps.cardinalities();
    const std::size_t p = h.size();
    const std::size_t m = ps.dim();
    const std::size_t n = data.size();
    if (asg.cells.size() != n) throw DimensionError("assignment length does not match dataset size");
    if (asg.counts.size() != cell_count(h)) throw DimensionError("assignment cell space does not match protocentroids");

    const Aggregator agg = ps.aggregator();
    const auto tuples = point_tuples(asg, h);
    std::vector<Matrix> sets = ps.sets();
    UpdateResult out{ProtoSets(ps), {}};

    std::vector<double> other(m);
    for (std::size_t q = 0; q < p; ++q) {
        std::vector<detail::CompensatedSum> num(h[q] * m);
        std::vector<detail::CompensatedSum> den(agg == Aggregator::Sum ? h[q] : h[q] * m);
        std::vector<std::size_t> members(h[q], 0);

        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t* t = &tuples[i * p];
            const std::size_t j = t[q];
            ++members[j];
            // Aggregate of the other sets' protocentroids for this point's cell.
            std::fill(other.begin(), other.end(), neutral_element(agg));
            for (std::size_t r = 0; r < p; ++r) {
                if (r == q) continue;
                const auto row = sets[r].row(t[r]);
                for (std::size_t c = 0; c < m; ++c) other[c] = combine(agg, other[c], row[c]);
            }
            const auto x = data.point(i);
            if (agg == Aggregator::Sum) {
                for (std::size_t c = 0; c < m; ++c) num[j * m + c].add(x[c] - other[c]);
                den[j].add(1.0);
            } else {
                for (std::size_t c = 0; c < m; ++c) {
                    num[j * m + c].add(x[c] * other[c]);
                    den[j * m + c].add(other[c] * other[c]);
                }
            }
        }

        for (std::size_t j = 0; j < h[q]; ++j) {
            if (members[j] == 0) {
                out.empty.emplace_back(q, j);
                continue;
            }
            for (std::size_t c = 0; c < m; ++c) {
                const double d = agg == Aggregator::Sum ? den[j].value() : den[j * m + c].value();
                if (d < kDenominatorFloor) continue;
                sets[q](j, c) = num[j * m + c].value() / d;
            }
        }
    }
    out.protosets = ProtoSets(std::move(sets), agg);
    return out;
}

ProtoSets handle_empty(ProtoSets ps, const Assignment& asg, const Dataset& data, Rng& rng) {
    check_dims(data, ps);
    const auto h = ps.cardinalities();
    const auto incident = incident_counts(asg, h);
    for (std::size_t q = 0; q < h.size(); ++q)
        for (std::size_t j = 0; j < h[q]; ++j)
            if (incident[q][j] == 0) ps.set(q).set_row(j, data.point(uniform_index(rng, data.size())));
    return ps;
}

double centroid_movement(const ProtoSets& before, const ProtoSets& after) {
    const auto h = before.cardinalities();
    if (h != after.cardinalities() || before.dim() != after.dim())
        throw DimensionError("centroid_movement: protocentroid shapes differ");
    std::vector<double> a(before.dim()), b(before.dim());
    double total = 0.0;
    CellCursor cursor(h);
    do {
        before.centroid(cursor.tuple(), a);
        after.centroid(cursor.tuple(), b);
        total += squared_distance(a, b);
    } while (cursor.next());
    return total;
}

StepResult step(const Dataset& data, const ProtoSets& ps, StorageMode mode, Rng& rng) {
    auto assigned = assign(data, ps, mode);
    auto updated = update_protosets(data, assigned.assignment, ps).protosets;
    updated = handle_empty(std::move(updated), assigned.assignment, data, rng);
    const double movement = centroid_movement(ps, updated);
    return StepResult{std::move(updated), std::move(assigned), movement};
}

FitResult fit_from(const Dataset& data, ProtoSets start, const FitConfig& cfg, Rng& rng) {
    ProtoSets ps = std::move(start);
    std::vector<double> trace;
    std::size_t iterations = 0;
    bool converged = false;
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        auto s = step(data, ps, cfg.storage, rng);
        trace.push_back(s.assigned.inertia());
        ps = std::move(s.protosets);
        iterations = it;
        if (s.movement < cfg.tol) {
            converged = true;
            break;
        }
    }
    auto final_assign = assign(data, ps, cfg.storage);
    const double inertia = final_assign.inertia();
    trace.push_back(inertia);
    return FitResult{std::move(ps), std::move(final_assign.assignment), inertia, iterations, converged, 0, std::move(trace)};
}

FitResult fit(const Dataset& data, const FitConfig& cfg) {
    cfg.validate();
    const std::size_t restarts = cfg.n_restarts;
    std::vector<std::optional<FitResult>> results(restarts);
    std::vector<std::exception_ptr> errors(restarts);

    auto run_one = [&](std::size_t r) {
        try {
            Rng rng(derive_seed(cfg.seed, r));
            auto start = initialize(data, cfg, rng);
            results[r] = fit_from(data, std::move(start), cfg, rng);
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

}  // namespace krclust
