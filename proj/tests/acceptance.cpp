// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <thread>

#include "krclust/baselines.hpp"
#include "krclust/datagen.hpp"
#include "krclust/design.hpp"
#include "krclust/federated.hpp"
#include "krclust/krkmeans.hpp"
#include "krclust/metrics.hpp"
#include "oracles.hpp"

using namespace krclust;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<std::int64_t> as_labels(const Assignment& a) { return {a.cells.begin(), a.cells.end()}; }

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
    double worst = 0;
    for (std::size_t i = 0; i < a.values().size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    return worst;
}

Dataset blobs100() {
    BlobSpec s;
    s.n = 5000;
    s.m = 2;
    s.k = 100;
    s.cluster_std = 1.0;
    s.center_min = -10.0;
    s.center_max = 10.0;
    return gen_blobs(s);
}

FitConfig kr_config(std::vector<std::size_t> h, Aggregator agg = Aggregator::Sum) {
    FitConfig c;
    c.cardinalities = std::move(h);
    c.aggregator = agg;
    c.threads = threads();
    return c;
}

LloydConfig lloyd_config(std::size_t k) {
    LloydConfig c;
    c.k = k;
    c.threads = threads();
    return c;
}

Verdict c1_update_oracle() {
    Verdict v;
    Rng rng(1);
    std::size_t compared = 0;
    double worst = 0;
    for (int instance = 0; instance < 200; ++instance) {
        const std::size_t n = 1 + uniform_index(rng, 30);
        const std::size_t m = 1 + uniform_index(rng, 3);
        Matrix x(n, m);
        for (auto& e : x.values()) e = 2.0 * standard_normal(rng);
        const Dataset d(std::move(x));
        std::vector<std::size_t> cells(n);
        for (auto& c : cells) c = uniform_index(rng, 4);
        const Assignment asg(cells, 4);
        for (auto agg : {Aggregator::Sum, Aggregator::Product}) {
            std::vector<Matrix> sets;
            for (int q = 0; q < 2; ++q) {
                Matrix s(2, m);
                for (auto& e : s.values()) e = standard_normal(rng);
                sets.push_back(std::move(s));
            }
            const ProtoSets ps(std::move(sets), agg);
            const auto got = update_protosets(d, asg, ps).protosets;
            const auto want = oracle::numeric_update(d, asg, ps);
            for (std::size_t q = 0; q < 2; ++q)
                for (std::size_t k = 0; k < got.set(q).values().size(); ++k) {
                    const double g = got.set(q).values()[k], w = want.set(q).values()[k];
                    worst = std::max(worst, std::abs(g - w) / (1.0 + std::abs(w)));
                    ++compared;
                }
        }
    }
    v.require(worst <= 1e-6, "max scaled deviation " + fmt(worst));
    v.detail = v.pass ? std::to_string(compared) + " coordinates, max scaled deviation " + fmt(worst) : v.detail;
    return v;
}

Verdict c2_monotone() {
    Verdict v;
    Rng rng(2);
    double worst = -INFINITY;
    for (int run = 0; run < 100; ++run) {
        const bool structured = run % 2 == 1;
        const Aggregator agg = (run / 2) % 2 ? Aggregator::Product : Aggregator::Sum;
        const std::vector<std::size_t> h{2 + uniform_index(rng, 3), 2 + uniform_index(rng, 3)};
        Dataset d;
        if (structured) {
            KrStructSpec s;
            s.cardinalities = h;
            s.aggregator = agg;
            s.sampler = agg == Aggregator::Product ? ProtoSampler::UniformPositive : ProtoSampler::StandardNormal;
            s.m = 2 + uniform_index(rng, 4);
            s.points_per_cluster = 20 + uniform_index(rng, 30);
            s.noise_std = 0.5;
            s.seed = static_cast<std::uint64_t>(run);
            d = gen_kr_structured(s).data;
        } else {
            BlobSpec s;
            s.n = 200 + uniform_index(rng, 400);
            s.m = 2 + uniform_index(rng, 4);
            s.k = 3 + uniform_index(rng, 10);
            s.seed = static_cast<std::uint64_t>(run);
            d = gen_blobs(s);
        }
        auto cfg = kr_config(h, agg);
        cfg.n_restarts = 1;
        cfg.tol = 0.0;
        cfg.seed = static_cast<std::uint64_t>(run);
        cfg.init = run % 3 ? InitMethod::Random : InitMethod::PlusPlus;
        const auto r = fit(d, cfg);
        for (std::size_t i = 1; i < r.inertia_trace.size(); ++i)
            worst = std::max(worst, r.inertia_trace[i] - r.inertia_trace[i - 1]);
    }
    v.require(worst <= 1e-9, "largest increase " + fmt(worst));
    if (v.pass) v.detail = "largest step change " + fmt(worst);
    return v;
}

Verdict c3_recovery() {
    Verdict v;
    KrStructSpec s;
    s.cardinalities = {3, 3};
    s.aggregator = Aggregator::Sum;
    s.points_per_cluster = 100;
    // Centroid coordinates are sums of two standard normals: scale sqrt(2).
    s.noise_std = 0.05 * std::sqrt(2.0);
    const auto g = gen_kr_structured(s);
    const auto r = fit(g.data, kr_config({3, 3}));
    const double a = ari(as_labels(r.assignment), *g.data.labels());
    v.require(a >= 0.99, "ARI " + fmt(a));
    if (v.pass) v.detail = "ARI " + fmt(a);
    return v;
}

Verdict c4_same_parameters() {
    Verdict v;
    const Dataset d = blobs100();
    const double kr = fit(d, kr_config({10, 10})).inertia;
    const double l20 = lloyd_fit(d, lloyd_config(20)).inertia;
    NaiveConfig nc;
    nc.cardinalities = {10, 10};
    nc.inner = lloyd_config(100);
    const double naive = naive_fit(d, nc).inertia;
    const double bound = 0.75 * std::min(l20, naive);
    v.require(kr <= bound, "KR " + fmt(kr) + " > 0.75 x min(" + fmt(l20) + ", " + fmt(naive) + ")");
    if (v.pass) v.detail = "KR " + fmt(kr) + ", Lloyd(20) " + fmt(l20) + ", naive " + fmt(naive) + ", ratio " + fmt(kr / std::min(l20, naive));
    return v;
}

Verdict c5_optimistic_bound() {
    Verdict v;
    const Dataset d = blobs100();
    const double l100 = lloyd_fit(d, lloyd_config(100)).inertia;
    const double kr = fit(d, kr_config({10, 10})).inertia;
    v.require(l100 <= kr, "Lloyd(100) " + fmt(l100) + " > KR " + fmt(kr));
    if (v.pass) v.detail = "Lloyd(100) " + fmt(l100) + ", KR " + fmt(kr);
    return v;
}

Verdict c6_parameters() {
    Verdict v;
    const std::vector<std::size_t> h52{5, 2}, h33{3, 3}, h1010{10, 10};
    const double a = param_report(h52, 784, ModelKind::KhatriRao).ratio_vs_full;
    const double b = param_report(h33, 2, ModelKind::KhatriRao).ratio_vs_full;
    const double c = param_report(h1010, 2, ModelKind::KhatriRao).ratio_vs_full;
    v.require(a == 0.70, "(5,2) gives " + fmt(a));
    v.require(std::round(b * 100.0) / 100.0 == 0.67, "(3,3) gives " + fmt(b));
    v.require(c == 0.20, "(10,10) gives " + fmt(c));
    if (v.pass) v.detail = fmt(a) + " " + fmt(std::round(b * 100.0) / 100.0) + " " + fmt(c);
    return v;
}

// Prime exponents of n, for exact comparison of (b/p)^p across divisors.
std::map<std::size_t, std::size_t> factorize(std::size_t n) {
    std::map<std::size_t, std::size_t> f;
    for (std::size_t d = 2; d * d <= n; ++d)
        while (n % d == 0) {
            ++f[d];
            n /= d;
        }
    if (n > 1) ++f[n];
    return f;
}

// Sign of (b/p1)^p1 - (b/p2)^p2.
int exact_compare(std::size_t b, std::size_t p1, std::size_t p2) {
    const long double l1 = static_cast<long double>(p1) * std::log(static_cast<long double>(b / p1));
    const long double l2 = static_cast<long double>(p2) * std::log(static_cast<long double>(b / p2));
    if (std::abs(l1 - l2) > 1e-9L * std::max<long double>(1, std::abs(l1))) return l1 > l2 ? 1 : -1;
    auto f1 = factorize(b / p1), f2 = factorize(b / p2);
    for (auto& [prime, e] : f1) e *= p1;
    for (auto& [prime, e] : f2) e *= p2;
    if (f1 == f2) return 0;
    return l1 > l2 ? 1 : -1;
}

Verdict c7_design_enumeration() {
    Verdict v;
    for (std::size_t b = 1; b <= 10'000 && v.pass; ++b) {
        std::size_t best = 0;
        for (std::size_t p = 1; p <= b; ++p) {
            if (b % p) continue;
            if (best == 0 || exact_compare(b, p, best) > 0) best = p;
        }
        const auto got = optimal_num_sets(b);
        v.require(got.num_sets == best && got.set_size == b / best,
                  "b=" + std::to_string(b) + ": got p=" + std::to_string(got.num_sets) + ", enumeration p=" + std::to_string(best));
    }
    Rng rng(7);
    std::size_t checked = 0;
    for (std::size_t k = 1; k <= 512 && v.pass; ++k) {
        for (std::size_t h = 2; h <= 8 && v.pass; ++h) {
            const auto bounds = set_count_bounds(k, h);
            const std::size_t expected = (k + h - 2) / (h - 1);
            v.require(bounds.upper == expected, "upper bound formula at k=" + std::to_string(k) + ", h=" + std::to_string(h));
            v.require(std::pow(static_cast<double>(h), bounds.lower) <= static_cast<double>(k) * (1 + 1e-12) &&
                          static_cast<double>(bounds.upper) >= bounds.lower - 1e-12,
                      "lower bound at k=" + std::to_string(k));
            Matrix targets(k, 2);
            for (auto& e : targets.values()) e = standard_normal(rng);
            for (auto agg : {Aggregator::Sum, Aggregator::Product}) {
                std::vector<Matrix> sets;
                std::size_t t = 0;
                for (std::size_t q = 0; q < bounds.upper; ++q) {
                    Matrix s(h, 2, neutral_element(agg));
                    for (std::size_t j = 1; j < h && t < k; ++j, ++t) s.set_row(j, targets.row(t));
                    sets.push_back(std::move(s));
                }
                v.require(t == k, "construction ran out of slots at k=" + std::to_string(k));
                const ProtoSets ps(std::move(sets), agg);
                std::vector<std::size_t> tuple(bounds.upper);
                std::vector<double> c(2);
                for (std::size_t target = 0; target < k; ++target) {
                    std::fill(tuple.begin(), tuple.end(), 0);
                    tuple[target / (h - 1)] = 1 + target % (h - 1);
                    ps.centroid(tuple, c);
                    v.require(c[0] == targets(target, 0) && c[1] == targets(target, 1),
                              "target not represented at k=" + std::to_string(k));
                }
                ++checked;
            }
        }
    }
    if (v.pass) v.detail = "b <= 10000 enumerated; " + std::to_string(checked) + " constructions";
    return v;
}

Verdict c8_federated() {
    Verdict v;
    const Dataset d = blobs100();
    constexpr std::size_t T = 15;
    double equivalence = 0;

    // Round equivalence, KR model.
    {
        FederatedConfig cfg;
        cfg.rounds = T;
        cfg.model = FederatedModel::khatri_rao({10, 10}, Aggregator::Sum);
        FitConfig fc = kr_config({10, 10});
        Rng init(derive_seed(0, 0));
        const ProtoSets start = init_random(d, fc, init);
        Rng fed_rng(99), central_rng(99);
        const auto fed = run_federated_from(d, cfg, start, fed_rng);
        ProtoSets central = start;
        for (std::size_t r = 0; r < T; ++r) central = step(d, central, StorageMode::MemoryEfficient, central_rng).protosets;
        double diff = 0;
        for (std::size_t q = 0; q < 2; ++q) diff = std::max(diff, max_abs_diff(fed.fit.protosets.set(q), central.set(q)));
        equivalence = std::max(equivalence, diff);
        v.require(diff <= 1e-12, "KR federated vs centralized differ by " + fmt(diff));
    }
    // Round equivalence, Lloyd model.
    {
        FederatedConfig cfg;
        cfg.rounds = T;
        cfg.model = FederatedModel::lloyd(100);
        Rng init(derive_seed(0, 0));
        const Matrix start = lloyd_init(d, lloyd_config(100), init);
        Rng fed_rng(99), central_rng(99);
        const auto fed = run_federated_from(d, cfg, ProtoSets({start}, Aggregator::Sum), fed_rng);
        Matrix central = start;
        for (std::size_t r = 0; r < T; ++r) central = lloyd_step(d, central, central_rng).centroids;
        const double diff = max_abs_diff(fed.fit.protosets.set(0), central);
        equivalence = std::max(equivalence, diff);
        v.require(diff <= 1e-12, "Lloyd federated vs centralized differ by " + fmt(diff));
    }

    // Dominance at matched downstream bytes: FkM round t costs as much as
    // KR-FkM round 5t, so KR-FkM runs 5T rounds.
    FederatedConfig fkm;
    fkm.rounds = T;
    fkm.model = FederatedModel::lloyd(100);
    FederatedConfig krfkm = fkm;
    krfkm.model = FederatedModel::khatri_rao({10, 10}, Aggregator::Sum);
    const auto per_round_f = fkm.model.broadcast_vectors();
    const auto per_round_k = krfkm.model.broadcast_vectors();
    const std::size_t factor = per_round_f / per_round_k;
    krfkm.rounds = T * factor;
    const auto base = run_federated(d, fkm);
    const auto kr = run_federated(d, krfkm);

    const double ratio = static_cast<double>(kr.ledger.records[0].server_to_clients_bytes) /
                         static_cast<double>(base.ledger.records[0].server_to_clients_bytes);
    v.require(ratio == 0.20 && kr.ledger.records[0].server_to_clients_bytes * 5 == base.ledger.records[0].server_to_clients_bytes,
              "downstream ratio " + fmt(ratio));
    double worst_margin = INFINITY;
    for (std::size_t t = 1; t <= T; ++t) {
        const std::size_t s = t * factor;
        const auto budget = base.ledger.cumulative_downstream(t);
        v.require(kr.ledger.cumulative_downstream(s) == budget, "budgets do not line up at round " + std::to_string(t));
        const double fi = base.ledger.records[t - 1].inertia_after_round;
        const double ki = kr.ledger.records[s - 1].inertia_after_round;
        worst_margin = std::min(worst_margin, fi / ki);
        v.require(ki < fi, "at " + std::to_string(budget) + " bytes KR-FkM " + fmt(ki) + " >= FkM " + fmt(fi));
    }
    const std::string summary = "round equivalence " + fmt(equivalence) + ", downstream ratio " + fmt(ratio) +
                                ", smallest FkM/KR-FkM inertia ratio " + fmt(worst_margin);
    v.detail = v.pass ? summary : v.detail + "; " + summary;
    return v;
}

Verdict c9_metric_oracles() {
    Verdict v;
    Rng rng(9);
    double worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 12);
        const std::size_t ka = 1 + uniform_index(rng, 5), kb = 1 + uniform_index(rng, 5);
        std::vector<std::int64_t> a(n), b(n);
        for (auto& e : a) e = static_cast<std::int64_t>(uniform_index(rng, ka));
        for (auto& e : b) e = static_cast<std::int64_t>(uniform_index(rng, kb));
        worst = std::max(worst, std::abs(nmi(a, b) - oracle::nmi_entropy(a, b)));
        worst = std::max(worst, std::abs(acc(a, b) - oracle::acc_permutations(a, b)));
        worst = std::max(worst, std::abs(purity(a, b) - oracle::purity_direct(a, b)));
        if (n >= 2) worst = std::max(worst, std::abs(ari(a, b) - oracle::ari_pairs(a, b)));
    }
    v.require(worst <= 1e-12, "max deviation " + fmt(worst));
    if (v.pass) v.detail = "max deviation " + fmt(worst);
    return v;
}

Verdict c10_naive() {
    Verdict v;
    Rng rng(10);
    double worst = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const Aggregator agg = trial % 2 ? Aggregator::Product : Aggregator::Sum;
        const std::vector<std::size_t> h{2 + uniform_index(rng, 9), 2 + uniform_index(rng, 9)};
        const std::size_t m = 1 + uniform_index(rng, 6);
        std::vector<Matrix> sets;
        for (auto hq : h) {
            Matrix s(hq, m);
            for (auto& e : s.values()) e = agg == Aggregator::Sum ? standard_normal(rng) : uniform_real(rng, 0.5, 2.0);
            sets.push_back(std::move(s));
        }
        const Matrix mu = materialize_centroids(ProtoSets(std::move(sets), agg));
        NaiveConfig nc;
        nc.descent_tol = 1e-12;
        worst = std::max(worst, naive_decompose(mu, h, agg, nc).residual);
    }
    v.require(worst < 1e-8, "residual " + fmt(worst));

    const Dataset d = blobs100();
    NaiveConfig nc;
    nc.cardinalities = {10, 10};
    nc.inner = lloyd_config(100);
    const double naive = naive_fit(d, nc).inertia;
    const double kr = fit(d, kr_config({10, 10})).inertia;
    v.require(naive >= kr, "naive " + fmt(naive) + " < KR " + fmt(kr));
    if (v.pass) v.detail = "max residual " + fmt(worst) + "; naive " + fmt(naive) + " >= KR " + fmt(kr);
    return v;
}

Verdict c11_identities() {
    Verdict v;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        BlobSpec bs;
        bs.n = 1500;
        bs.m = 3;
        bs.k = 12;
        bs.seed = seed;
        const Dataset d = gen_blobs(bs);
        for (auto agg : {Aggregator::Sum, Aggregator::Product}) {
            auto cfg = kr_config({4, 3}, agg);
            cfg.seed = seed;
            cfg.n_restarts = 5;
            cfg.storage = StorageMode::MemoryEfficient;
            const auto a = fit(d, cfg);
            cfg.storage = StorageMode::TimeEfficient;
            const auto b = fit(d, cfg);
            v.require(a.protosets == b.protosets && a.assignment == b.assignment && a.inertia == b.inertia &&
                          a.inertia_trace == b.inertia_trace && a.restart_index == b.restart_index,
                      "storage modes differ at seed " + std::to_string(seed));
            const auto am = assign(d, a.protosets, StorageMode::MemoryEfficient);
            const auto at = assign(d, a.protosets, StorageMode::TimeEfficient);
            v.require(am.assignment == at.assignment && am.min_sq_dist == at.min_sq_dist, "assignment passes differ");
        }
        for (auto init : {InitMethod::Random, InitMethod::PlusPlus}) {
            auto kc = kr_config({12});
            kc.seed = seed;
            kc.init = init;
            auto lc = lloyd_config(12);
            lc.seed = seed;
            lc.init = init;
            const auto k = fit(d, kc);
            const auto l = lloyd_fit(d, lc);
            v.require(k.protosets.set(0) == l.centroids && k.assignment == l.assignment && k.inertia == l.inertia &&
                          k.inertia_trace == l.inertia_trace && k.restart_index == l.restart_index &&
                          k.iterations == l.iterations,
                      "p=1 fit and Lloyd differ at seed " + std::to_string(seed));
        }
    }
    if (v.pass) v.detail = "bit-identical on 8 storage pairs and 8 Lloyd replays";
    return v;
}

Verdict c12_quantization() {
    Verdict v;
    constexpr std::size_t W = 64, H = 64;
    Matrix px(W * H, 3);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            const double rgb[3] = {std::round(255.0 * static_cast<double>(x) / 63.0),
                                   std::round(255.0 * static_cast<double>(y) / 63.0),
                                   std::round(255.0 * static_cast<double>(x + y) / 126.0)};
            for (std::size_t c = 0; c < 3; ++c) px(y * W + x, c) = rgb[c] / 255.0;
        }
    const Dataset image(std::move(px));

    const double kr = fit(image, kr_config({6, 6}, Aggregator::Product)).inertia;
    double random_best = INFINITY;
    for (std::uint64_t r = 0; r < 20; ++r) {
        Rng rng(derive_seed(0, r));
        const auto picks = sample_without_replacement(rng, image.size(), 12);
        Matrix cb(12, 3);
        for (std::size_t i = 0; i < 12; ++i) cb.set_row(i, image.point(picks[i]));
        random_best = std::min(random_best, assign(image, ProtoSets({std::move(cb)}, Aggregator::Sum)).inertia());
    }
    v.require(kr < random_best, "KR " + fmt(kr) + " >= random codebook " + fmt(random_best));
    if (v.pass) v.detail = "KR " + fmt(kr) + " < random codebook " + fmt(random_best);
    return v;
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "closed-form update matches numeric minimization", 10, c1_update_oracle},
        {2, "within-run inertia is monotone", 30, c2_monotone},
        {3, "exact recovery on KR-structured data", 20, c3_recovery},
        {4, "same-parameter dominance on blobs", 60, c4_same_parameters},
        {5, "Lloyd with h1*h2 centroids bounds KR from below", 60, c5_optimistic_bound},
        {6, "parameter ratios", 1, c6_parameters},
        {7, "set-count design enumeration", 30, c7_design_enumeration},
        {8, "federated equivalence and byte-matched dominance", 60, c8_federated},
        {9, "metric oracles", 10, c9_metric_oracles},
        {10, "naive decomposition fixed point and dominance", 60, c10_naive},
        {11, "storage-mode and p=1 identities", 20, c11_identities},
        {12, "colour quantization beats a random codebook", 30, c12_quantization},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= c.limit_s) {
            if (v.pass) v.detail = "took " + fmt(secs) + " s";
            v.pass = false;
        }
        std::printf("%s C%-2d %s (%.2f s, limit %.0f s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit_s,
                    v.detail.c_str());
        std::fflush(stdout);
        if (!v.pass) ++failures;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
