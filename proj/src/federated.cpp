#include "krclust/federated.hpp"

#include <fstream>
#include <limits>

#include "detail/accumulate.hpp"
#include "krclust/io.hpp"

namespace krclust {

FederatedModel FederatedModel::lloyd(std::size_t k) {
    FederatedModel m;
    m.kind = ModelKind::Lloyd;
    m.k = k;
    return m;
}

FederatedModel FederatedModel::khatri_rao(std::vector<std::size_t> cardinalities, Aggregator agg) {
    FederatedModel m;
    m.kind = ModelKind::KhatriRao;
    m.cardinalities = std::move(cardinalities);
    m.aggregator = agg;
    return m;
}

std::vector<std::size_t> FederatedModel::set_sizes() const {
    return kind == ModelKind::Lloyd ? std::vector<std::size_t>{k} : cardinalities;
}

std::size_t FederatedModel::broadcast_vectors() const {
    std::size_t total = 0;
    for (auto h : set_sizes()) total += h;
    return total;
}

std::size_t FederatedModel::num_cells() const { return cell_count(set_sizes()); }

void FederatedConfig::validate(std::size_t n) const {
    if (n_clients == 0) throw ConfigError("need at least one client");
    if (n_clients > n) throw ConfigError("more clients (" + std::to_string(n_clients) + ") than points (" + std::to_string(n) + ")");
    if (rounds == 0) throw ConfigError("rounds must be >= 1");
    if (bytes_per_scalar == 0) throw ConfigError("bytes_per_scalar must be >= 1");
    const auto sizes = model.set_sizes();
    if (sizes.empty()) throw ConfigError("model needs at least one protocentroid set");
    for (auto h : sizes)
        if (h == 0) throw ConfigError("model cardinalities must be >= 1");
}

std::vector<Shard> partition(const Dataset& data, const FederatedConfig& cfg) {
    const std::size_t n = data.size();
    if (cfg.n_clients == 0 || cfg.n_clients > n)
        throw ConfigError("cannot split " + std::to_string(n) + " points across " + std::to_string(cfg.n_clients) + " clients");
    Rng rng(derive_seed(cfg.seed, 0x5EED5));
    const auto order = sample_without_replacement(rng, n, n);
    std::vector<Shard> shards(cfg.n_clients);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < cfg.n_clients; ++c) {
        const std::size_t size = n / cfg.n_clients + (c < n % cfg.n_clients ? 1 : 0);
        shards[c].indices.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                 order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return shards;
}

CellStats client_stats(const Dataset& data, const Shard& shard, const ProtoSets& model) {
    if (data.dim() != model.dim()) throw DimensionError("model dimension does not match data");
    const Matrix centroids = materialize_centroids(model);
    const std::size_t cells = centroids.rows();
    const std::size_t m = data.dim();
    std::vector<detail::CompensatedSum> sums(cells * m);
    CellStats out(cells, m);
    for (auto i : shard.indices) {
        const auto x = data.point(i);
        std::size_t best = 0;
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cells; ++c) {
            const double d = squared_distance(x, centroids.row(c));
            if (d < dmin) {
                dmin = d;
                best = c;
            }
        }
        ++out.counts[best];
        for (std::size_t d = 0; d < m; ++d) sums[best * m + d].add(x[d]);
    }
    auto dst = out.sums.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = sums[i].value();
    return out;
}

CellStats aggregate_stats(const std::vector<CellStats>& per_client) {
    if (per_client.empty()) throw ConfigError("no client statistics to aggregate");
    const std::size_t cells = per_client.front().counts.size();
    const std::size_t m = per_client.front().sums.cols();
    std::vector<detail::CompensatedSum> sums(cells * m);
    CellStats out(cells, m);
    for (const auto& s : per_client) {
        if (s.counts.size() != cells || s.sums.cols() != m) throw DimensionError("client statistics disagree in shape");
        const auto src = s.sums.values();
        for (std::size_t i = 0; i < src.size(); ++i) sums[i].add(src[i]);
        for (std::size_t c = 0; c < cells; ++c) out.counts[c] += s.counts[c];
    }
    auto dst = out.sums.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = sums[i].value();
    return out;
}

ProtoSets server_update(const CellStats& stats, const ProtoSets& model, const Dataset& data, Rng& rng) {
    const auto h = model.cardinalities();
    const std::size_t p = h.size();
    const std::size_t m = model.dim();
    const std::size_t cells = cell_count(h);
    if (stats.counts.size() != cells || stats.sums.cols() != m)
        throw DimensionError("statistics do not match the model's cell space");
    const Aggregator agg = model.aggregator();
    std::vector<Matrix> sets = model.sets();
    std::vector<double> other(m);

    for (std::size_t q = 0; q < p; ++q) {
        std::vector<detail::CompensatedSum> num(h[q] * m);
        std::vector<detail::CompensatedSum> den(h[q] * m);
        std::vector<std::size_t> members(h[q], 0);
        CellCursor cursor(h);
        std::size_t flat = 0;
        do {
            const std::size_t c = flat++;
            const std::size_t count = stats.counts[c];
            if (count == 0) continue;
            const auto& t = cursor.tuple();
            const std::size_t j = t[q];
            members[j] += count;
            std::fill(other.begin(), other.end(), neutral_element(agg));
            for (std::size_t r = 0; r < p; ++r) {
                if (r == q) continue;
                const auto row = sets[r].row(t[r]);
                for (std::size_t d = 0; d < m; ++d) other[d] = combine(agg, other[d], row[d]);
            }
            const auto s = stats.sums.row(c);
            const double nc = static_cast<double>(count);
            for (std::size_t d = 0; d < m; ++d) {
                if (agg == Aggregator::Sum) {
                    num[j * m + d].add(s[d]);
                    num[j * m + d].add(-nc * other[d]);
                    den[j * m + d].add(nc);
                } else {
                    // r is constant within a cell, so Σ x ⊙ r = S_c ⊙ r.
                    num[j * m + d].add(s[d] * other[d]);
                    den[j * m + d].add(nc * other[d] * other[d]);
                }
            }
        } while (cursor.next());

        for (std::size_t j = 0; j < h[q]; ++j) {
            if (members[j] == 0) continue;
            for (std::size_t d = 0; d < m; ++d) {
                const double dv = den[j * m + d].value();
                if (dv < 1e-12) continue;
                sets[q](j, d) = num[j * m + d].value() / dv;
            }
        }
    }

    Assignment occupancy;
    occupancy.counts = stats.counts;
    return handle_empty(ProtoSets(std::move(sets), agg), occupancy, data, rng);
}

std::uint64_t CommLedger::cumulative_downstream(std::size_t rounds) const {
    std::uint64_t total = 0;
    for (std::size_t r = 0; r < rounds && r < records.size(); ++r) total += records[r].server_to_clients_bytes;
    return total;
}

void write_ledger_csv(const std::filesystem::path& path, const CommLedger& ledger) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << "round,s2c_bytes,c2s_bytes,inertia\n";
    for (const auto& r : ledger.records)
        out << r.round << ',' << r.server_to_clients_bytes << ',' << r.clients_to_server_bytes << ','
            << format_double(r.inertia_after_round) << '\n';
}

FederatedResult run_federated_from(const Dataset& data, const FederatedConfig& cfg, ProtoSets start, Rng& server_rng) {
    cfg.validate(data.size());
    if (start.cardinalities() != cfg.model.set_sizes()) throw ConfigError("initial model does not match the configured model");
    const auto shards = partition(data, cfg);
    const std::size_t m = data.dim();
    const std::uint64_t cells = cfg.model.num_cells();
    const std::uint64_t downstream = cfg.n_clients * cfg.model.broadcast_vectors() * m * cfg.bytes_per_scalar;
    const std::uint64_t upstream = cfg.n_clients * (cells * m + cells) * cfg.bytes_per_scalar;

    ProtoSets model = std::move(start);
    FederatedResult out{FitResult{model, Assignment{}, 0.0, 0, false, 0, {}}, {}};
    std::vector<CellStats> per_client(shards.size());
    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
        for (std::size_t c = 0; c < shards.size(); ++c) per_client[c] = client_stats(data, shards[c], model);
        model = server_update(aggregate_stats(per_client), model, data, server_rng);
        const double after = assign(data, model).inertia();
        out.ledger.records.push_back(LedgerRecord{round, downstream, upstream, after});
        out.fit.inertia_trace.push_back(after);
    }
    auto final_assign = assign(data, model);
    out.fit.inertia = final_assign.inertia();
    out.fit.assignment = std::move(final_assign.assignment);
    out.fit.protosets = std::move(model);
    out.fit.iterations = cfg.rounds;
    return out;
}

FederatedResult run_federated(const Dataset& data, const FederatedConfig& cfg) {
    cfg.validate(data.size());
    Rng server_rng(derive_seed(cfg.seed, 0));
    FitConfig init_cfg;
    init_cfg.cardinalities = cfg.model.set_sizes();
    init_cfg.aggregator = cfg.model.kind == ModelKind::Lloyd ? Aggregator::Sum : cfg.model.aggregator;
    init_cfg.init = cfg.init;
    auto start = initialize(data, init_cfg, server_rng);
    return run_federated_from(data, cfg, std::move(start), server_rng);
}

}  // namespace krclust
