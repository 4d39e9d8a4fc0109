#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "krclust/krkmeans.hpp"
#include "krclust/metrics.hpp"

namespace krclust {

/// Lloyd(k) is carried as a single protocentroid set of size k, whose
/// Khatri-Rao update reduces exactly to the cluster mean.
struct FederatedModel {
    ModelKind kind = ModelKind::KhatriRao;
    std::size_t k = 0;                       // Lloyd only
    std::vector<std::size_t> cardinalities;  // KhatriRao only
    Aggregator aggregator = Aggregator::Sum;

    static FederatedModel lloyd(std::size_t k);
    static FederatedModel khatri_rao(std::vector<std::size_t> cardinalities, Aggregator agg);

    /// Cardinalities of the protocentroid sets actually exchanged.
    std::vector<std::size_t> set_sizes() const;
    /// Vectors broadcast per client per round (k, or Σ h_q).
    std::size_t broadcast_vectors() const;
    std::size_t num_cells() const;
};

struct FederatedConfig {
    std::size_t n_clients = 10;
    std::size_t rounds = 15;
    FederatedModel model;
    std::uint64_t seed = 0;
    std::size_t bytes_per_scalar = 8;
    InitMethod init = InitMethod::Random;

    void validate(std::size_t n) const;
};

/// A client's share of the data, as indices into the full dataset.
struct Shard {
    std::vector<std::size_t> indices;
};

/// Uniform random permutation cut into n_clients shards whose sizes differ by
/// at most one (larger shards first).
std::vector<Shard> partition(const Dataset& data, const FederatedConfig& cfg);

/// Sufficient statistics per cell: coordinate sums and counts.
struct CellStats {
    Matrix sums;  // cells × m
    std::vector<std::size_t> counts;

    CellStats() = default;
    CellStats(std::size_t cells, std::size_t m) : sums(cells, m), counts(cells, 0) {}
};

CellStats client_stats(const Dataset& data, const Shard& shard, const ProtoSets& model);

/// Element-wise sum over clients, in client order.
CellStats aggregate_stats(const std::vector<CellStats>& per_client);

/// Closed-form protocentroid update driven by per-cell statistics; empty
/// protocentroids are reseeded from `data` as in handle_empty.
ProtoSets server_update(const CellStats& stats, const ProtoSets& model, const Dataset& data, Rng& rng);

struct LedgerRecord {
    std::size_t round = 0;
    std::uint64_t server_to_clients_bytes = 0;
    std::uint64_t clients_to_server_bytes = 0;
    double inertia_after_round = 0.0;
};

struct CommLedger {
    std::vector<LedgerRecord> records;

    std::uint64_t cumulative_downstream(std::size_t rounds) const;
};

void write_ledger_csv(const std::filesystem::path& path, const CommLedger& ledger);

struct FederatedResult {
    FitResult fit;
    CommLedger ledger;
};

/// Server initializes from the data with the seed's stream, then runs
/// cfg.rounds broadcast / local-statistics / update rounds.
FederatedResult run_federated(const Dataset& data, const FederatedConfig& cfg);

/// Same, from a given initial model and server RNG.
FederatedResult run_federated_from(const Dataset& data, const FederatedConfig& cfg, ProtoSets start, Rng& server_rng);

}  // namespace krclust
