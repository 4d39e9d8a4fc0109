#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "krclust/core.hpp"

namespace krclust {

using Labels = std::span<const std::int64_t>;

/// Σ_i ‖x_i − centroid[cell_i]‖².
double inertia(const Dataset& data, const Matrix& centroids, const Assignment& asg);

/// Contingency counts between two labelings over dense label indices.
/// Rows follow sorted distinct predicted labels, columns sorted distinct truth labels.
struct Contingency {
    std::vector<std::vector<std::int64_t>> table;
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t total = 0;
};
Contingency contingency(Labels predicted, Labels truth);

/// Fraction of points carrying the majority truth label of their predicted cluster.
double purity(Labels predicted, Labels truth);

/// Adjusted Rand index. Returns 1 when both labelings are trivially identical
/// in pair structure (expected index equals maximum index).
double ari(Labels predicted, Labels truth);

/// Mutual information normalized by the arithmetic mean of the entropies;
/// 1 when both labelings are single-cluster.
double nmi(Labels predicted, Labels truth);

/// Best one-to-one matching accuracy (Hungarian on the padded contingency matrix).
double acc(Labels predicted, Labels truth);

/// Maximum-weight perfect matching on a square weight matrix. Returns, for
/// every row, the matched column.
std::vector<std::size_t> max_weight_matching(const std::vector<std::vector<std::int64_t>>& weights);

enum class ModelKind { Lloyd, KhatriRao };

/// Summary-size accounting. For Lloyd pass {k} as the cardinalities.
struct ParamReport {
    ModelKind model_kind = ModelKind::KhatriRao;
    std::size_t vector_count = 0;
    std::size_t scalar_count = 0;
    /// Centroids the model represents (∏ h_q, or k for Lloyd).
    std::size_t represented_centroids = 0;
    double ratio_vs_full = 1.0;
};
ParamReport param_report(std::span<const std::size_t> cardinalities, std::size_t m, ModelKind kind);

std::string_view to_string(ModelKind kind) noexcept;

}  // namespace krclust
