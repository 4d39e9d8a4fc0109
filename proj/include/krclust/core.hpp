#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "krclust/matrix.hpp"

namespace krclust {

/// n×m data points with optional ground-truth labels.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(Matrix points, std::optional<std::vector<std::int64_t>> labels = std::nullopt);

    const Matrix& points() const noexcept { return points_; }
    const std::optional<std::vector<std::int64_t>>& labels() const noexcept { return labels_; }

    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dim() const noexcept { return points_.cols(); }
    std::span<const double> point(std::size_t i) const { return points_.row(i); }

    bool operator==(const Dataset&) const = default;

private:
    Matrix points_;
    std::optional<std::vector<std::int64_t>> labels_;
};

enum class Aggregator { Sum, Product };

std::string_view to_string(Aggregator agg) noexcept;
/// Accepts "sum" / "product" (case-sensitive). Throws ConfigError otherwise.
Aggregator parse_aggregator(std::string_view text);

/// Identity element of the aggregator: 0 for Sum, 1 for Product.
constexpr double neutral_element(Aggregator agg) noexcept {
    return agg == Aggregator::Sum ? 0.0 : 1.0;
}

constexpr double combine(Aggregator agg, double a, double b) noexcept {
    return agg == Aggregator::Sum ? a + b : a * b;
}

/// Elementwise aggregation of one or more equal-length vectors.
std::vector<double> aggregate(std::span<const std::vector<double>> vectors, Aggregator agg);

/// p ordered sets of protocentroids sharing a dimension m, plus the aggregator
/// that combines one protocentroid from each set into a centroid.
class ProtoSets {
public:
    ProtoSets(std::vector<Matrix> sets, Aggregator agg);

    std::size_t num_sets() const noexcept { return sets_.size(); }
    std::size_t dim() const noexcept { return sets_.front().cols(); }
    Aggregator aggregator() const noexcept { return agg_; }

    const Matrix& set(std::size_t q) const { return sets_[q]; }
    Matrix& set(std::size_t q) { return sets_[q]; }
    const std::vector<Matrix>& sets() const noexcept { return sets_; }

    /// (h_1, ..., h_p)
    std::vector<std::size_t> cardinalities() const;
    /// ∏ h_q
    std::size_t num_cells() const;
    /// Σ h_q
    std::size_t num_protocentroids() const;

    /// Writes the centroid of the cell with the given tuple into `out`.
    void centroid(std::span<const std::size_t> tuple, std::span<double> out) const;

    bool operator==(const ProtoSets&) const = default;

private:
    std::vector<Matrix> sets_;
    Aggregator agg_;
};

/// Mixed-radix encoding of protocentroid index tuples, last index fastest.
std::size_t encode_cell(std::span<const std::size_t> tuple, std::span<const std::size_t> radices);
std::vector<std::size_t> decode_cell(std::size_t flat, std::span<const std::size_t> radices);
/// ∏ radices; throws DimensionError when the product overflows size_t.
std::size_t cell_count(std::span<const std::size_t> radices);

/// Iterates tuples in flat order without division, for the hot loops.
class CellCursor {
public:
    explicit CellCursor(std::span<const std::size_t> radices)
        : radices_(radices.begin(), radices.end()), tuple_(radices.size(), 0) {}

    const std::vector<std::size_t>& tuple() const noexcept { return tuple_; }

    /// Advances to the next tuple; returns false after wrapping past the last.
    bool next() noexcept {
        for (std::size_t q = tuple_.size(); q-- > 0;) {
            if (++tuple_[q] < radices_[q]) return true;
            tuple_[q] = 0;
        }
        return false;
    }

private:
    std::vector<std::size_t> radices_;
    std::vector<std::size_t> tuple_;
};

/// All ∏ h_q centroids, row order following encode_cell.
Matrix materialize_centroids(const ProtoSets& ps);

/// Per-point flat cell plus per-cell occupancy.
struct Assignment {
    std::vector<std::size_t> cells;
    std::vector<std::size_t> counts;

    Assignment() = default;
    Assignment(std::vector<std::size_t> cells, std::size_t num_cells);

    bool operator==(const Assignment&) const = default;
};

}  // namespace krclust
