#include "krclust/core.hpp"

#include <cmath>
#include <limits>

namespace krclust {

namespace {

bool all_finite(std::span<const double> values) {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

Dataset::Dataset(Matrix points, std::optional<std::vector<std::int64_t>> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
    if (points_.rows() == 0 || points_.cols() == 0) throw DimensionError("dataset must have n >= 1 and m >= 1");
    if (!all_finite(points_.values())) throw DomainError("dataset contains non-finite values");
    if (labels_ && labels_->size() != points_.rows())
        throw DimensionError("label count does not match number of points");
    if (labels_)
        for (auto l : *labels_)
            if (l < 0) throw DomainError("labels must be non-negative");
}

std::string_view to_string(Aggregator agg) noexcept {
    return agg == Aggregator::Sum ? "sum" : "product";
}

Aggregator parse_aggregator(std::string_view text) {
    if (text == "sum") return Aggregator::Sum;
    if (text == "product") return Aggregator::Product;
    throw ConfigError("unknown aggregator '" + std::string(text) + "' (expected sum or product)");
}

std::vector<double> aggregate(std::span<const std::vector<double>> vectors, Aggregator agg) {
    if (vectors.empty()) throw DimensionError("aggregate needs at least one vector");
    std::vector<double> out = vectors.front();
    for (std::size_t v = 1; v < vectors.size(); ++v) {
        if (vectors[v].size() != out.size()) throw DimensionError("aggregate: vector lengths differ");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = combine(agg, out[i], vectors[v][i]);
    }
    return out;
}

ProtoSets::ProtoSets(std::vector<Matrix> sets, Aggregator agg) : sets_(std::move(sets)), agg_(agg) {
    if (sets_.empty()) throw DimensionError("ProtoSets needs at least one set");
    const std::size_t m = sets_.front().cols();
    if (m == 0) throw DimensionError("protocentroid dimension must be >= 1");
    for (const auto& s : sets_) {
        if (s.rows() == 0) throw DimensionError("every protocentroid set needs at least one row");
        if (s.cols() != m) throw DimensionError("protocentroid sets disagree on dimension");
        if (!all_finite(s.values())) throw DomainError("protocentroids contain non-finite values");
    }
}

std::vector<std::size_t> ProtoSets::cardinalities() const {
    std::vector<std::size_t> h;
    h.reserve(sets_.size());
    for (const auto& s : sets_) h.push_back(s.rows());
    return h;
}

std::size_t ProtoSets::num_cells() const { return cell_count(cardinalities()); }

std::size_t ProtoSets::num_protocentroids() const {
    std::size_t total = 0;
    for (const auto& s : sets_) total += s.rows();
    return total;
}

void ProtoSets::centroid(std::span<const std::size_t> tuple, std::span<double> out) const {
    const auto first = sets_[0].row(tuple[0]);
    std::copy(first.begin(), first.end(), out.begin());
    for (std::size_t q = 1; q < sets_.size(); ++q) {
        const auto r = sets_[q].row(tuple[q]);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = combine(agg_, out[i], r[i]);
    }
}

std::size_t cell_count(std::span<const std::size_t> radices) {
    std::size_t total = 1;
    for (auto h : radices) {
        if (h == 0) throw DimensionError("cardinalities must be >= 1");
        if (total > std::numeric_limits<std::size_t>::max() / h) throw DimensionError("cell space too large");
        total *= h;
    }
    return total;
}

std::size_t encode_cell(std::span<const std::size_t> tuple, std::span<const std::size_t> radices) {
    if (tuple.size() != radices.size()) throw DimensionError("tuple and radices differ in length");
    std::size_t flat = 0;
    for (std::size_t q = 0; q < tuple.size(); ++q) {
        if (tuple[q] >= radices[q])
            throw IndexError("cell index " + std::to_string(tuple[q]) + " out of range for radix " +
                             std::to_string(radices[q]));
        flat = flat * radices[q] + tuple[q];
    }
    return flat;
}

std::vector<std::size_t> decode_cell(std::size_t flat, std::span<const std::size_t> radices) {
    if (flat >= cell_count(radices)) throw IndexError("flat cell index out of range");
    std::vector<std::size_t> tuple(radices.size());
    for (std::size_t q = radices.size(); q-- > 0;) {
        tuple[q] = flat % radices[q];
        flat /= radices[q];
    }
    return tuple;
}

Matrix materialize_centroids(const ProtoSets& ps) {
    const auto h = ps.cardinalities();
    Matrix out(cell_count(h), ps.dim());
    CellCursor cursor(h);
    std::size_t flat = 0;
    do {
        ps.centroid(cursor.tuple(), out.row(flat++));
    } while (cursor.next());
    return out;
}

Assignment::Assignment(std::vector<std::size_t> cells_in, std::size_t num_cells)
    : cells(std::move(cells_in)), counts(num_cells, 0) {
    for (auto c : cells) {
        if (c >= num_cells) throw IndexError("assignment references a cell outside the cell space");
        ++counts[c];
    }
}

}  // namespace krclust
