#include "krclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace krclust {

namespace {

void check_pair(Labels predicted, Labels truth, std::size_t min_n) {
    if (predicted.size() != truth.size()) throw DimensionError("label vectors differ in length");
    if (predicted.size() < min_n)
        throw DimensionError("metric needs at least " + std::to_string(min_n) + " labeled points");
}

std::vector<std::size_t> dense_labels(Labels labels, std::size_t& distinct) {
    std::vector<std::int64_t> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    distinct = sorted.size();
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), labels[i]) - sorted.begin());
    return out;
}

double choose2(std::int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

double entropy(const std::vector<std::int64_t>& counts, double total) {
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

double inertia(const Dataset& data, const Matrix& centroids, const Assignment& asg) {
    if (asg.cells.size() != data.size()) throw DimensionError("assignment length does not match dataset size");
    if (centroids.cols() != data.dim()) throw DimensionError("centroid dimension does not match data");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (asg.cells[i] >= centroids.rows()) throw IndexError("assignment references a missing centroid");
        total += squared_distance(data.point(i), centroids.row(asg.cells[i]));
    }
    return total;
}

Contingency contingency(Labels predicted, Labels truth) {
    check_pair(predicted, truth, 0);
    std::size_t rows = 0, cols = 0;
    const auto p = dense_labels(predicted, rows);
    const auto t = dense_labels(truth, cols);
    Contingency out;
    out.table.assign(rows, std::vector<std::int64_t>(cols, 0));
    out.row_sums.assign(rows, 0);
    out.col_sums.assign(cols, 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        ++out.table[p[i]][t[i]];
        ++out.row_sums[p[i]];
        ++out.col_sums[t[i]];
    }
    out.total = static_cast<std::int64_t>(p.size());
    return out;
}

double purity(Labels predicted, Labels truth) {
    check_pair(predicted, truth, 1);
    const auto ct = contingency(predicted, truth);
    std::int64_t majority = 0;
    for (const auto& row : ct.table) majority += *std::max_element(row.begin(), row.end());
    return static_cast<double>(majority) / static_cast<double>(ct.total);
}

double ari(Labels predicted, Labels truth) {
    check_pair(predicted, truth, 2);
    const auto ct = contingency(predicted, truth);
    double index = 0.0;
    for (const auto& row : ct.table)
        for (auto c : row) index += choose2(c);
    double rows = 0.0, cols = 0.0;
    for (auto a : ct.row_sums) rows += choose2(a);
    for (auto b : ct.col_sums) cols += choose2(b);
    const double expected = rows * cols / choose2(ct.total);
    const double maximum = 0.5 * (rows + cols);
    if (maximum == expected) return 1.0;
    return (index - expected) / (maximum - expected);
}

double nmi(Labels predicted, Labels truth) {
    check_pair(predicted, truth, 1);
    const auto ct = contingency(predicted, truth);
    if (ct.row_sums.size() == 1 && ct.col_sums.size() == 1) return 1.0;
    const double n = static_cast<double>(ct.total);
    double mi = 0.0;
    for (std::size_t i = 0; i < ct.table.size(); ++i)
        for (std::size_t j = 0; j < ct.table[i].size(); ++j) {
            const auto c = ct.table[i][j];
            if (c == 0) continue;
            const double pij = static_cast<double>(c) / n;
            mi += pij * std::log(pij * n * n / (static_cast<double>(ct.row_sums[i]) * static_cast<double>(ct.col_sums[j])));
        }
    const double mean_entropy = 0.5 * (entropy(ct.row_sums, n) + entropy(ct.col_sums, n));
    if (mean_entropy <= 0.0) return 1.0;
    return std::clamp(mi / mean_entropy, 0.0, 1.0);
}

std::vector<std::size_t> max_weight_matching(const std::vector<std::vector<std::int64_t>>& weights) {
    // Kuhn-Munkres with potentials on the cost matrix (max - w), 1-based internally.
    const std::size_t n = weights.size();
    if (n == 0) return {};
    std::int64_t wmax = 0;
    for (const auto& row : weights) {
        if (row.size() != n) throw DimensionError("matching needs a square weight matrix");
        for (auto w : row) wmax = std::max(wmax, w);
    }
    constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<std::int64_t> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            std::int64_t delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const std::int64_t cur = (wmax - weights[i0 - 1][j - 1]) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

double acc(Labels predicted, Labels truth) {
    check_pair(predicted, truth, 1);
    const auto ct = contingency(predicted, truth);
    const std::size_t size = std::max(ct.row_sums.size(), ct.col_sums.size());
    std::vector<std::vector<std::int64_t>> padded(size, std::vector<std::int64_t>(size, 0));
    for (std::size_t i = 0; i < ct.table.size(); ++i)
        for (std::size_t j = 0; j < ct.table[i].size(); ++j) padded[i][j] = ct.table[i][j];
    const auto match = max_weight_matching(padded);
    std::int64_t matched = 0;
    for (std::size_t i = 0; i < size; ++i) matched += padded[i][match[i]];
    return static_cast<double>(matched) / static_cast<double>(ct.total);
}

ParamReport param_report(std::span<const std::size_t> cardinalities, std::size_t m, ModelKind kind) {
    if (cardinalities.empty()) throw ConfigError("param_report needs at least one cardinality");
    ParamReport r;
    r.model_kind = kind;
    r.represented_centroids = cell_count(cardinalities);
    if (kind == ModelKind::Lloyd) {
        r.vector_count = r.represented_centroids;
    } else {
        for (auto h : cardinalities) r.vector_count += h;
    }
    r.scalar_count = r.vector_count * m;
    r.ratio_vs_full = static_cast<double>(r.vector_count) / static_cast<double>(r.represented_centroids);
    return r;
}

std::string_view to_string(ModelKind kind) noexcept {
    return kind == ModelKind::Lloyd ? "lloyd" : "khatri_rao";
}

}  // namespace krclust
