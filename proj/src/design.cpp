#include "krclust/design.hpp"

#include <cmath>
#include <map>

namespace krclust {

FactorPair balanced_factor_pair(std::size_t k) {
    if (k == 0) throw DomainError("k must be >= 1");
    std::size_t smaller = static_cast<std::size_t>(std::sqrt(static_cast<double>(k)));
    while (smaller * smaller > k) --smaller;
    while ((smaller + 1) * (smaller + 1) <= k) ++smaller;
    while (k % smaller != 0) --smaller;
    return FactorPair{k / smaller, smaller, smaller == 1 && k > 1};
}

namespace {

std::map<std::size_t, std::size_t> factorize(std::size_t v) {
    std::map<std::size_t, std::size_t> out;
    for (std::size_t f = 2; f * f <= v; ++f)
        while (v % f == 0) {
            ++out[f];
            v /= f;
        }
    if (v > 1) ++out[v];
    return out;
}

}  // namespace

int compare_representable(std::size_t b, std::size_t p1, std::size_t p2) {
    if (p1 == 0 || p2 == 0 || b % p1 != 0 || b % p2 != 0) throw DomainError("set counts must divide the budget");
    // Exact equality check on prime exponents: a1^p1 == a2^p2.
    auto f1 = factorize(b / p1);
    auto f2 = factorize(b / p2);
    bool equal = f1.size() == f2.size();
    if (equal)
        for (const auto& [prime, e] : f1) {
            auto it = f2.find(prime);
            if (it == f2.end() || e * p1 != it->second * p2) {
                equal = false;
                break;
            }
        }
    if (equal) return 0;
    const long double l1 = static_cast<long double>(p1) * std::log(static_cast<long double>(b / p1));
    const long double l2 = static_cast<long double>(p2) * std::log(static_cast<long double>(b / p2));
    return l1 < l2 ? -1 : 1;
}

SetCountChoice optimal_num_sets(std::size_t b) {
    if (b == 0) throw DomainError("vector budget must be >= 1");
    std::size_t best = 1;
    for (std::size_t p = 2; p <= b; ++p) {
        if (b % p != 0) continue;
        if (compare_representable(b, p, best) > 0) best = p;
    }
    const std::size_t size = b / best;
    return SetCountChoice{best, size, std::pow(static_cast<double>(size), static_cast<double>(best))};
}

SetCountBounds set_count_bounds(std::size_t k, std::size_t h_min) {
    if (h_min < 2) throw DomainError("h_min must be >= 2");
    if (k == 0) throw DomainError("k must be >= 1");
    return SetCountBounds{std::log(static_cast<double>(k)) / std::log(static_cast<double>(h_min)),
                          (k + h_min - 2) / (h_min - 1)};
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

HadamardReconstruction hadamard_reconstruct(const HadamardFactorization& hf) {
    if (hf.factors.empty()) throw DimensionError("Hadamard factorization needs at least one factor");
    const std::size_t d = hf.factors.front().first.rows();
    const std::size_t m = hf.factors.front().second.cols();
    HadamardReconstruction out;
    out.matrix = Matrix(d, m, 1.0);
    out.full_parameters = d * m;
    for (const auto& [a, b] : hf.factors) {
        if (a.rows() != d || b.cols() != m || a.cols() != b.rows() || a.cols() == 0)
            throw DimensionError("Hadamard factor shapes are not conformable to " + std::to_string(d) + "x" +
                                 std::to_string(m));
        const Matrix prod = matmul(a, b);
        auto dst = out.matrix.values();
        auto src = prod.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
        out.parameters += a.cols() * (d + m);
        out.rank_bound *= a.cols();
    }
    return out;
}

}  // namespace krclust
