#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "krclust/matrix.hpp"

namespace krclust {

struct FactorPair {
    std::size_t larger = 1;
    std::size_t smaller = 1;
    /// Set when k has no factorization other than k·1.
    bool no_compression = false;
};

/// The two factors of k closest in value, larger first.
FactorPair balanced_factor_pair(std::size_t k);

struct SetCountChoice {
    std::size_t num_sets = 1;
    std::size_t set_size = 1;
    /// (b / num_sets)^num_sets, as a double (may be inexact above 2^53).
    double representable = 1.0;
};

/// Among divisors p of the vector budget b, the one maximizing (b/p)^p.
/// Ties resolve to the smaller p.
SetCountChoice optimal_num_sets(std::size_t b);

/// Compares (b/p1)^p1 against (b/p2)^p2 exactly. Returns <0, 0, >0.
int compare_representable(std::size_t b, std::size_t p1, std::size_t p2);

struct SetCountBounds {
    double lower = 0.0;       // log_{h_min} k
    std::size_t upper = 0;    // ceil(k / (h_min - 1))
};

/// Throws DomainError when h_min < 2 or k = 0.
SetCountBounds set_count_bounds(std::size_t k, std::size_t h_min);

/// W = (A_1 B_1) ⊙ ... ⊙ (A_q B_q).
struct HadamardFactorization {
    std::vector<std::pair<Matrix, Matrix>> factors;
};

struct HadamardReconstruction {
    Matrix matrix;
    std::size_t parameters = 0;       // Σ r_i (d + m)
    std::size_t full_parameters = 0;  // d·m
    std::size_t rank_bound = 1;       // ∏ r_i
};

HadamardReconstruction hadamard_reconstruct(const HadamardFactorization& hf);

Matrix matmul(const Matrix& a, const Matrix& b);

}  // namespace krclust
