#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "krclust/error.hpp"

namespace krclust {

/// Dense row-major matrix of doubles. Rows are the unit of work everywhere
/// in this library (data points, protocentroids, centroids), so access is
/// row-oriented.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Builds from nested lists; all rows must have equal length.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    void set_row(std::size_t r, std::span<const double> values);

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Squared Euclidean distance between two equal-length vectors.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace krclust
