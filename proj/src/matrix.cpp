#include "krclust/matrix.hpp"

#include <algorithm>

namespace krclust {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("ragged matrix initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix out(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != out.cols_) throw DimensionError("ragged matrix rows");
        out.set_row(r, rows[r]);
    }
    return out;
}

void Matrix::set_row(std::size_t r, std::span<const double> values) {
    if (values.size() != cols_) throw DimensionError("row length does not match matrix columns");
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
}

}  // namespace krclust
