#include "aumap/types.hpp"

#include <cmath>
#include <string>

namespace aumap {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        raise(ErrorCode::count_mismatch,
              "matrix data size " + std::to_string(data_.size()) + " does not match " +
                  std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            raise(ErrorCode::dimension_mismatch,
                  "row " + std::to_string(i) + " has length " +
                      std::to_string(rows[i].size()) + ", expected " + std::to_string(cols));
        }
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        auto r = row(i);
        out[i].assign(r.begin(), r.end());
    }
    return out;
}

bool all_finite(std::span<const double> values) noexcept {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void validate_embedding(const ReferenceEmbedding& embedding) {
    if (embedding.inputs.rows() == 0) {
        raise(ErrorCode::empty_embedding, "reference embedding has no points");
    }
    if (embedding.inputs.rows() != embedding.projections.rows()) {
        raise(ErrorCode::count_mismatch,
              "inputs count " + std::to_string(embedding.inputs.rows()) +
                  " != projections count " + std::to_string(embedding.projections.rows()));
    }
    if (embedding.inputs.cols() == 0) {
        raise(ErrorCode::dimension_mismatch, "input dimensionality must be at least 1");
    }
    if (embedding.projections.cols() == 0) {
        raise(ErrorCode::dimension_mismatch, "projection dimensionality must be at least 1");
    }
    if (!all_finite(embedding.inputs.data())) {
        raise(ErrorCode::non_finite_value, "reference inputs contain a NaN or infinity");
    }
    if (!all_finite(embedding.projections.data())) {
        raise(ErrorCode::non_finite_value, "reference projections contain a NaN or infinity");
    }
}

void validate_points(const Matrix& points) {
    if (points.rows() == 0) {
        raise(ErrorCode::empty_input, "point set is empty");
    }
    if (points.cols() == 0) {
        raise(ErrorCode::dimension_mismatch, "points must have dimensionality of at least 1");
    }
    if (!all_finite(points.data())) {
        raise(ErrorCode::non_finite_value, "point set contains a NaN or infinity");
    }
}

}  // namespace aumap
