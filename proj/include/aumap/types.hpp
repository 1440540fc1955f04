#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aumap/error.hpp"

namespace aumap {

using Point = std::vector<double>;
using Projection = std::vector<double>;

// Dense row-major matrix of doubles. Rows are points, columns are coordinates.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    // Builds a matrix from row vectors; all rows must have the same length.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * cols_, cols_};
    }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    std::vector<std::vector<double>> to_rows() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Paired training inputs (N x D) and their low-dimensional projections (N x m).
// The pairing is positional: inputs.row(i) was projected to projections.row(i).
struct ReferenceEmbedding {
    Matrix inputs;
    Matrix projections;

    std::size_t size() const noexcept { return inputs.rows(); }
    std::size_t input_dim() const noexcept { return inputs.cols(); }
    std::size_t output_dim() const noexcept { return projections.cols(); }

    friend bool operator==(const ReferenceEmbedding&, const ReferenceEmbedding&) = default;
};

struct Neighbor {
    std::size_t index;
    double distance;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Neighbors sorted ascending by distance, ties broken by smaller index.
using NeighborSet = std::vector<Neighbor>;

enum class Metric { euclidean };

struct ProjectorConfig {
    std::size_t k = 15;
    Metric metric = Metric::euclidean;
    // Neighbors at or below this distance are treated as exact duplicates of
    // the query; the projection is then the mean of their training projections.
    double zero_distance_epsilon = 1e-12;
};

bool all_finite(std::span<const double> values) noexcept;

// Checks every ReferenceEmbedding invariant; throws on the first violation.
// Error codes: empty_embedding, count_mismatch, dimension_mismatch, non_finite_value.
void validate_embedding(const ReferenceEmbedding& embedding);

// Checks that a point set is non-empty and fully finite (uniform dimensionality
// is guaranteed by the Matrix layout; from_rows rejects ragged input).
void validate_points(const Matrix& points);

}  // namespace aumap
