#include "aumap/projector.hpp"

#include <cmath>
#include <string>

#include "aumap/error.hpp"

namespace aumap {

Projector Projector::fit(ReferenceEmbedding embedding, ProjectorConfig config,
                         IndexStrategy strategy) {
    validate_embedding(embedding);
    if (config.k < 1 || config.k > embedding.size())
        raise(ErrorCode::k_too_large, "k=" + std::to_string(config.k) + " outside [1, " +
                                          std::to_string(embedding.size()) + "]");
    if (!(config.zero_distance_epsilon >= 0.0))
        raise(ErrorCode::invalid_config, "zero_distance_epsilon must be non-negative");

    Projector p;
    p.index_ = KnnIndex::build(embedding.inputs, strategy);
    p.embedding_ = std::move(embedding);
    p.config_ = config;
    return p;
}

void Projector::check_point(std::span<const double> x) const {
    if (x.size() != input_dim())
        raise(ErrorCode::dimension_mismatch,
              "point has dimension " + std::to_string(x.size()) + ", embedding expects " +
                  std::to_string(input_dim()));
    if (!all_finite(x))
        raise(ErrorCode::non_finite_value, "point contains a non-finite value");
}

// Combines the neighbors' projections into out[0..m). Weights are computed as
// (min_d/d_i) / sum_j (min_d/d_j) — identical to 1/d_i weighting after
// normalization, but immune to overflow when one distance is tiny.
void Projector::combine(const NeighborSet& neighbors, double* out,
                        std::vector<double>* weights_out, bool* zero_out) const {
    const std::size_t m = output_dim();
    const double eps = config_.zero_distance_epsilon;
    const Matrix& proj = embedding_.projections;

    // Neighbors are sorted ascending, so duplicates form a prefix.
    std::size_t dup = 0;
    while (dup < neighbors.size() && neighbors[dup].distance <= eps) ++dup;

    for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
    if (dup > 0) {
        const double w = 1.0 / static_cast<double>(dup);
        for (std::size_t i = 0; i < dup; ++i) {
            const double* u = proj.row_ptr(neighbors[i].index);
            for (std::size_t j = 0; j < m; ++j) out[j] += u[j];
        }
        for (std::size_t j = 0; j < m; ++j) out[j] *= w;
        if (weights_out) {
            weights_out->assign(neighbors.size(), 0.0);
            for (std::size_t i = 0; i < dup; ++i) (*weights_out)[i] = w;
        }
        if (zero_out) *zero_out = true;
        return;
    }

    const double min_d = neighbors.front().distance;
    double total = 0.0;
    for (const Neighbor& nb : neighbors) total += min_d / nb.distance;
    if (weights_out) weights_out->clear();
    for (const Neighbor& nb : neighbors) {
        const double w = (min_d / nb.distance) / total;
        const double* u = proj.row_ptr(nb.index);
        for (std::size_t j = 0; j < m; ++j) out[j] += w * u[j];
        if (weights_out) weights_out->push_back(w);
    }
    if (zero_out) *zero_out = false;
}

Projection Projector::project_point(std::span<const double> x) const {
    check_point(x);
    const NeighborSet neighbors = index_.query(x, config_.k);
    Projection u(output_dim());
    combine(neighbors, u.data(), nullptr, nullptr);
    return u;
}

Projector::Detail Projector::project_point_detail(std::span<const double> x) const {
    check_point(x);
    Detail d;
    d.neighbors = index_.query(x, config_.k);
    d.projection.resize(output_dim());
    combine(d.neighbors, d.projection.data(), &d.weights, &d.zero_distance);
    return d;
}

Matrix Projector::project_batch(const Matrix& xs) const {
    const std::size_t m = output_dim();
    if (xs.rows() == 0) return Matrix(0, m);
    for (std::size_t i = 0; i < xs.rows(); ++i) {
        try {
            check_point(xs.row(i));
        } catch (const Error& e) {
            raise(e.code(), "point " + std::to_string(i) + ": " + e.what());
        }
    }

    const std::vector<NeighborSet> neighbors = index_.query_batch(xs, config_.k);
    Matrix out(xs.rows(), m);
    for (std::size_t i = 0; i < xs.rows(); ++i)
        combine(neighbors[i], out.row(i).data(), nullptr, nullptr);
    return out;
}

}  // namespace aumap
