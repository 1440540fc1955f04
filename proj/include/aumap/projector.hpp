#pragma once

#include <span>
#include <vector>

#include "aumap/knn.hpp"
#include "aumap/types.hpp"

namespace aumap {

// Out-of-sample projection over a frozen reference embedding: a novel point is
// mapped to the inverse-distance-weighted average of the low-dimensional
// projections of its k nearest reference inputs.
//
// Immutable after fit(); projection calls are pure and safe to run
// concurrently from any number of threads.
class Projector {
public:
    Projector() = default;

    static Projector fit(ReferenceEmbedding embedding, ProjectorConfig config = {},
                         IndexStrategy strategy = IndexStrategy::kd_tree);

    // Projects one point. If any neighbor lies within zero_distance_epsilon,
    // returns the arithmetic mean of all such neighbors' projections (the
    // limit of the weighting as those distances go to zero); otherwise the
    // weight of neighbor i is (1/d_i) / sum_j (1/d_j).
    Projection project_point(std::span<const double> x) const;

    // Row-wise project_point; output row i equals project_point(xs.row(i)).
    // Batching changes throughput only, never results.
    Matrix project_batch(const Matrix& xs) const;

    // Everything project_point derives on the way to its answer; the weights
    // always sum to 1. Intended for inspection and tests.
    struct Detail {
        NeighborSet neighbors;
        std::vector<double> weights;   // aligned with neighbors
        bool zero_distance = false;    // duplicate rule applied
        Projection projection;
    };
    Detail project_point_detail(std::span<const double> x) const;

    const ReferenceEmbedding& embedding() const noexcept { return embedding_; }
    const ProjectorConfig& config() const noexcept { return config_; }
    const KnnIndex& index() const noexcept { return index_; }
    std::size_t input_dim() const noexcept { return embedding_.input_dim(); }
    std::size_t output_dim() const noexcept { return embedding_.output_dim(); }

private:
    void check_point(std::span<const double> x) const;
    void combine(const NeighborSet& neighbors, double* out,
                 std::vector<double>* weights_out, bool* zero_out) const;

    ReferenceEmbedding embedding_;
    ProjectorConfig config_;
    KnnIndex index_;
};

}  // namespace aumap
