#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "aumap/types.hpp"

namespace aumap {

enum class IndexStrategy { brute_force, kd_tree };

IndexStrategy parse_strategy(const std::string& name);
const char* strategy_name(IndexStrategy strategy);

// Exact k-nearest-neighbor index over a fixed reference point set.
//
// Both strategies return identical NeighborSets for every query: results are
// the k smallest (distance, index) pairs under lexicographic order, with all
// distances produced by the canonical kernel in distance.hpp. kd_tree is the
// default; brute_force is the obviously-correct baseline kept as the oracle.
//
// Immutable after build; concurrent queries need no synchronization.
class KnnIndex {
public:
    KnnIndex() = default;

    static KnnIndex build(Matrix points, IndexStrategy strategy = IndexStrategy::kd_tree);

    // k reference points closest to x, sorted ascending by (distance, index).
    NeighborSet query(std::span<const double> x, std::size_t k) const;

    // Row-wise equivalent of query(); out[i] == query(queries.row(i), k).
    // Large batches go through a blocked dot-product prefilter with a
    // certified error margin, then exact re-evaluation of the candidates, so
    // outputs stay bit-identical to the per-point path.
    std::vector<NeighborSet> query_batch(const Matrix& queries, std::size_t k) const;

    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dim() const noexcept { return points_.cols(); }
    IndexStrategy strategy() const noexcept { return strategy_; }
    const Matrix& points() const noexcept { return points_; }

private:
    struct Node {
        // Inner node: axis >= 0, children at left/right. Leaf: axis == -1,
        // [begin, end) indexes into order_.
        std::int32_t axis = -1;
        double split = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
    };

    void build_tree();
    std::uint32_t build_node(std::uint32_t begin, std::uint32_t end);
    void check_query(std::span<const double> x, std::size_t k) const;
    NeighborSet query_kd(std::span<const double> x, std::size_t k) const;
    NeighborSet query_brute(std::span<const double> x, std::size_t k) const;

    Matrix points_;
    IndexStrategy strategy_ = IndexStrategy::kd_tree;

    // kd-tree storage (kd_tree strategy only).
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;

    // Blocked batch evaluation: reference rows packed into panels of eight
    // (panel-major, coordinate-major within a panel) plus per-row squared
    // norms for the dot-product distance form.
    std::vector<double> packed_;
    std::vector<double> sq_norms_;
};

}  // namespace aumap
