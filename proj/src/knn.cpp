#include "aumap/knn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "aumap/distance.hpp"
#include "aumap/error.hpp"
#include "knn_kernels.hpp"

namespace aumap {
namespace {

constexpr std::uint32_t kLeafSize = 16;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Candidate in squared-distance space; ties break toward the smaller index.
struct Cand {
    double d2;
    std::uint32_t idx;
};

bool cand_less(const Cand& a, const Cand& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.idx < b.idx);
}

NeighborSet finish(std::vector<Cand>& cands, std::size_t k) {
    if (cands.size() > k) {
        std::nth_element(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k - 1),
                         cands.end(), cand_less);
        cands.resize(k);
    }
    std::sort(cands.begin(), cands.end(), cand_less);
    NeighborSet out;
    out.reserve(cands.size());
    for (const Cand& c : cands) out.push_back({c.idx, std::sqrt(c.d2)});
    return out;
}

double squared_norm(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

}  // namespace

IndexStrategy parse_strategy(const std::string& name) {
    if (name == "brute_force") return IndexStrategy::brute_force;
    if (name == "kd_tree") return IndexStrategy::kd_tree;
    raise(ErrorCode::parse_error, "unknown index strategy '" + name + "'");
}

const char* strategy_name(IndexStrategy strategy) {
    return strategy == IndexStrategy::brute_force ? "brute_force" : "kd_tree";
}

KnnIndex KnnIndex::build(Matrix points, IndexStrategy strategy) {
    validate_points(points);
    KnnIndex index;
    index.points_ = std::move(points);
    index.strategy_ = strategy;

    const std::size_t n = index.points_.rows();
    const std::size_t d = index.points_.cols();
    const std::size_t panels = (n + detail::kPanelWidth - 1) / detail::kPanelWidth;

    index.packed_.assign(panels * d * detail::kPanelWidth, 0.0);
    for (std::size_t p = 0; p < panels; ++p) {
        double* dst = index.packed_.data() + p * d * detail::kPanelWidth;
        for (std::size_t lane = 0; lane < detail::kPanelWidth; ++lane) {
            const std::size_t i = p * detail::kPanelWidth + lane;
            if (i >= n) break;
            const double* row = index.points_.row_ptr(i);
            for (std::size_t c = 0; c < d; ++c) dst[c * detail::kPanelWidth + lane] = row[c];
        }
    }
    index.sq_norms_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        index.sq_norms_[i] = squared_norm(index.points_.row_ptr(i), d);

    if (strategy == IndexStrategy::kd_tree) index.build_tree();
    return index;
}

void KnnIndex::build_tree() {
    const std::size_t n = points_.rows();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.clear();
    nodes_.reserve(n / (kLeafSize / 2) + 2);
    build_node(0, static_cast<std::uint32_t>(n));
}

std::uint32_t KnnIndex::build_node(std::uint32_t begin, std::uint32_t end) {
    const auto me = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    const std::size_t d = points_.cols();
    std::int32_t axis = -1;
    double best_spread = 0.0;
    if (end - begin > kLeafSize) {
        for (std::size_t a = 0; a < d; ++a) {
            double lo = kInf, hi = -kInf;
            for (std::uint32_t t = begin; t < end; ++t) {
                const double v = points_(order_[t], a);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double spread = hi - lo;
            if (spread > best_spread) {
                best_spread = spread;
                axis = static_cast<std::int32_t>(a);
            }
        }
    }

    // Leaf: small enough, or every remaining point is identical.
    if (axis < 0) {
        nodes_[me].begin = begin;
        nodes_[me].end = end;
        return me;
    }

    const std::uint32_t mid = begin + (end - begin) / 2;
    const auto a = static_cast<std::size_t>(axis);
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t lhs, std::uint32_t rhs) {
                         const double lv = points_(lhs, a), rv = points_(rhs, a);
                         return lv < rv || (lv == rv && lhs < rhs);
                     });
    const double split = points_(order_[mid], a);
    const std::uint32_t left = build_node(begin, mid);
    const std::uint32_t right = build_node(mid, end);
    nodes_[me].axis = axis;
    nodes_[me].split = split;
    nodes_[me].left = left;
    nodes_[me].right = right;
    return me;
}

void KnnIndex::check_query(std::span<const double> x, std::size_t k) const {
    if (x.size() != dim())
        raise(ErrorCode::dimension_mismatch,
              "query has dimension " + std::to_string(x.size()) + ", index expects " +
                  std::to_string(dim()));
    if (k < 1 || k > size())
        raise(ErrorCode::k_too_large, "k=" + std::to_string(k) + " outside [1, " +
                                          std::to_string(size()) + "]");
    if (!all_finite(x))
        raise(ErrorCode::non_finite_value, "query contains a non-finite value");
}

NeighborSet KnnIndex::query(std::span<const double> x, std::size_t k) const {
    check_query(x, k);
    return strategy_ == IndexStrategy::brute_force ? query_brute(x, k) : query_kd(x, k);
}

NeighborSet KnnIndex::query_brute(std::span<const double> x, std::size_t k) const {
    const std::size_t n = size(), d = dim();
    std::vector<Cand> cands(n);
    for (std::size_t i = 0; i < n; ++i)
        cands[i] = {squared_distance(x.data(), points_.row_ptr(i), d),
                    static_cast<std::uint32_t>(i)};
    return finish(cands, k);
}

NeighborSet KnnIndex::query_kd(std::span<const double> x, std::size_t k) const {
    const std::size_t d = dim();
    // Max-heap keyed by (d2, idx): top is the current worst of the k best.
    const auto worse = [](const Cand& a, const Cand& b) { return cand_less(a, b); };
    std::priority_queue<Cand, std::vector<Cand>, decltype(worse)> best(worse);

    // Slightly inflated prune bound: a subtree is skipped only when its
    // plane gap provably exceeds the worst kept distance even after the
    // rounding in gap*gap and in the distance kernel itself.
    const auto limit = [&]() -> double {
        return best.size() < k ? kInf : best.top().d2 * (1.0 + 1e-12);
    };

    // (gap^2 at push time, node); fars are re-tested against the tightened
    // bound when popped. Depth is logarithmic, but size generously anyway.
    std::vector<std::pair<double, std::uint32_t>> pending;
    pending.reserve(64);
    pending.emplace_back(0.0, 0u);

    while (!pending.empty()) {
        auto [gap2, ni] = pending.back();
        pending.pop_back();
        if (gap2 > limit()) continue;

        // Descend to the leaf nearest x, queueing the far sides.
        while (nodes_[ni].axis >= 0) {
            const Node& node = nodes_[ni];
            const auto a = static_cast<std::size_t>(node.axis);
            const bool go_left = x[a] < node.split;
            const double gap = go_left ? node.split - x[a] : x[a] - node.split;
            const std::uint32_t far = go_left ? node.right : node.left;
            pending.emplace_back(gap * gap, far);
            ni = go_left ? node.left : node.right;
        }

        const Node& leaf = nodes_[ni];
        for (std::uint32_t t = leaf.begin; t < leaf.end; ++t) {
            const std::uint32_t idx = order_[t];
            const bool full = best.size() == k;
            const double bound = full ? best.top().d2 : kInf;
            const double d2 = squared_distance_bounded(x.data(), points_.row_ptr(idx), d, bound);
            if (!full) {
                best.push({d2, idx});
            } else if (cand_less({d2, idx}, best.top())) {
                best.pop();
                best.push({d2, idx});
            }
        }
    }

    std::vector<Cand> cands;
    cands.reserve(best.size());
    while (!best.empty()) {
        cands.push_back(best.top());
        best.pop();
    }
    return finish(cands, k);
}

std::vector<NeighborSet> KnnIndex::query_batch(const Matrix& queries, std::size_t k) const {
    const std::size_t m = queries.rows();
    if (m == 0) return {};
    for (std::size_t i = 0; i < m; ++i) check_query(queries.row(i), k);
    if (m == 1) return {query(queries.row(0), k)};

    const std::size_t n = size(), d = dim();
    const std::size_t panels = (n + detail::kPanelWidth - 1) / detail::kPanelWidth;
    const std::size_t n8 = panels * detail::kPanelWidth;
    const auto& ker = detail::panel_kernels();

    std::vector<double> qq(m);
    for (std::size_t i = 0; i < m; ++i) qq[i] = squared_norm(queries.row_ptr(i), d);

    // Raw query-by-reference dot products, built panel-block by panel-block so
    // each packed block stays cache-resident across all query groups.
    std::vector<double> dots(m * n8);
    const std::size_t block = 32;
    double tmp[8 * detail::kPanelWidth];
    const double* qptr[8];
    for (std::size_t pb = 0; pb < panels; pb += block) {
        const std::size_t pe = std::min(panels, pb + block);
        for (std::size_t q0 = 0; q0 < m; q0 += ker.max_group) {
            const std::size_t nq = std::min(ker.max_group, m - q0);
            for (std::size_t j = 0; j < nq; ++j) qptr[j] = queries.row_ptr(q0 + j);
            for (std::size_t p = pb; p < pe; ++p) {
                ker.dots(packed_.data() + p * d * detail::kPanelWidth, qptr, nq, d, tmp);
                for (std::size_t j = 0; j < nq; ++j)
                    std::memcpy(&dots[(q0 + j) * n8 + p * detail::kPanelWidth],
                                tmp + j * detail::kPanelWidth,
                                detail::kPanelWidth * sizeof(double));
            }
        }
    }

    // |fl(q.q + r.r - 2 q.r) - canonical d2| is bounded by a small multiple of
    // (|q|^2 + |r|^2) * dim * eps; the factor below leaves an order of
    // magnitude of headroom, and every survivor is re-evaluated exactly.
    const double margin_scale =
        64.0 * static_cast<double>(d + 16) * std::numeric_limits<double>::epsilon();

    std::vector<NeighborSet> out(m);
    std::vector<Cand> exact;
    for (std::size_t qi = 0; qi < m; ++qi) {
        const double* g = &dots[qi * n8];
        const double qn = qq[qi];

        // tau = k-th smallest certified upper bound.
        std::priority_queue<double> uppers;
        for (std::size_t i = 0; i < n; ++i) {
            const double d2g = qn + sq_norms_[i] - 2.0 * g[i];
            const double u = d2g + margin_scale * (qn + sq_norms_[i]);
            if (uppers.size() < k) {
                uppers.push(u);
            } else if (u < uppers.top()) {
                uppers.pop();
                uppers.push(u);
            }
        }
        const double tau = uppers.top();

        exact.clear();
        if (!std::isfinite(tau)) {
            // Overflow in the dot-product form; fall back to a full rescan.
            for (std::size_t i = 0; i < n; ++i)
                exact.push_back({squared_distance(queries.row_ptr(qi), points_.row_ptr(i), d),
                                 static_cast<std::uint32_t>(i)});
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double d2g = qn + sq_norms_[i] - 2.0 * g[i];
                if (d2g - margin_scale * (qn + sq_norms_[i]) <= tau)
                    exact.push_back(
                        {squared_distance(queries.row_ptr(qi), points_.row_ptr(i), d),
                         static_cast<std::uint32_t>(i)});
            }
        }
        out[qi] = finish(exact, k);
    }
    return out;
}

}  // namespace aumap
