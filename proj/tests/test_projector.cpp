#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "aumap/error.hpp"
#include "aumap/projector.hpp"
#include "aumap/rng.hpp"
#include "oracles.hpp"

using namespace aumap;

namespace {

Projector triangle_projector(std::size_t k) {
    ReferenceEmbedding e;
    e.inputs = Matrix::from_rows({{0, 0}, {2, 0}, {0, 2}});
    e.projections = Matrix::from_rows({{0, 0}, {1, 0}, {0, 1}});
    ProjectorConfig config;
    config.k = k;
    return Projector::fit(std::move(e), config);
}

struct RandomInstance {
    ReferenceEmbedding embedding;
    std::vector<double> x;
    std::size_t k;
};

RandomInstance random_instance(Xoshiro256StarStar& rng, std::size_t max_n, std::size_t max_d) {
    RandomInstance inst;
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next() % max_n);
    const std::size_t d = 1 + static_cast<std::size_t>(rng.next() % max_d);
    inst.embedding.inputs = oracles::random_matrix(rng, n, d);
    inst.embedding.projections = oracles::random_matrix(rng, n, 2);
    inst.k = 1 + static_cast<std::size_t>(rng.next() % n);
    inst.x.resize(d);
    for (auto& v : inst.x) v = rng.uniform(-1.2, 1.2);
    return inst;
}

}  // namespace

TEST_CASE("equidistant neighbors average their projections") {
    const Projector p = triangle_projector(2);
    const Projection u = p.project_point(std::vector<double>{1, 0});
    REQUIRE(u.size() == 2);
    CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("an exact duplicate reproduces its training projection exactly") {
    const Projector p = triangle_projector(2);
    const Projection u = p.project_point(std::vector<double>{2, 0});
    CHECK(u[0] == 1.0);
    CHECK(u[1] == 0.0);

    Xoshiro256StarStar rng(5);
    ReferenceEmbedding e;
    e.inputs = oracles::random_matrix(rng, 30, 6, -50.0, 50.0);
    e.projections = oracles::random_matrix(rng, 30, 2, -3.0, 3.0);
    const Matrix inputs = e.inputs;
    const Matrix projections = e.projections;
    const Projector q = Projector::fit(std::move(e), {.k = 7});
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        const Projection u2 = q.project_point(inputs.row(i));
        CHECK(u2[0] == projections(i, 0));
        CHECK(u2[1] == projections(i, 1));
    }
}

TEST_CASE("k=1 returns the nearest neighbor's projection") {
    const Projector p = triangle_projector(1);
    const Projection u = p.project_point(std::vector<double>{1.9, 0.1});
    CHECK(u[0] == 1.0);
    CHECK(u[1] == 0.0);
}

TEST_CASE("tied duplicates average: midpoint of two coincident references") {
    ReferenceEmbedding e;
    e.inputs = Matrix::from_rows({{1, 1}, {1, 1}, {5, 5}});
    e.projections = Matrix::from_rows({{0, 0}, {4, 2}, {9, 9}});
    const Projector p = Projector::fit(std::move(e), {.k = 3});
    const Projection u = p.project_point(std::vector<double>{1, 1});
    CHECK(u[0] == 2.0);  // mean of the two zero-distance projections only
    CHECK(u[1] == 1.0);
}

TEST_CASE("matches the direct weighted-average evaluation on random instances") {
    Xoshiro256StarStar rng(2024);
    for (int it = 0; it < 400; ++it) {
        const RandomInstance inst = random_instance(rng, 50, 10);
        const Projector p = Projector::fit(inst.embedding, {.k = inst.k});
        const Projection got = p.project_point(inst.x);
        const std::vector<double> want = oracles::naive_weighted_projection(
            inst.embedding.inputs, inst.embedding.projections, inst.x, inst.k);
        for (std::size_t j = 0; j < got.size(); ++j) CHECK(oracles::close(got[j], want[j], 1e-9));
    }
}

TEST_CASE("output stays in the convex hull of neighbor projections") {
    Xoshiro256StarStar rng(31);
    for (int it = 0; it < 100; ++it) {
        const RandomInstance inst = random_instance(rng, 40, 8);
        const Projector p = Projector::fit(inst.embedding, {.k = inst.k});
        const Projector::Detail detail = p.project_point_detail(inst.x);
        if (detail.zero_distance) continue;
        for (std::size_t j = 0; j < 2; ++j) {
            double lo = 1e300, hi = -1e300;
            for (const Neighbor& nb : detail.neighbors) {
                lo = std::min(lo, inst.embedding.projections(nb.index, j));
                hi = std::max(hi, inst.embedding.projections(nb.index, j));
            }
            CHECK(detail.projection[j] >= lo - 1e-12);
            CHECK(detail.projection[j] <= hi + 1e-12);
        }
    }
}

TEST_CASE("weights are positive and sum to one") {
    Xoshiro256StarStar rng(77);
    for (int it = 0; it < 100; ++it) {
        const RandomInstance inst = random_instance(rng, 40, 8);
        const Projector p = Projector::fit(inst.embedding, {.k = inst.k});
        const Projector::Detail detail = p.project_point_detail(inst.x);
        const double sum =
            std::accumulate(detail.weights.begin(), detail.weights.end(), 0.0);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        if (!detail.zero_distance)
            for (const double w : detail.weights) CHECK(w > 0.0);
    }
}

TEST_CASE("scaling all inputs and the query leaves the projection unchanged") {
    Xoshiro256StarStar rng(55);
    for (const double c : {1e-6, 3.0, 1e6}) {
        const RandomInstance inst = random_instance(rng, 40, 8);
        const Projector p = Projector::fit(inst.embedding, {.k = inst.k});
        const Projection base = p.project_point(inst.x);

        ReferenceEmbedding scaled = inst.embedding;
        for (double& v : scaled.inputs.data()) v *= c;
        std::vector<double> sx = inst.x;
        for (double& v : sx) v *= c;
        const Projector ps = Projector::fit(std::move(scaled), {.k = inst.k});
        const Projection got = ps.project_point(sx);
        for (std::size_t j = 0; j < got.size(); ++j)
            CHECK(std::abs(got[j] - base[j]) <= 1e-12 * std::max(1.0, std::abs(base[j])));
    }
}

TEST_CASE("the neighbor enumeration order does not matter") {
    // Re-evaluate the weighted sum over reversed neighbors; identical within
    // floating-point reassociation slack.
    Xoshiro256StarStar rng(88);
    const RandomInstance inst = random_instance(rng, 40, 8);
    const Projector p = Projector::fit(inst.embedding, {.k = inst.k});
    const Projector::Detail detail = p.project_point_detail(inst.x);
    std::vector<double> reversed(2, 0.0);
    for (std::size_t r = detail.neighbors.size(); r-- > 0;)
        for (std::size_t j = 0; j < 2; ++j)
            reversed[j] +=
                detail.weights[r] * inst.embedding.projections(detail.neighbors[r].index, j);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(reversed[j] - detail.projection[j]) <= 1e-12);
}

TEST_CASE("project_batch equals per-point calls") {
    Xoshiro256StarStar rng(123);
    ReferenceEmbedding e;
    e.inputs = oracles::random_matrix(rng, 80, 5);
    e.projections = oracles::random_matrix(rng, 80, 2);
    const Projector p = Projector::fit(std::move(e), {.k = 10});

    const Matrix xs = oracles::random_matrix(rng, 37, 5);
    const Matrix batch = p.project_batch(xs);
    REQUIRE(batch.rows() == 37);
    for (std::size_t i = 0; i < xs.rows(); ++i) {
        const Projection single = p.project_point(xs.row(i));
        CHECK(batch(i, 0) == single[0]);
        CHECK(batch(i, 1) == single[1]);
    }

    CHECK(p.project_batch(Matrix(0, 5)).rows() == 0);
}

TEST_CASE("one large batch equals many small batches") {
    Xoshiro256StarStar rng(321);
    ReferenceEmbedding e;
    e.inputs = oracles::random_matrix(rng, 100, 6);
    e.projections = oracles::random_matrix(rng, 100, 2);
    const Projector p = Projector::fit(std::move(e));

    const Matrix xs = oracles::random_matrix(rng, 500, 6);
    const Matrix whole = p.project_batch(xs);
    for (std::size_t start = 0; start < 500; start += 5) {
        Matrix chunk(5, 6);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 6; ++j) chunk(i, j) = xs(start + i, j);
        const Matrix part = p.project_batch(chunk);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(part(i, 0) == whole(start + i, 0));
            CHECK(part(i, 1) == whole(start + i, 1));
        }
    }
}

TEST_CASE("fit validation") {
    ReferenceEmbedding iris_shaped;
    Xoshiro256StarStar rng(9);
    iris_shaped.inputs = oracles::random_matrix(rng, 150, 4);
    iris_shaped.projections = oracles::random_matrix(rng, 150, 2);
    CHECK_NOTHROW(Projector::fit(iris_shaped, {.k = 15}));
    CHECK_NOTHROW(Projector::fit(iris_shaped, {.k = 150}));
    CHECK_THROWS_AS(Projector::fit(iris_shaped, {.k = 200}), Error);
    CHECK_THROWS_AS(Projector::fit(iris_shaped, {.k = 0}), Error);
    CHECK_THROWS_AS(Projector::fit(iris_shaped, {.k = 5, .zero_distance_epsilon = -1.0}),
                    Error);
}

TEST_CASE("projection errors carry the failing position in batches") {
    const Projector p = triangle_projector(2);
    CHECK_THROWS_AS(static_cast<void>(p.project_point(std::vector<double>{1, 2, 3})), Error);
    const std::vector<double> bad{std::nan(""), 1.0};
    CHECK_THROWS_AS(static_cast<void>(p.project_point(bad)), Error);

    Matrix xs = Matrix::from_rows({{0, 0}, {1, 1}, {std::nan(""), 0}});
    try {
        static_cast<void>(p.project_batch(xs));
        FAIL("expected non_finite_value");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite_value);
        CHECK(std::string(e.what()).find("point 2") != std::string::npos);
    }
}
