#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "aumap/accuracy.hpp"
#include "aumap/error.hpp"
#include "aumap/rng.hpp"
#include "oracles.hpp"

using namespace aumap;

namespace {

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size()))
        ++count;
    return count;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("identical clouds measure zero mean and variance") {
    const Matrix oracle = Matrix::from_rows({{0, 0}, {4, 0}, {0, 4}});
    const AccuracyReport r = normalized_mean_distance(oracle, oracle);
    CHECK(r.mean_distance == 0.0);
    CHECK(r.variance == 0.0);
    CHECK(r.n_points == 3);
    CHECK(r.sigma > 0.0);
}

TEST_CASE("a hand-checked case: unit spread, unit offsets") {
    // Oracle points at ±1 on the x axis: centroid (0,0), radial RMS spread 1.
    const Matrix oracle = Matrix::from_rows({{1, 0}, {-1, 0}});
    const Matrix approx = Matrix::from_rows({{1, 1}, {-1, -3}});
    const AccuracyReport r = normalized_mean_distance(approx, oracle);
    CHECK(r.sigma == doctest::Approx(1.0).epsilon(1e-15));
    // e = {1, 3}: mean 2, population variance 1.
    CHECK(r.mean_distance == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r.variance == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.n_points == 2);
}

TEST_CASE("the measure is invariant to rigid translation and uniform scale") {
    Xoshiro256StarStar rng(17);
    const Matrix oracle = oracles::random_matrix(rng, 40, 2, -3.0, 3.0);
    Matrix approx = oracle;
    for (auto& v : approx.data()) v += rng.uniform(-0.2, 0.2);
    const AccuracyReport base = normalized_mean_distance(approx, oracle);

    for (const double scale : {0.001, 7.0, 1e4}) {
        const double dx = 12.5, dy = -3.75;
        Matrix o2 = oracle, a2 = approx;
        for (std::size_t i = 0; i < o2.rows(); ++i) {
            o2(i, 0) = scale * (oracle(i, 0) + dx);
            o2(i, 1) = scale * (oracle(i, 1) + dy);
            a2(i, 0) = scale * (approx(i, 0) + dx);
            a2(i, 1) = scale * (approx(i, 1) + dy);
        }
        const AccuracyReport r = normalized_mean_distance(a2, o2);
        CHECK(r.mean_distance == doctest::Approx(base.mean_distance).epsilon(1e-9));
        CHECK(r.variance == doctest::Approx(base.variance).epsilon(1e-9));
    }
}

TEST_CASE("mean distance is zero only when the clouds coincide") {
    const Matrix oracle = Matrix::from_rows({{0, 0}, {2, 0}, {0, 2}});
    Matrix approx = oracle;
    approx(1, 1) += 1e-6;
    const AccuracyReport r = normalized_mean_distance(approx, oracle);
    CHECK(r.mean_distance > 0.0);
}

TEST_CASE("a collapsed oracle cloud is rejected") {
    const Matrix oracle = Matrix::from_rows({{3, 3}, {3, 3}});
    const Matrix approx = Matrix::from_rows({{1, 1}, {2, 2}});
    try {
        static_cast<void>(normalized_mean_distance(approx, oracle));
        FAIL("expected degenerate_oracle");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_oracle);
    }
}

TEST_CASE("shape validation") {
    const Matrix a2x2 = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix a3x2 = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    const Matrix a2x3 = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    CHECK_THROWS_AS(static_cast<void>(normalized_mean_distance(a3x2, a2x2)), Error);
    CHECK_THROWS_AS(static_cast<void>(normalized_mean_distance(a2x3, a2x2)), Error);
    CHECK_THROWS_AS(static_cast<void>(normalized_mean_distance(Matrix(0, 2), Matrix(0, 2))),
                    Error);
}

TEST_CASE("report serializations carry all four fields") {
    AccuracyReport r;
    r.mean_distance = 0.25;
    r.variance = 0.0625;
    r.n_points = 12;
    r.sigma = 2.0;
    const std::string kv = report_kv(r);
    CHECK(kv.find("mean_distance=0.25\n") != std::string::npos);
    CHECK(kv.find("variance=0.0625\n") != std::string::npos);
    CHECK(kv.find("n_points=12\n") != std::string::npos);
    CHECK(kv.find("sigma=2\n") != std::string::npos);
    const std::string csv = report_csv(r);
    CHECK(csv.find("mean_distance,variance,n_points,sigma\n") == 0);
    CHECK(csv.find("0.25,0.0625,12,2\n") != std::string::npos);
}

TEST_CASE("scatter figures are complete and byte-stable") {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "aumap-svg-XXXXXX").string();
    REQUIRE(::mkdtemp(tmpl.data()) != nullptr);
    const std::string path = tmpl + "/fig.svg";

    Xoshiro256StarStar rng(8);
    ReferenceEmbedding train;
    train.inputs = oracles::random_matrix(rng, 20, 4);
    train.projections = oracles::random_matrix(rng, 20, 2);
    std::vector<int> train_labels(20);
    for (std::size_t i = 0; i < 20; ++i) train_labels[i] = static_cast<int>(i % 3);

    const Matrix oracle = oracles::random_matrix(rng, 7, 2);
    Matrix approx = oracle;
    for (auto& v : approx.data()) v += rng.uniform(-0.1, 0.1);
    std::vector<int> test_labels(7, 1);

    emit_scatter_svg(train, train_labels, oracle, approx, test_labels, path);
    const std::string svg = slurp(path);

    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
    // one connector line per test point plus marker shapes for every layer
    CHECK(count_occurrences(svg, "<line") >= 7);
    CHECK(count_occurrences(svg, "<circle") >= 20 + 7);
    CHECK(count_occurrences(svg, "<path") >= 7);

    emit_scatter_svg(train, train_labels, oracle, approx, test_labels, path);
    CHECK(slurp(path) == svg);

    SUBCASE("three-dimensional projections are rejected") {
        ReferenceEmbedding bad = train;
        bad.projections = oracles::random_matrix(rng, 20, 3);
        const Matrix o3 = oracles::random_matrix(rng, 7, 3);
        try {
            emit_scatter_svg(bad, train_labels, o3, o3, test_labels, path);
            FAIL("expected unsupported_dimensionality");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::unsupported_dimensionality);
        }
    }

    SUBCASE("empty label vectors are allowed") {
        emit_scatter_svg(train, {}, oracle, approx, {}, path);
        CHECK(slurp(path).find("<svg") != std::string::npos);
    }

    std::filesystem::remove_all(tmpl);
}
