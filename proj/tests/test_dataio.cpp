#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "aumap/dataio.hpp"
#include "aumap/error.hpp"
#include "aumap/rng.hpp"

using namespace aumap;

namespace {

struct TempDir {
    std::string path;
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "aumap-XXXXXX").string();
        REQUIRE(::mkdtemp(tmpl.data()) != nullptr);
        path = tmpl;
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

void write_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

bool same_bits(double a, double b) {
    std::uint64_t x = 0, y = 0;
    std::memcpy(&x, &a, sizeof x);
    std::memcpy(&y, &b, sizeof y);
    return x == y;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an aumap::Error");
    return ErrorCode::internal;
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected an aumap::Error");
    return {};
}

// Textbook transcription of the documented generator contract: one PRNG
// seeded once, and per class the rate vector is drawn first, then samples
// row-major, each coordinate counting uniforms until their product falls
// below exp(-rate).
LabeledDataset replay_poisson(const PoissonSpec& spec, std::vector<std::vector<double>>* rates) {
    Xoshiro256StarStar rng(spec.seed);
    LabeledDataset ds;
    ds.class_count = spec.class_count;
    std::vector<std::vector<double>> rows;
    for (std::size_t c = 0; c < spec.class_count; ++c) {
        std::vector<double> rate(spec.dim);
        for (auto& r : rate) r = rng.uniform(spec.rate_low, spec.rate_high);
        if (rates) rates->push_back(rate);
        for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
            std::vector<double> row(spec.dim);
            for (std::size_t j = 0; j < spec.dim; ++j) {
                const double threshold = std::exp(-rate[j]);
                std::size_t count = 0;
                double product = rng.next_double();
                while (product > threshold) {
                    ++count;
                    product *= rng.next_double();
                }
                row[j] = static_cast<double>(count);
            }
            rows.push_back(std::move(row));
            ds.labels.push_back(static_cast<int>(c));
        }
    }
    ds.samples = Matrix::from_rows(rows);
    return ds;
}

}  // namespace

TEST_CASE("format_double survives a parse round-trip bit-for-bit") {
    const double cases[] = {0.0,
                            -0.0,
                            1.0,
                            1.0 / 3.0,
                            0.1,
                            -2.5,
                            3.141592653589793,
                            1e300,
                            -1e300,
                            5e-324,
                            std::numeric_limits<double>::max(),
                            std::numeric_limits<double>::min(),
                            std::nextafter(1.0, 2.0),
                            123456789.123456789,
                            -2.2250738585072011e-308};
    for (const double v : cases) {
        const std::string s = format_double(v);
        double back = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(ec == std::errc());
        REQUIRE(ptr == s.data() + s.size());
        CHECK(same_bits(back, v));
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-0.0) == "-0");
}

TEST_CASE("dataset CSV round-trips exactly, labels included") {
    TempDir dir;
    LabeledDataset ds;
    ds.samples = Matrix::from_rows({{0.1, 1.0 / 3.0, 5e-324},
                                    {-0.0, 1e300, std::numeric_limits<double>::min()},
                                    {2.0, -7.25, 3.141592653589793}});
    ds.labels = {0, 2, 1};
    ds.class_count = 3;

    const std::string path = dir.file("data.csv");
    save_dataset(path, ds);
    const LabeledDataset back = load_dataset(path);

    REQUIRE(back.samples.rows() == 3);
    REQUIRE(back.samples.cols() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(same_bits(back.samples(i, j), ds.samples(i, j)));
    CHECK(back.labels == ds.labels);
    CHECK(back.class_count == 3);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x0,x1,x2,label");
}

TEST_CASE("dataset CSV without labels round-trips") {
    TempDir dir;
    LabeledDataset ds;
    ds.samples = Matrix::from_rows({{1.5, 2.5}, {3.5, 4.5}});
    const std::string path = dir.file("plain.csv");
    save_dataset(path, ds);
    const LabeledDataset back = load_dataset(path);
    CHECK_FALSE(back.has_labels());
    CHECK(back.class_count == 0);
    CHECK(back.samples == ds.samples);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x0,x1");
}

TEST_CASE("projection CSV round-trips under the u-prefixed header") {
    TempDir dir;
    const Matrix m = Matrix::from_rows({{0.25, -1e-9}, {1e222, 42.0}});
    const std::string path = dir.file("proj.csv");
    save_projections(path, m);
    CHECK(load_projections(path) == m);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "u0,u1");
}

TEST_CASE("parse errors carry the file location") {
    TempDir dir;
    const std::string path = dir.file("bad.csv");

    write_file(path, "a0,x1\n1,2\n");
    std::string msg = message_of([&] { static_cast<void>(load_dataset(path)); });
    CHECK(msg.find(path + ":1:") != std::string::npos);
    CHECK(msg.find("expected 'x0', got 'a0'") != std::string::npos);

    write_file(path, "x0,x1\n1,abc\n");
    CHECK(code_of([&] { static_cast<void>(load_dataset(path)); }) == ErrorCode::parse_error);
    msg = message_of([&] { static_cast<void>(load_dataset(path)); });
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(msg.find("'abc' is not a number") != std::string::npos);

    write_file(path, "x0,x1\n1,2,3\n");
    msg = message_of([&] { static_cast<void>(load_dataset(path)); });
    CHECK(msg.find("expected 2 cells, got 3") != std::string::npos);

    write_file(path, "x0,label\n1,-3\n");
    msg = message_of([&] { static_cast<void>(load_dataset(path)); });
    CHECK(msg.find("label '-3' is not a non-negative integer") != std::string::npos);

    write_file(path, "x0,x1\n");
    msg = message_of([&] { static_cast<void>(load_dataset(path)); });
    CHECK(msg.find("no data rows") != std::string::npos);

    write_file(path, "x0,x1\n1,1e\n");
    CHECK(code_of([&] { static_cast<void>(load_dataset(path)); }) == ErrorCode::parse_error);
}

TEST_CASE("windows line endings are accepted") {
    TempDir dir;
    const std::string path = dir.file("crlf.csv");
    write_file(path, "x0,x1,label\r\n1.5,2,0\r\n3,4,1\r\n");
    const LabeledDataset ds = load_dataset(path);
    CHECK(ds.samples(0, 0) == 1.5);
    CHECK(ds.labels == std::vector<int>{0, 1});
    CHECK(ds.class_count == 2);
}

TEST_CASE("a missing file reports file_not_found") {
    TempDir dir;
    CHECK(code_of([&] { static_cast<void>(load_dataset(dir.file("absent.csv"))); }) ==
          ErrorCode::file_not_found);
}

TEST_CASE("embedding loading rejects mismatched row counts") {
    TempDir dir;
    LabeledDataset ds;
    ds.samples = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    save_dataset(dir.file("inputs.csv"), ds);
    save_projections(dir.file("proj.csv"), Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}}));
    CHECK(code_of([&] {
              static_cast<void>(load_embedding(dir.file("inputs.csv"), dir.file("proj.csv")));
          }) == ErrorCode::count_mismatch);
}

TEST_CASE("embedding save/load round-trip") {
    TempDir dir;
    Xoshiro256StarStar rng(3);
    ReferenceEmbedding e;
    e.inputs = Matrix(4, 3);
    e.projections = Matrix(4, 2);
    for (auto& v : e.inputs.data()) v = rng.uniform(-5, 5);
    for (auto& v : e.projections.data()) v = rng.uniform(-5, 5);
    save_embedding(e, dir.file("in.csv"), dir.file("pr.csv"));
    const ReferenceEmbedding back = load_embedding(dir.file("in.csv"), dir.file("pr.csv"));
    CHECK(back.inputs == e.inputs);
    CHECK(back.projections == e.projections);
}

TEST_CASE("atomic text writes leave no temporary behind and replace content") {
    TempDir dir;
    const std::string path = dir.file("out.txt");
    write_text_atomic(path, "first\n");
    write_text_atomic(path, "second\n");

    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "second\n");

    std::size_t entries = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path)) {
        static_cast<void>(entry);
        ++entries;
    }
    CHECK(entries == 1);
}

TEST_CASE("poisson generation is deterministic per seed") {
    PoissonSpec spec;
    spec.class_count = 3;
    spec.dim = 7;
    spec.samples_per_class = 11;
    spec.seed = 99;
    const LabeledDataset a = generate_poisson(spec);
    const LabeledDataset b = generate_poisson(spec);
    CHECK(a.samples == b.samples);
    CHECK(a.labels == b.labels);

    spec.seed = 100;
    const LabeledDataset c = generate_poisson(spec);
    CHECK(a.samples.data() != c.samples.data());
}

TEST_CASE("poisson generation follows the documented draw order") {
    PoissonSpec spec;
    spec.class_count = 2;
    spec.dim = 5;
    spec.samples_per_class = 20;
    spec.rate_low = 0.5;
    spec.rate_high = 8.0;
    spec.seed = 7;
    const LabeledDataset got = generate_poisson(spec);
    const LabeledDataset want = replay_poisson(spec, nullptr);
    CHECK(got.samples == want.samples);
    CHECK(got.labels == want.labels);
    CHECK(got.class_count == want.class_count);
}

TEST_CASE("poisson counts concentrate on the drawn rates") {
    PoissonSpec spec;
    spec.class_count = 2;
    spec.dim = 3;
    spec.samples_per_class = 4000;
    spec.rate_low = 1.0;
    spec.rate_high = 10.0;
    spec.seed = 42;
    const LabeledDataset ds = generate_poisson(spec);

    std::vector<std::vector<double>> rates;
    static_cast<void>(replay_poisson(spec, &rates));
    REQUIRE(rates.size() == 2);

    const double n = static_cast<double>(spec.samples_per_class);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < spec.dim; ++j) {
            double mean = 0.0;
            for (std::size_t s = 0; s < spec.samples_per_class; ++s)
                mean += ds.samples(c * spec.samples_per_class + s, j);
            mean /= n;
            double var = 0.0;
            for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
                const double d = ds.samples(c * spec.samples_per_class + s, j) - mean;
                var += d * d;
            }
            var /= n;
            const double lambda = rates[c][j];
            // Poisson: mean and variance both equal the rate. Six standard
            // errors of each estimator at n=4000.
            CHECK(std::abs(mean - lambda) <= 6.0 * std::sqrt(lambda / n));
            CHECK(std::abs(var - lambda) <=
                  6.0 * std::sqrt((lambda + 2.0 * lambda * lambda) / n));
        }
    }
}

TEST_CASE("poisson spec validation") {
    PoissonSpec spec;
    spec.class_count = 0;
    CHECK(code_of([&] { static_cast<void>(generate_poisson(spec)); }) ==
          ErrorCode::invalid_config);
    spec = {};
    spec.rate_low = 0.0;
    CHECK(code_of([&] { static_cast<void>(generate_poisson(spec)); }) ==
          ErrorCode::invalid_config);
    spec = {};
    spec.rate_low = 5.0;
    spec.rate_high = 2.0;
    CHECK(code_of([&] { static_cast<void>(generate_poisson(spec)); }) ==
          ErrorCode::invalid_config);
    spec = {};
    spec.rate_high = 700.0;
    CHECK(code_of([&] { static_cast<void>(generate_poisson(spec)); }) ==
          ErrorCode::invalid_config);
}

TEST_CASE("dataset labels define class_count as max label plus one") {
    TempDir dir;
    write_file(dir.file("d.csv"), "x0,label\n1,0\n2,4\n3,2\n");
    const LabeledDataset ds = load_dataset(dir.file("d.csv"));
    CHECK(ds.class_count == 5);
}
