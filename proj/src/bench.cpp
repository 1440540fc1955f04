#include "aumap/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <string>

#include "aumap/dataio.hpp"
#include "aumap/error.hpp"
#include "aumap/projector.hpp"
#include "svg_util.hpp"

namespace aumap {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_condition(const BenchCondition& cond) {
    if (cond.values.empty()) raise(ErrorCode::invalid_config, "no condition values");
    for (std::size_t i = 0; i < cond.values.size(); ++i) {
        if (cond.values[i] < 1)
            raise(ErrorCode::invalid_config, "condition values must be positive");
        if (i > 0 && cond.values[i] <= cond.values[i - 1])
            raise(ErrorCode::invalid_config, "condition values must be strictly ascending");
    }
    if (cond.fixed_value < 1) raise(ErrorCode::invalid_config, "fixed_value must be positive");
    if (cond.test_samples < 1) raise(ErrorCode::invalid_config, "test_samples must be positive");
    if (cond.batch_size < 1 || cond.batch_size > cond.test_samples)
        raise(ErrorCode::invalid_config, "batch_size must be in [1, test_samples]");
    if (cond.repetitions < 1) raise(ErrorCode::invalid_config, "repetitions must be positive");
}

// n samples at the requested dimensionality: five Poisson classes, rounded
// up to a whole class size and truncated back to n.
LabeledDataset mock_dataset(std::size_t n, std::size_t dim, std::uint64_t seed) {
    PoissonSpec spec;
    spec.class_count = std::min<std::size_t>(5, n);
    spec.dim = dim;
    spec.samples_per_class = (n + spec.class_count - 1) / spec.class_count;
    spec.seed = seed;
    LabeledDataset ds = generate_poisson(spec);
    if (ds.samples.rows() > n) {
        Matrix cut(n, dim);
        std::memcpy(cut.data().data(), ds.samples.data().data(), n * dim * sizeof(double));
        ds.samples = std::move(cut);
        ds.labels.resize(n);
    }
    return ds;
}

// Placeholder m=2 projections for timing runs: the first two coordinates,
// centered and scaled to unit variance. Projection values never affect
// timings, only shapes do.
Matrix placeholder_projections(const Matrix& samples) {
    const std::size_t n = samples.rows();
    Matrix proj(n, 2);
    for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t src = std::min(j, samples.cols() - 1);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += samples(i, src);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = samples(i, src) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        for (std::size_t i = 0; i < n; ++i) proj(i, j) = (samples(i, src) - mean) * scale;
    }
    return proj;
}

std::pair<std::size_t, std::size_t> shape_for(const BenchCondition& cond, std::size_t value) {
    return cond.vary == BenchVary::dimensionality
               ? std::pair{cond.fixed_value, value}   // (samples, dim)
               : std::pair{value, cond.fixed_value};
}

double clock_resolution() {
    return static_cast<double>(Clock::period::num) / static_cast<double>(Clock::period::den);
}

void apply_summary(TimingRow& row) {
    const TimeSummary s = summarize_times(row.raw_samples);
    row.mean_seconds = s.mean;
    row.std_seconds = s.stddev;
    row.excluded_count = s.excluded;
    row.unstable = s.unstable;
}

}  // namespace

BenchVary parse_vary(const std::string& name) {
    if (name == "dimensionality") return BenchVary::dimensionality;
    if (name == "sample_count") return BenchVary::sample_count;
    raise(ErrorCode::parse_error, "unknown vary mode '" + name + "'");
}

const char* vary_name(BenchVary vary) {
    return vary == BenchVary::dimensionality ? "dimensionality" : "sample_count";
}

std::uint64_t hash_doubles(std::span<const double> values) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

TimeSummary summarize_times(std::span<const double> samples) {
    if (samples.empty()) raise(ErrorCode::empty_input, "no timing samples");
    const auto stats = [](std::span<const double> xs, auto&& keep) {
        double mean = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (keep(i)) {
                mean += xs[i];
                ++n;
            }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (keep(i)) {
                const double d = xs[i] - mean;
                var += d * d;
            }
        return std::pair{mean, std::sqrt(var / static_cast<double>(n))};
    };

    const auto [mean_all, std_all] = stats(samples, [](std::size_t) { return true; });
    if (samples.size() < 3) return {mean_all, std_all, 0, false};

    std::vector<bool> kept(samples.size());
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        kept[i] = std::abs(samples[i] - mean_all) <= 2.0 * std_all;
        if (!kept[i]) ++excluded;
    }
    if (excluded == 0) return {mean_all, std_all, 0, false};
    if (excluded > samples.size() / 2) return {mean_all, std_all, 0, true};

    const auto [mean, stddev] = stats(samples, [&](std::size_t i) { return kept[i]; });
    return {mean, stddev, excluded, false};
}

TimingReport bench_fit(const BenchCondition& cond) {
    check_condition(cond);
    TimingReport report;
    report.vary = cond.vary;
    report.clock_resolution_seconds = clock_resolution();
    report.notes =
        "fit timing covers the neighbor-index build and embedding assembly only; "
        "dataset generation is untimed";

    for (const std::size_t value : cond.values) {
        const auto [n, dim] = shape_for(cond, value);
        const LabeledDataset ds = mock_dataset(n, dim, cond.seed);
        const Matrix proj = placeholder_projections(ds.samples);
        ProjectorConfig config;
        config.k = std::min<std::size_t>(15, n);

        TimingRow row;
        row.value = value;
        row.dataset_hash = hash_doubles(ds.samples.data());
        for (std::size_t rep = 0; rep < cond.repetitions; ++rep) {
            ReferenceEmbedding embedding{ds.samples, proj};  // copies, untimed
            const auto start = Clock::now();
            const Projector p = Projector::fit(std::move(embedding), config);
            row.raw_samples.push_back(seconds_since(start));
            static_cast<void>(p);
        }
        apply_summary(row);
        report.rows.push_back(std::move(row));
    }
    return report;
}

TimingReport bench_project(const BenchCondition& cond) {
    check_condition(cond);
    TimingReport report;
    report.vary = cond.vary;
    report.clock_resolution_seconds = clock_resolution();
    report.notes =
        "per-repetition time is the summed wall-clock of the chunked projection calls; "
        "one warm-up repetition runs first and is recorded but excluded";

    for (const std::size_t value : cond.values) {
        const auto [n, dim] = shape_for(cond, value);
        const LabeledDataset train = mock_dataset(n, dim, cond.seed);
        const LabeledDataset test =
            mock_dataset(cond.test_samples, dim, cond.seed ^ 0x9e3779b97f4a7c15ull);
        ProjectorConfig config;
        config.k = std::min<std::size_t>(15, n);
        const Projector projector =
            Projector::fit({train.samples, placeholder_projections(train.samples)}, config);

        // Chunks are materialized up front so slicing stays out of the clock.
        std::vector<Matrix> chunks;
        for (std::size_t start = 0; start < cond.test_samples; start += cond.batch_size) {
            const std::size_t rows = std::min(cond.batch_size, cond.test_samples - start);
            Matrix chunk(rows, dim);
            std::memcpy(chunk.data().data(), test.samples.row_ptr(start),
                        rows * dim * sizeof(double));
            chunks.push_back(std::move(chunk));
        }

        Matrix collected(cond.test_samples, 2);
        const auto run_once = [&]() {
            double total = 0.0;
            std::size_t at = 0;
            for (const Matrix& chunk : chunks) {
                const auto start = Clock::now();
                const Matrix out = projector.project_batch(chunk);
                total += seconds_since(start);
                std::memcpy(collected.row(at).data(), out.data().data(),
                            out.rows() * 2 * sizeof(double));
                at += out.rows();
            }
            return total;
        };

        TimingRow row;
        row.value = value;
        row.dataset_hash = hash_doubles(train.samples.data());
        row.warmup_seconds = run_once();
        row.output_hash = hash_doubles(collected.data());
        for (std::size_t rep = 0; rep < cond.repetitions; ++rep)
            row.raw_samples.push_back(run_once());

        // Chunked and whole-batch projection must agree exactly.
        const Matrix one_go = projector.project_batch(test.samples);
        if (hash_doubles(one_go.data()) != row.output_hash)
            raise(ErrorCode::internal,
                  "chunked projection output differs from the whole-batch output");

        apply_summary(row);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string timing_csv(const TimingReport& report) {
    std::string csv = "vary,value,mean_s,std_s,n,excluded\n";
    for (const TimingRow& row : report.rows) {
        csv += vary_name(report.vary);
        csv += ',' + std::to_string(row.value);
        csv += ',' + format_double(row.mean_seconds);
        csv += ',' + format_double(row.std_seconds);
        csv += ',' + std::to_string(row.raw_samples.size() - row.excluded_count);
        csv += ',' + std::to_string(row.excluded_count);
        csv += '\n';
    }
    return csv;
}

std::string timing_svg(const TimingReport& report, const std::string& title) {
    using detail::fmt2;
    using detail::xml_escape;

    const double width = 760.0, height = 480.0;
    const double left = 80.0, right = 30.0, top = 50.0, bottom = 70.0;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    double y_max = 0.0;
    for (const TimingRow& row : report.rows)
        y_max = std::max(y_max, row.mean_seconds + row.std_seconds);
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.08;

    // Condition values are spaced evenly; ranges span orders of magnitude.
    const std::size_t n = report.rows.size();
    const auto px = [&](std::size_t i) {
        return n == 1 ? left + plot_w / 2
                      : left + plot_w * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    const auto py = [&](double v) { return top + plot_h * (1.0 - v / y_max); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(width) +
           "\" height=\"" + fmt2(height) + "\" viewBox=\"0 0 " + fmt2(width) + " " +
           fmt2(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt2(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">" +
           xml_escape(title) + "</text>\n";

    svg += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = y_max * t / 5.0;
        svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(py(v)) + "\" x2=\"" +
               fmt2(left + plot_w) + "\" y2=\"" + fmt2(py(v)) + "\"/>\n";
    }
    svg += "</g>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = y_max * t / 5.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        svg += "<text x=\"" + fmt2(left - 6) + "\" y=\"" + fmt2(py(v) + 4) + "\">" + buf +
               "</text>\n";
    }
    svg += "</g>\n";

    svg += "<g stroke=\"#333333\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(left) +
           "\" y2=\"" + fmt2(top + plot_h) + "\"/>\n";
    svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top + plot_h) + "\" x2=\"" +
           fmt2(left + plot_w) + "\" y2=\"" + fmt2(top + plot_h) + "\"/>\n";
    svg += "</g>\n";

    // Error bars, connecting line, points.
    svg += "<g stroke=\"#1f77b4\" stroke-width=\"1.4\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        const TimingRow& row = report.rows[i];
        const double x = px(i);
        const double lo = py(std::max(0.0, row.mean_seconds - row.std_seconds));
        const double hi = py(row.mean_seconds + row.std_seconds);
        svg += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(lo) + "\" x2=\"" + fmt2(x) +
               "\" y2=\"" + fmt2(hi) + "\"/>\n";
        svg += "<line x1=\"" + fmt2(x - 4) + "\" y1=\"" + fmt2(lo) + "\" x2=\"" + fmt2(x + 4) +
               "\" y2=\"" + fmt2(lo) + "\"/>\n";
        svg += "<line x1=\"" + fmt2(x - 4) + "\" y1=\"" + fmt2(hi) + "\" x2=\"" + fmt2(x + 4) +
               "\" y2=\"" + fmt2(hi) + "\"/>\n";
    }
    svg += "</g>\n";
    if (n > 1) {
        svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (i) svg += ' ';
            svg += fmt2(px(i)) + "," + fmt2(py(report.rows[i].mean_seconds));
        }
        svg += "\"/>\n";
    }
    svg += "<g fill=\"#1f77b4\">\n";
    for (std::size_t i = 0; i < n; ++i)
        svg += "<circle cx=\"" + fmt2(px(i)) + "\" cy=\"" +
               fmt2(py(report.rows[i].mean_seconds)) + "\" r=\"3\"/>\n";
    svg += "</g>\n";

    svg += "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
    bool any_unstable = false;
    for (std::size_t i = 0; i < n; ++i) {
        std::string label = std::to_string(report.rows[i].value);
        if (report.rows[i].unstable) {
            label += "*";
            any_unstable = true;
        }
        svg += "<text x=\"" + fmt2(px(i)) + "\" y=\"" + fmt2(top + plot_h + 18) + "\">" +
               label + "</text>\n";
    }
    svg += "<text x=\"" + fmt2(left + plot_w / 2) + "\" y=\"" + fmt2(height - 28) + "\">" +
           std::string(vary_name(report.vary)) + "</text>\n";
    svg += "</g>\n";
    svg += "<text x=\"16\" y=\"" + fmt2(top + plot_h / 2) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 " +
           fmt2(top + plot_h / 2) + ")\">seconds</text>\n";
    if (any_unstable)
        svg += "<text x=\"" + fmt2(left) + "\" y=\"" + fmt2(height - 10) +
               "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#b00020\">* unstable: "
               "outlier rule suppressed (would drop over half the repetitions)</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace aumap
