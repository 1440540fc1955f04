#include "aumap/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "aumap/dataio.hpp"
#include "aumap/error.hpp"
#include "svg_util.hpp"

namespace aumap {

AccuracyReport normalized_mean_distance(const Matrix& approx, const Matrix& oracle) {
    if (approx.rows() != oracle.rows())
        raise(ErrorCode::count_mismatch,
              "approx has " + std::to_string(approx.rows()) + " rows, oracle has " +
                  std::to_string(oracle.rows()));
    if (approx.rows() == 0) raise(ErrorCode::empty_input, "no projections to compare");
    if (approx.cols() != oracle.cols())
        raise(ErrorCode::dimension_mismatch,
              "approx has dimension " + std::to_string(approx.cols()) + ", oracle has " +
                  std::to_string(oracle.cols()));

    const std::size_t n = oracle.rows();
    const std::size_t m = oracle.cols();

    std::vector<double> centroid(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = oracle.row_ptr(i);
        for (std::size_t j = 0; j < m; ++j) centroid[j] += row[j];
    }
    for (std::size_t j = 0; j < m; ++j) centroid[j] /= static_cast<double>(n);

    double spread = 0.0;  // mean squared distance from the centroid
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = oracle.row_ptr(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double d = row[j] - centroid[j];
            spread += d * d;
        }
    }
    const double sigma = std::sqrt(spread / static_cast<double>(n));
    if (sigma == 0.0)
        raise(ErrorCode::degenerate_oracle, "all oracle projections are identical");

    double mean = 0.0;
    std::vector<double> errors(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = approx.row_ptr(i);
        const double* o = oracle.row_ptr(i);
        double d2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double d = a[j] - o[j];
            d2 += d * d;
        }
        errors[i] = std::sqrt(d2) / sigma;
        mean += errors[i];
    }
    mean /= static_cast<double>(n);

    double variance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = errors[i] - mean;
        variance += d * d;
    }
    variance /= static_cast<double>(n);

    return {mean, variance, n, sigma};
}

std::string report_kv(const AccuracyReport& report) {
    return "mean_distance=" + format_double(report.mean_distance) + "\n" +
           "variance=" + format_double(report.variance) + "\n" +
           "n_points=" + std::to_string(report.n_points) + "\n" +
           "sigma=" + format_double(report.sigma) + "\n";
}

std::string report_csv(const AccuracyReport& report) {
    return "mean_distance,variance,n_points,sigma\n" + format_double(report.mean_distance) +
           "," + format_double(report.variance) + "," + std::to_string(report.n_points) + "," +
           format_double(report.sigma) + "\n";
}

namespace {

using detail::class_color;
using detail::fmt2;

struct Frame {
    double x_lo, x_scale, y_hi, y_scale;
    double px(double x) const { return 50.0 + (x - x_lo) * x_scale; }
    // SVG y grows downward.
    double py(double y) const { return 20.0 + (y_hi - y) * y_scale; }
};

int label_of(const std::vector<int>& labels, std::size_t i) {
    return labels.empty() ? 0 : labels[i];
}

}  // namespace

void emit_scatter_svg(const ReferenceEmbedding& train, const std::vector<int>& train_labels,
                      const Matrix& oracle_test, const Matrix& approx_test,
                      const std::vector<int>& test_labels, const std::string& path) {
    validate_embedding(train);
    if (train.output_dim() != 2 || oracle_test.cols() != 2 || approx_test.cols() != 2)
        raise(ErrorCode::unsupported_dimensionality,
              "scatter figures require 2-dimensional projections");
    if (oracle_test.rows() != approx_test.rows())
        raise(ErrorCode::count_mismatch,
              "oracle has " + std::to_string(oracle_test.rows()) + " rows, approx has " +
                  std::to_string(approx_test.rows()));
    if (!train_labels.empty() && train_labels.size() != train.size())
        raise(ErrorCode::count_mismatch, "train label count does not match training points");
    if (!test_labels.empty() && test_labels.size() != oracle_test.rows())
        raise(ErrorCode::count_mismatch, "test label count does not match test points");

    const Matrix& tp = train.projections;
    double x_lo = tp(0, 0), x_hi = tp(0, 0), y_lo = tp(0, 1), y_hi = tp(0, 1);
    const auto grow = [&](const Matrix& m) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            x_lo = std::min(x_lo, m(i, 0));
            x_hi = std::max(x_hi, m(i, 0));
            y_lo = std::min(y_lo, m(i, 1));
            y_hi = std::max(y_hi, m(i, 1));
        }
    };
    grow(tp);
    grow(oracle_test);
    grow(approx_test);
    const double x_pad = (x_hi - x_lo) > 0 ? 0.05 * (x_hi - x_lo) : 1.0;
    const double y_pad = (y_hi - y_lo) > 0 ? 0.05 * (y_hi - y_lo) : 1.0;
    x_lo -= x_pad;
    x_hi += x_pad;
    y_lo -= y_pad;
    y_hi += y_pad;

    const double plot_w = 560.0, plot_h = 560.0;
    const double width = 50.0 + plot_w + 160.0, height = 20.0 + plot_h + 20.0;
    const Frame f{x_lo, plot_w / (x_hi - x_lo), y_hi, plot_h / (y_hi - y_lo)};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(width) + "\" height=\"" +
           fmt2(height) + "\" viewBox=\"0 0 " + fmt2(width) + " " + fmt2(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Connectors under everything else.
    svg += "<g stroke=\"#999999\" stroke-width=\"0.8\" opacity=\"0.7\">\n";
    for (std::size_t i = 0; i < oracle_test.rows(); ++i)
        svg += "<line x1=\"" + fmt2(f.px(oracle_test(i, 0))) + "\" y1=\"" +
               fmt2(f.py(oracle_test(i, 1))) + "\" x2=\"" + fmt2(f.px(approx_test(i, 0))) +
               "\" y2=\"" + fmt2(f.py(approx_test(i, 1))) + "\"/>\n";
    svg += "</g>\n";

    svg += "<g fill-opacity=\"0.35\">\n";
    for (std::size_t i = 0; i < tp.rows(); ++i)
        svg += "<circle cx=\"" + fmt2(f.px(tp(i, 0))) + "\" cy=\"" + fmt2(f.py(tp(i, 1))) +
               "\" r=\"2.5\" fill=\"" + class_color(label_of(train_labels, i)) + "\"/>\n";
    svg += "</g>\n";

    svg += "<g stroke=\"#333333\" stroke-width=\"1\">\n";
    for (std::size_t i = 0; i < oracle_test.rows(); ++i)
        svg += "<circle cx=\"" + fmt2(f.px(oracle_test(i, 0))) + "\" cy=\"" +
               fmt2(f.py(oracle_test(i, 1))) + "\" r=\"4\" fill=\"" +
               class_color(label_of(test_labels, i)) + "\"/>\n";
    svg += "</g>\n";

    svg += "<g stroke-width=\"1.6\">\n";
    for (std::size_t i = 0; i < approx_test.rows(); ++i) {
        const double cx = f.px(approx_test(i, 0)), cy = f.py(approx_test(i, 1));
        const char* color = class_color(label_of(test_labels, i));
        svg += "<path d=\"M" + fmt2(cx - 4) + " " + fmt2(cy - 4) + " L" + fmt2(cx + 4) + " " +
               fmt2(cy + 4) + " M" + fmt2(cx - 4) + " " + fmt2(cy + 4) + " L" + fmt2(cx + 4) +
               " " + fmt2(cy - 4) + "\" stroke=\"" + color + "\"/>\n";
    }
    svg += "</g>\n";

    // Legend: classes present in the data, then the three marker kinds.
    std::set<int> classes;
    for (std::size_t i = 0; i < tp.rows(); ++i) classes.insert(label_of(train_labels, i));
    for (std::size_t i = 0; i < oracle_test.rows(); ++i)
        classes.insert(label_of(test_labels, i));
    const double lx = 50.0 + plot_w + 20.0;
    double ly = 40.0;
    svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (int c : classes) {
        svg += "<circle cx=\"" + fmt2(lx) + "\" cy=\"" + fmt2(ly - 4) + "\" r=\"5\" fill=\"" +
               class_color(c) + "\"/>\n";
        svg += "<text x=\"" + fmt2(lx + 12) + "\" y=\"" + fmt2(ly) + "\">class " +
               std::to_string(c) + "</text>\n";
        ly += 20.0;
    }
    ly += 10.0;
    svg += "<circle cx=\"" + fmt2(lx) + "\" cy=\"" + fmt2(ly - 4) +
           "\" r=\"2.5\" fill=\"#555555\" fill-opacity=\"0.35\"/>\n";
    svg += "<text x=\"" + fmt2(lx + 12) + "\" y=\"" + fmt2(ly) + "\">training</text>\n";
    ly += 20.0;
    svg += "<circle cx=\"" + fmt2(lx) + "\" cy=\"" + fmt2(ly - 4) +
           "\" r=\"4\" fill=\"#bbbbbb\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + fmt2(lx + 12) + "\" y=\"" + fmt2(ly) + "\">oracle</text>\n";
    ly += 20.0;
    svg += "<path d=\"M" + fmt2(lx - 4) + " " + fmt2(ly - 8) + " L" + fmt2(lx + 4) + " " +
           fmt2(ly) + " M" + fmt2(lx - 4) + " " + fmt2(ly) + " L" + fmt2(lx + 4) + " " +
           fmt2(ly - 8) + "\" stroke=\"#555555\" stroke-width=\"1.6\"/>\n";
    svg += "<text x=\"" + fmt2(lx + 12) + "\" y=\"" + fmt2(ly) + "\">approximate</text>\n";
    svg += "</g>\n</svg>\n";

    write_text_atomic(path, svg);
}

}  // namespace aumap
