#include "aumap/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "aumap/error.hpp"
#include "aumap/rng.hpp"

namespace aumap {

LabeledDataset generate_poisson(const PoissonSpec& spec) {
    if (spec.class_count < 1 || spec.dim < 1 || spec.samples_per_class < 1)
        raise(ErrorCode::invalid_config,
              "class_count, dim, and samples_per_class must all be at least 1");
    if (!(spec.rate_low > 0.0) || !(spec.rate_low <= spec.rate_high))
        raise(ErrorCode::invalid_config, "rates must satisfy 0 < rate_low <= rate_high");
    // The product-of-uniforms sampler terminates after ~rate iterations but
    // its running product underflows around e^-700.
    if (spec.rate_high >= 700.0)
        raise(ErrorCode::invalid_config, "rates of 700 and above are not supported");

    const std::size_t n = spec.class_count * spec.samples_per_class;
    LabeledDataset ds;
    ds.samples = Matrix(n, spec.dim);
    ds.labels.resize(n);
    ds.class_count = spec.class_count;

    Xoshiro256StarStar rng(spec.seed);
    std::vector<double> thresholds(spec.dim);  // exp(-rate) per coordinate
    std::size_t row = 0;
    for (std::size_t c = 0; c < spec.class_count; ++c) {
        for (std::size_t j = 0; j < spec.dim; ++j)
            thresholds[j] = std::exp(-rng.uniform(spec.rate_low, spec.rate_high));
        for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
            double* out = ds.samples.row(row).data();
            for (std::size_t j = 0; j < spec.dim; ++j) {
                // Knuth: count uniforms until their product drops below e^-rate.
                const double threshold = thresholds[j];
                std::size_t count = 0;
                double product = rng.next_double();
                while (product > threshold) {
                    ++count;
                    product *= rng.next_double();
                }
                out[j] = static_cast<double>(count);
            }
            ds.labels[row] = static_cast<int>(c);
        }
    }
    return ds;
}

std::string format_double(double value) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

void write_header(std::ostream& out, char prefix, std::size_t cols, bool label) {
    for (std::size_t j = 0; j < cols; ++j) {
        if (j) out << ',';
        out << prefix << j;
    }
    if (label) out << ",label";
    out << '\n';
}

void write_rows(std::ostream& out, const Matrix& values, const std::vector<int>* labels) {
    for (std::size_t i = 0; i < values.rows(); ++i) {
        const double* row = values.row_ptr(i);
        for (std::size_t j = 0; j < values.cols(); ++j) {
            if (j) out << ',';
            out << format_double(row[j]);
        }
        if (labels) out << ',' << (*labels)[i];
        out << '\n';
    }
}

void check_stream(const std::ostream& out, const std::string& what) {
    if (!out) raise(ErrorCode::file_not_found, "write failed: " + what);
}

// Streams table content into path atomically via a sibling temp file.
template <typename Fn>
void save_to_path(const std::string& path, Fn&& write_fn) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::file_not_found, "cannot open '" + tmp + "' for writing");
        write_fn(out);
        out.flush();
        check_stream(out, tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        raise(ErrorCode::file_not_found, "cannot rename '" + tmp + "' to '" + path + "'");
    }
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& detail) {
    raise(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": " + detail);
}

struct Table {
    Matrix values;
    std::vector<int> labels;  // empty when no label column
};

// Reads a CSV whose header is prefix0..prefix{K-1}, optionally followed by
// a final "label" column of non-negative integers.
Table load_table(const std::string& path, char prefix) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::file_not_found, "cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) parse_fail(path, 1, "missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string_view> header = split_cells(line);
    bool has_label = header.size() > 1 && header.back() == "label";
    const std::size_t cols = header.size() - (has_label ? 1 : 0);
    for (std::size_t j = 0; j < cols; ++j) {
        const std::string expected = prefix + std::to_string(j);
        if (header[j] != expected)
            parse_fail(path, 1,
                       "header column " + std::to_string(j + 1) + ": expected '" + expected +
                           "', got '" + std::string(header[j]) + "'");
    }

    Table table;
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::vector<std::string_view> cells = split_cells(line);
        if (cells.size() != header.size())
            parse_fail(path, line_no,
                       "expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()));
        for (std::size_t j = 0; j < cols; ++j) {
            double v = 0.0;
            const auto [ptr, ec] =
                std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), v);
            if (ec != std::errc() || ptr != cells[j].data() + cells[j].size())
                parse_fail(path, line_no,
                           "column " + std::to_string(j + 1) + ": '" + std::string(cells[j]) +
                               "' is not a number");
            values.push_back(v);
        }
        if (has_label) {
            const std::string_view cell = cells.back();
            int label = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || label < 0)
                parse_fail(path, line_no,
                           "label '" + std::string(cell) + "' is not a non-negative integer");
            table.labels.push_back(label);
        }
        ++rows;
    }
    if (rows == 0) parse_fail(path, line_no + 1, "no data rows");
    table.values = Matrix(rows, cols, std::move(values));
    return table;
}

}  // namespace

void save_dataset(std::ostream& out, const LabeledDataset& dataset) {
    write_header(out, 'x', dataset.samples.cols(), dataset.has_labels());
    write_rows(out, dataset.samples, dataset.has_labels() ? &dataset.labels : nullptr);
}

void save_dataset(const std::string& path, const LabeledDataset& dataset) {
    save_to_path(path, [&](std::ostream& out) { save_dataset(out, dataset); });
}

LabeledDataset load_dataset(const std::string& path) {
    Table table = load_table(path, 'x');
    LabeledDataset ds;
    ds.samples = std::move(table.values);
    ds.labels = std::move(table.labels);
    if (ds.has_labels()) {
        const int max_label = *std::max_element(ds.labels.begin(), ds.labels.end());
        ds.class_count = static_cast<std::size_t>(max_label) + 1;
    }
    return ds;
}

void save_projections(std::ostream& out, const Matrix& projections) {
    write_header(out, 'u', projections.cols(), false);
    write_rows(out, projections, nullptr);
}

void save_projections(const std::string& path, const Matrix& projections) {
    save_to_path(path, [&](std::ostream& out) { save_projections(out, projections); });
}

Matrix load_projections(const std::string& path) {
    return load_table(path, 'u').values;
}

void save_embedding(const ReferenceEmbedding& embedding, const std::string& inputs_path,
                    const std::string& projections_path) {
    validate_embedding(embedding);
    save_to_path(inputs_path, [&](std::ostream& out) {
        write_header(out, 'x', embedding.inputs.cols(), false);
        write_rows(out, embedding.inputs, nullptr);
    });
    save_projections(projections_path, embedding.projections);
}

ReferenceEmbedding load_embedding(const std::string& inputs_path,
                                  const std::string& projections_path) {
    ReferenceEmbedding embedding;
    embedding.inputs = load_table(inputs_path, 'x').values;
    embedding.projections = load_projections(projections_path);
    if (embedding.inputs.rows() != embedding.projections.rows())
        raise(ErrorCode::count_mismatch,
              "'" + inputs_path + "' has " + std::to_string(embedding.inputs.rows()) +
                  " rows but '" + projections_path + "' has " +
                  std::to_string(embedding.projections.rows()));
    validate_embedding(embedding);
    return embedding;
}

void write_text_atomic(const std::string& path, std::string_view text) {
    save_to_path(path, [&](std::ostream& out) { out.write(text.data(), static_cast<std::streamsize>(text.size())); });
}

}  // namespace aumap
