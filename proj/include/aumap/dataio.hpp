#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "aumap/types.hpp"

namespace aumap {

// Sample matrix plus optional integer class labels. labels is empty when the
// source had no label column; class_count is 0 in that case.
struct LabeledDataset {
    Matrix samples;
    std::vector<int> labels;
    std::size_t class_count = 0;

    bool has_labels() const noexcept { return !labels.empty(); }
};

// Multiclass Poisson mock-data generator: each class draws a rate vector
// uniformly from [rate_low, rate_high]^dim, then emits samples_per_class
// points whose coordinate j ~ Poisson(rate[j]).
struct PoissonSpec {
    std::size_t class_count = 5;
    std::size_t dim = 1000;
    std::size_t samples_per_class = 1000;
    double rate_low = 1.0;
    double rate_high = 10.0;
    std::uint64_t seed = 0;
};

// Deterministic for a fixed seed: the draw order (per class, rates first,
// then row-major samples) and the PRNG (xoshiro256** with splitmix64
// seeding) are both part of the format.
LabeledDataset generate_poisson(const PoissonSpec& spec);

// Decimal form with 17 significant digits: parses back to the identical bits.
std::string format_double(double value);

// CSV, UTF-8, LF line endings. Sample files carry columns x0..x{D-1} plus an
// optional trailing integer column "label"; projection files carry u0..u{m-1}.
void save_dataset(std::ostream& out, const LabeledDataset& dataset);
void save_dataset(const std::string& path, const LabeledDataset& dataset);
LabeledDataset load_dataset(const std::string& path);

void save_projections(std::ostream& out, const Matrix& projections);
void save_projections(const std::string& path, const Matrix& projections);
Matrix load_projections(const std::string& path);

void save_embedding(const ReferenceEmbedding& embedding, const std::string& inputs_path,
                    const std::string& projections_path);
ReferenceEmbedding load_embedding(const std::string& inputs_path,
                                  const std::string& projections_path);

// Writes to a temporary file in the same directory, then renames over path.
void write_text_atomic(const std::string& path, std::string_view text);

}  // namespace aumap
