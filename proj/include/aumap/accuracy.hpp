#pragma once

#include <string>
#include <vector>

#include "aumap/types.hpp"

namespace aumap {

// Agreement between approximate and oracle projections of the same points,
// in units of the oracle cloud's radial standard deviation.
struct AccuracyReport {
    double mean_distance = 0.0;  // mean of per-point normalized distances
    double variance = 0.0;       // population variance of those distances
    std::size_t n_points = 0;
    double sigma = 0.0;          // raw normalizer, projection-space units
};

// sigma = sqrt(mean squared distance of oracle points from their centroid);
// e_i = |approx_i - oracle_i| / sigma; reports mean and population variance
// of {e_i}. Throws degenerate_oracle when all oracle points coincide.
AccuracyReport normalized_mean_distance(const Matrix& approx, const Matrix& oracle);

std::string report_kv(const AccuracyReport& report);
std::string report_csv(const AccuracyReport& report);

// Standalone 2-D scatter figure: training projections colored by class,
// oracle test projections as outlined circles, approximate test projections
// as crosses, and a gray connector joining each oracle/approx pair.
// Byte-identical output for identical input. Label vectors may be empty
// (everything drawn as class 0); m must be 2 throughout.
void emit_scatter_svg(const ReferenceEmbedding& train, const std::vector<int>& train_labels,
                      const Matrix& oracle_test, const Matrix& approx_test,
                      const std::vector<int>& test_labels, const std::string& path);

}  // namespace aumap
