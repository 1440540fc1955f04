#pragma once

#include <cstddef>

namespace aumap {

// Canonical squared Euclidean distance. Every component that reports a
// distance calls this one out-of-line function, so reported values are
// bit-identical across index strategies and call sites.
double squared_distance(const double* a, const double* b, std::size_t dim);

// Same accumulation as squared_distance, but gives up once the partial sum
// exceeds `bound`. The partial sum grows monotonically, so a return value
// greater than `bound` proves the true squared distance exceeds it. A
// completed evaluation returns exactly squared_distance(a, b, dim).
double squared_distance_bounded(const double* a, const double* b, std::size_t dim,
                                double bound);

}  // namespace aumap
