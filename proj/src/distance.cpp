#include "aumap/distance.hpp"

#include <limits>

namespace aumap {

// Eight independent accumulator chains; the combine order below is part of
// the kernel's definition and must not change, or previously reported
// distances would shift by an ulp between builds.
double squared_distance_bounded(const double* a, const double* b, std::size_t dim,
                                double bound) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
    std::size_t i = 0;
    while (i + 32 <= dim) {
        const std::size_t stop = i + 32;
        for (; i < stop; i += 8) {
            const double d0 = a[i] - b[i];
            const double d1 = a[i + 1] - b[i + 1];
            const double d2 = a[i + 2] - b[i + 2];
            const double d3 = a[i + 3] - b[i + 3];
            const double d4 = a[i + 4] - b[i + 4];
            const double d5 = a[i + 5] - b[i + 5];
            const double d6 = a[i + 6] - b[i + 6];
            const double d7 = a[i + 7] - b[i + 7];
            s0 += d0 * d0;
            s1 += d1 * d1;
            s2 += d2 * d2;
            s3 += d3 * d3;
            s4 += d4 * d4;
            s5 += d5 * d5;
            s6 += d6 * d6;
            s7 += d7 * d7;
        }
        const double partial = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
        if (partial > bound) return partial;
    }
    for (; i + 8 <= dim; i += 8) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        const double d4 = a[i + 4] - b[i + 4];
        const double d5 = a[i + 5] - b[i + 5];
        const double d6 = a[i + 6] - b[i + 6];
        const double d7 = a[i + 7] - b[i + 7];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
        s4 += d4 * d4;
        s5 += d5 * d5;
        s6 += d6 * d6;
        s7 += d7 * d7;
    }
    double sum = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
    for (; i < dim; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

double squared_distance(const double* a, const double* b, std::size_t dim) {
    return squared_distance_bounded(a, b, dim, std::numeric_limits<double>::infinity());
}

}  // namespace aumap
