#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aumap/types.hpp"

namespace aumap {

enum class BenchVary { dimensionality, sample_count };

BenchVary parse_vary(const std::string& name);
const char* vary_name(BenchVary vary);

// One benchmark sweep: for each value, a mock dataset is generated (seeded),
// embedded with placeholder projections, and the operation under test is
// timed `repetitions` times with a monotonic clock.
struct BenchCondition {
    BenchVary vary = BenchVary::dimensionality;
    std::vector<std::size_t> values;  // ascending positive
    std::size_t fixed_value = 0;      // samples when varying dim, dim when varying samples
    std::size_t test_samples = 500;
    std::size_t batch_size = 5;       // == test_samples for the one-go condition
    std::size_t repetitions = 10;
    std::uint64_t seed = 0;
};

struct TimingRow {
    std::size_t value = 0;
    double mean_seconds = 0.0;
    double std_seconds = 0.0;
    std::vector<double> raw_samples;   // every timed repetition, warm-up excluded
    std::size_t excluded_count = 0;
    bool unstable = false;             // 2-sigma rule would drop more than half
    double warmup_seconds = 0.0;       // discarded warm-up repetition (projection only)
    std::uint64_t dataset_hash = 0;    // content hash of the generated samples
    std::uint64_t output_hash = 0;     // content hash of projection outputs
};

struct TimingReport {
    BenchVary vary = BenchVary::dimensionality;
    std::vector<TimingRow> rows;
    double clock_resolution_seconds = 0.0;
    std::string notes;
};

struct TimeSummary {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t excluded = 0;
    bool unstable = false;
};

// Mean and population std over the samples after one pass of 2-sigma outlier
// exclusion. Fewer than 3 samples: no exclusion. If the rule would drop more
// than half the samples, nothing is excluded and the result is flagged
// unstable instead.
TimeSummary summarize_times(std::span<const double> samples);

// Times the projector's training step (neighbor index build plus embedding
// assembly) per condition value. Dataset generation and placeholder
// projection synthesis are outside the timed section.
TimingReport bench_fit(const BenchCondition& cond);

// Times the projection of test_samples points delivered in batch_size chunks;
// the per-repetition figure is the summed wall-clock of the chunk calls. One
// warm-up repetition runs first, recorded but excluded from statistics.
// Always verifies that chunked outputs hash identically to a single
// whole-batch call before reporting.
TimingReport bench_project(const BenchCondition& cond);

// FNV-1a 64 over the IEEE-754 bytes of each value, least-significant first.
std::uint64_t hash_doubles(std::span<const double> values);

std::string timing_csv(const TimingReport& report);
std::string timing_svg(const TimingReport& report, const std::string& title);

}  // namespace aumap
