#pragma once

#include <cstddef>

namespace aumap::detail {

// Batch dot-product kernel over packed reference panels.
//
// A panel holds eight reference rows in coordinate-major order:
// panel[k * 8 + r] is coordinate k of the panel's r-th reference row.
// dots() computes out[q * 8 + r] = <queries[q], ref r> for nq <= max_group
// query vectors against one panel.
struct PanelKernels {
    std::size_t max_group;
    void (*dots)(const double* panel, const double* const* queries, std::size_t nq,
                 std::size_t dim, double* out);
    const char* name;
};

// Picks the widest instruction set the running CPU supports.
const PanelKernels& panel_kernels();

inline constexpr std::size_t kPanelWidth = 8;

}  // namespace aumap::detail
