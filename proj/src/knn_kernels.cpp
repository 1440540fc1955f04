#include "knn_kernels.hpp"

#include <cstddef>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define AUMAP_X86 1
#endif

namespace aumap::detail {
namespace {

// Fixed-count query loops so the accumulators stay in registers. The dynamic
// entry points switch on nq and fall back to chunking when nq exceeds the
// kernel's register budget.

template <int NQ>
void dots_generic_fixed(const double* panel, const double* const* qs, std::size_t dim,
                        double* out) {
    double acc[NQ][kPanelWidth] = {};
    for (std::size_t k = 0; k < dim; ++k) {
        const double* pv = panel + k * kPanelWidth;
        for (int q = 0; q < NQ; ++q) {
            const double x = qs[q][k];
            for (std::size_t r = 0; r < kPanelWidth; ++r) acc[q][r] += x * pv[r];
        }
    }
    for (int q = 0; q < NQ; ++q)
        for (std::size_t r = 0; r < kPanelWidth; ++r) out[q * kPanelWidth + r] = acc[q][r];
}

void dots_generic(const double* panel, const double* const* qs, std::size_t nq,
                  std::size_t dim, double* out) {
    while (nq > 0) {
        switch (nq) {
            case 1: dots_generic_fixed<1>(panel, qs, dim, out); return;
            case 2: dots_generic_fixed<2>(panel, qs, dim, out); return;
            case 3: dots_generic_fixed<3>(panel, qs, dim, out); return;
            default: dots_generic_fixed<4>(panel, qs, dim, out); break;
        }
        qs += 4;
        out += 4 * kPanelWidth;
        nq -= 4;
    }
}

#ifdef AUMAP_X86

template <int NQ>
__attribute__((target("avx2,fma"))) void dots_avx2_fixed(const double* panel,
                                                         const double* const* qs,
                                                         std::size_t dim, double* out) {
    __m256d lo[NQ], hi[NQ];
    for (int q = 0; q < NQ; ++q) {
        lo[q] = _mm256_setzero_pd();
        hi[q] = _mm256_setzero_pd();
    }
    for (std::size_t k = 0; k < dim; ++k) {
        const double* pv = panel + k * kPanelWidth;
        const __m256d p0 = _mm256_loadu_pd(pv);
        const __m256d p1 = _mm256_loadu_pd(pv + 4);
        for (int q = 0; q < NQ; ++q) {
            const __m256d x = _mm256_set1_pd(qs[q][k]);
            lo[q] = _mm256_fmadd_pd(x, p0, lo[q]);
            hi[q] = _mm256_fmadd_pd(x, p1, hi[q]);
        }
    }
    for (int q = 0; q < NQ; ++q) {
        _mm256_storeu_pd(out + q * kPanelWidth, lo[q]);
        _mm256_storeu_pd(out + q * kPanelWidth + 4, hi[q]);
    }
}

__attribute__((target("avx2,fma"))) void dots_avx2(const double* panel,
                                                   const double* const* qs, std::size_t nq,
                                                   std::size_t dim, double* out) {
    while (nq > 0) {
        switch (nq) {
            case 1: dots_avx2_fixed<1>(panel, qs, dim, out); return;
            case 2: dots_avx2_fixed<2>(panel, qs, dim, out); return;
            case 3: dots_avx2_fixed<3>(panel, qs, dim, out); return;
            default: dots_avx2_fixed<4>(panel, qs, dim, out); break;
        }
        qs += 4;
        out += 4 * kPanelWidth;
        nq -= 4;
    }
}

template <int NQ>
__attribute__((target("avx512f"))) void dots_avx512_fixed(const double* panel,
                                                          const double* const* qs,
                                                          std::size_t dim, double* out) {
    __m512d acc[NQ];
    for (int q = 0; q < NQ; ++q) acc[q] = _mm512_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) {
        const __m512d pv = _mm512_loadu_pd(panel + k * kPanelWidth);
        for (int q = 0; q < NQ; ++q)
            acc[q] = _mm512_fmadd_pd(_mm512_set1_pd(qs[q][k]), pv, acc[q]);
    }
    for (int q = 0; q < NQ; ++q) _mm512_storeu_pd(out + q * kPanelWidth, acc[q]);
}

__attribute__((target("avx512f"))) void dots_avx512(const double* panel,
                                                    const double* const* qs, std::size_t nq,
                                                    std::size_t dim, double* out) {
    while (nq > 0) {
        switch (nq) {
            case 1: dots_avx512_fixed<1>(panel, qs, dim, out); return;
            case 2: dots_avx512_fixed<2>(panel, qs, dim, out); return;
            case 3: dots_avx512_fixed<3>(panel, qs, dim, out); return;
            case 4: dots_avx512_fixed<4>(panel, qs, dim, out); return;
            case 5: dots_avx512_fixed<5>(panel, qs, dim, out); return;
            case 6: dots_avx512_fixed<6>(panel, qs, dim, out); return;
            case 7: dots_avx512_fixed<7>(panel, qs, dim, out); return;
            default: dots_avx512_fixed<8>(panel, qs, dim, out); break;
        }
        qs += 8;
        out += 8 * kPanelWidth;
        nq -= 8;
    }
}

#endif  // AUMAP_X86

PanelKernels select_kernels() {
#ifdef AUMAP_X86
    if (__builtin_cpu_supports("avx512f")) return {8, &dots_avx512, "avx512"};
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return {4, &dots_avx2, "avx2"};
#endif
    return {4, &dots_generic, "generic"};
}

}  // namespace

const PanelKernels& panel_kernels() {
    static const PanelKernels kernels = select_kernels();
    return kernels;
}

}  // namespace aumap::detail
