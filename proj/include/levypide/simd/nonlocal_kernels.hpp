#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace levypide::simd {

/// Row-compressed sparse matrix; column indices are sorted within each row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint32_t> row_ptr;  // rows + 1 entries
    std::vector<std::int32_t> col_idx;
    std::vector<double> values;
};

/// out[i] = sum_m coeffs[m] * u[i + offset + m], with u taken as zero outside [0, n).
using ToeplitzFn = void (*)(const double* coeffs, std::size_t ncoeff, std::ptrdiff_t offset, const double* u,
                            double* out, std::size_t n);

/// out = A u
using CsrFn = void (*)(const CsrMatrix& a, const double* u, double* out);

struct KernelSet {
    std::string_view name;
    ToeplitzFn toeplitz;
    CsrFn csr;
};

const KernelSet& scalar_kernels();

/// AVX2 kernels, or nullptr when the CPU lacks AVX2.
const KernelSet* avx2_kernels();

/// Best kernels for this CPU. LEVYPIDE_SIMD=scalar forces the reference path.
const KernelSet& active_kernels();

}  // namespace levypide::simd
