#include "levypide/simd/nonlocal_kernels.hpp"

#include <algorithm>

namespace levypide::simd {

namespace {

void toeplitz_scalar(const double* c, std::size_t nc, std::ptrdiff_t offset, const double* u, double* out,
                     std::size_t n) {
    const auto sn = static_cast<std::ptrdiff_t>(n);
    const auto snc = static_cast<std::ptrdiff_t>(nc);
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        const std::ptrdiff_t first = i + offset;
        const std::ptrdiff_t m_lo = first < 0 ? -first : 0;
        const std::ptrdiff_t m_hi = std::min(snc, sn - first);
        double s = 0.0;
        for (std::ptrdiff_t m = m_lo; m < m_hi; ++m) s += c[m] * u[first + m];
        out[i] = s;
    }
}

void csr_scalar(const CsrMatrix& a, const double* u, double* out) {
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::uint32_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) s += a.values[e] * u[a.col_idx[e]];
        out[i] = s;
    }
}

}  // namespace

const KernelSet& scalar_kernels() {
    static const KernelSet k{"scalar", &toeplitz_scalar, &csr_scalar};
    return k;
}

}  // namespace levypide::simd
