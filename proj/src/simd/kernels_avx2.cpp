#include <immintrin.h>

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "levypide/simd/nonlocal_kernels.hpp"

namespace levypide::simd {

namespace {

// Vectorised across output rows: each lane accumulates over m in the same order as the
// scalar kernel, with separate multiply and add, so results match it bit for bit.
__attribute__((target("avx2"))) void toeplitz_avx2(const double* c, std::size_t nc, std::ptrdiff_t offset,
                                                   const double* u, double* out, std::size_t n) {
    const auto snc = static_cast<std::ptrdiff_t>(nc);
    const std::ptrdiff_t pad = snc + (offset < 0 ? -offset : offset) + 4;
    thread_local std::vector<double> buf;
    buf.assign(n + 2 * static_cast<std::size_t>(pad), 0.0);
    std::copy(u, u + n, buf.begin() + pad);
    const double* up = buf.data() + pad + offset;

    const auto sn = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t i = 0;
    for (; i + 4 <= sn; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::ptrdiff_t m = 0; m < snc; ++m) {
            const __m256d cm = _mm256_broadcast_sd(c + m);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(cm, _mm256_loadu_pd(up + i + m)));
        }
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < sn; ++i) {
        double s = 0.0;
        for (std::ptrdiff_t m = 0; m < snc; ++m) s += c[m] * up[i + m];
        out[i] = s;
    }
}

__attribute__((target("avx2"))) void csr_avx2(const CsrMatrix& a, const double* u, double* out) {
    const double* vals = a.values.data();
    const std::int32_t* cols = a.col_idx.data();
    for (std::size_t i = 0; i < a.rows; ++i) {
        std::uint32_t e = a.row_ptr[i];
        const std::uint32_t end = a.row_ptr[i + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; e + 4 <= end; e += 4) {
            const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + e));
            const __m256d x = _mm256_i32gather_pd(u, idx, 8);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(vals + e), x));
        }
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, acc);
        double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
        for (; e < end; ++e) s += vals[e] * u[cols[e]];
        out[i] = s;
    }
}

}  // namespace

const KernelSet* avx2_kernels() {
    static const KernelSet k{"avx2", &toeplitz_avx2, &csr_avx2};
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &k : nullptr;
}

const KernelSet& active_kernels() {
    static const KernelSet* chosen = [] {
        const char* env = std::getenv("LEVYPIDE_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
        const KernelSet* v = avx2_kernels();
        return v != nullptr ? v : &scalar_kernels();
    }();
    return *chosen;
}

}  // namespace levypide::simd
