#include "rotmap/kernels.hpp"

// AVX2/FMA variants. This translation unit is the only one built with
// -mavx2 -mfma; nothing here runs unless avx2::supported() returned true.

#if defined(__x86_64__) || defined(_M_X64)
#define ROTMAP_HAVE_X86 1
#include <immintrin.h>
#else
#define ROTMAP_HAVE_X86 0
#endif

namespace rotmap::kernels::avx2 {

#if ROTMAP_HAVE_X86

bool supported() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d sum2 = _mm_add_pd(lo, hi);
    double s = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) y[i] = dot(w + i * cols, x, cols);
}

void matvec_t(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) axpy(x[i], w + i * cols, y, cols);
}

void ger_acc(double* w, const double* x, const double* y, std::size_t rows, std::size_t cols,
             double alpha) {
    for (std::size_t i = 0; i < rows; ++i) axpy(alpha * x[i], y, w + i * cols, cols);
}

#else  // !ROTMAP_HAVE_X86

bool supported() { return false; }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void matvec(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
    scalar::matvec(w, x, y, rows, cols);
}
void matvec_t(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
    scalar::matvec_t(w, x, y, rows, cols);
}
void ger_acc(double* w, const double* x, const double* y, std::size_t rows, std::size_t cols,
             double alpha) {
    scalar::ger_acc(w, x, y, rows, cols, alpha);
}

#endif

}  // namespace rotmap::kernels::avx2
