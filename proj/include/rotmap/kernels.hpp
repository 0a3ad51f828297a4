#pragma once

#include <cstddef>

// Dense vector kernels behind the training loops. Each operation exists as
// a scalar reference implementation and (on x86-64) an AVX2 variant; the
// backend is picked once at startup from CPUID and can be forced with
// ROTMAP_KERNELS=scalar|avx2. The two backends are equivalence-tested
// against each other; only summation order differs.

namespace rotmap::kernels {

enum class Backend { Scalar, Avx2 };

// Backend in effect for the dispatched entry points below.
Backend active_backend();
const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// y = W x, W row-major rows×cols
void matvec(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
// y = Wᵀ x, W row-major rows×cols, y of length cols
void matvec_t(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
// W += alpha * x yᵀ, the outer-product accumulation of a weight gradient
void ger_acc(double* w, const double* x, const double* y, std::size_t rows, std::size_t cols,
             double alpha);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
void matvec_t(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
void ger_acc(double* w, const double* x, const double* y, std::size_t rows, std::size_t cols,
             double alpha);
}  // namespace scalar

namespace avx2 {
// False when the binary was built without x86-64 support or the CPU lacks AVX2.
bool supported();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
void matvec_t(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
void ger_acc(double* w, const double* x, const double* y, std::size_t rows, std::size_t cols,
             double alpha);
}  // namespace avx2

}  // namespace rotmap::kernels
