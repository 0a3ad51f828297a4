#include "rotmap/kernels.hpp"

// Reference kernels. Plain loops, one accumulator, ascending index order;
// this is the semantics the AVX2 variants are tested against.

namespace rotmap::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
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

}  // namespace rotmap::kernels::scalar
