#include "rotmap/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace rotmap::kernels {

namespace {

Backend resolve_backend() {
    if (const char* env = std::getenv("ROTMAP_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2::supported()) return Backend::Avx2;
        // unknown value or unsupported request: fall through to auto
    }
    return avx2::supported() ? Backend::Avx2 : Backend::Scalar;
}

}  // namespace

Backend active_backend() {
    static const Backend b = resolve_backend();
    return b;
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Avx2: return "avx2";
        case Backend::Scalar: return "scalar";
    }
    return "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
    return active_backend() == Backend::Avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active_backend() == Backend::Avx2 ? avx2::axpy(alpha, x, y, n) : scalar::axpy(alpha, x, y, n);
}

void matvec(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
    active_backend() == Backend::Avx2 ? avx2::matvec(w, x, y, rows, cols)
                                      : scalar::matvec(w, x, y, rows, cols);
}

void matvec_t(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
    active_backend() == Backend::Avx2 ? avx2::matvec_t(w, x, y, rows, cols)
                                      : scalar::matvec_t(w, x, y, rows, cols);
}

void ger_acc(double* w, const double* x, const double* y, std::size_t rows, std::size_t cols,
             double alpha) {
    active_backend() == Backend::Avx2 ? avx2::ger_acc(w, x, y, rows, cols, alpha)
                                      : scalar::ger_acc(w, x, y, rows, cols, alpha);
}

}  // namespace rotmap::kernels
