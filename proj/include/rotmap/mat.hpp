#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rotmap/dual.hpp"
#include "rotmap/errors.hpp"

namespace rotmap {

// Fixed-size column vector over an arbitrary scalar (double or Dual).
template <typename T, int N>
struct VecN {
    std::array<T, N> a{};

    T& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
    const T& operator[](int i) const { return a[static_cast<std::size_t>(i)]; }
    static constexpr int size() { return N; }
};

// Fixed-size row-major matrix over an arbitrary scalar.
template <typename T, int R, int C>
struct MatRC {
    std::array<T, R * C> a{};

    T& operator()(int i, int j) { return a[static_cast<std::size_t>(i * C + j)]; }
    const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i * C + j)]; }
    static constexpr int rows() { return R; }
    static constexpr int cols() { return C; }

    static MatRC identity() {
        static_assert(R == C);
        MatRC m;
        for (int i = 0; i < R; ++i) m(i, i) = T(1.0);
        return m;
    }
};

using Vec3 = VecN<double, 3>;
using Vec4 = VecN<double, 4>;
using Mat3 = MatRC<double, 3, 3>;
using Mat4 = MatRC<double, 4, 4>;
using Mat32 = MatRC<double, 3, 2>;

template <typename T, int N>
VecN<T, N> operator+(const VecN<T, N>& x, const VecN<T, N>& y) {
    VecN<T, N> r;
    for (int i = 0; i < N; ++i) r[i] = x[i] + y[i];
    return r;
}

template <typename T, int N>
VecN<T, N> operator-(const VecN<T, N>& x, const VecN<T, N>& y) {
    VecN<T, N> r;
    for (int i = 0; i < N; ++i) r[i] = x[i] - y[i];
    return r;
}

template <typename T, int N, typename S>
VecN<T, N> operator*(S s, const VecN<T, N>& x) {
    VecN<T, N> r;
    for (int i = 0; i < N; ++i) r[i] = T(s) * x[i];
    return r;
}

template <typename T, int N>
T dot(const VecN<T, N>& x, const VecN<T, N>& y) {
    T s(0.0);
    for (int i = 0; i < N; ++i) s += x[i] * y[i];
    return s;
}

template <typename T, int N>
T norm(const VecN<T, N>& x) {
    using std::sqrt;
    return sqrt(dot(x, x));
}

template <typename T>
VecN<T, 3> cross(const VecN<T, 3>& x, const VecN<T, 3>& y) {
    return {{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]}};
}

template <typename T, int R, int C>
MatRC<T, R, C> operator+(const MatRC<T, R, C>& x, const MatRC<T, R, C>& y) {
    MatRC<T, R, C> r;
    for (std::size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

template <typename T, int R, int C>
MatRC<T, R, C> operator-(const MatRC<T, R, C>& x, const MatRC<T, R, C>& y) {
    MatRC<T, R, C> r;
    for (std::size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

template <typename T, int R, int C, typename S>
MatRC<T, R, C> operator*(S s, const MatRC<T, R, C>& x) {
    MatRC<T, R, C> r;
    for (std::size_t i = 0; i < x.a.size(); ++i) r.a[i] = T(s) * x.a[i];
    return r;
}

template <typename T, int R, int K, int C>
MatRC<T, R, C> operator*(const MatRC<T, R, K>& x, const MatRC<T, K, C>& y) {
    MatRC<T, R, C> r;
    for (int i = 0; i < R; ++i)
        for (int k = 0; k < K; ++k) {
            const T xik = x(i, k);
            for (int j = 0; j < C; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

template <typename T, int R, int C>
VecN<T, R> operator*(const MatRC<T, R, C>& m, const VecN<T, C>& x) {
    VecN<T, R> r;
    for (int i = 0; i < R; ++i) {
        T s(0.0);
        for (int j = 0; j < C; ++j) s += m(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

template <typename T, int R, int C>
MatRC<T, C, R> transpose(const MatRC<T, R, C>& m) {
    MatRC<T, C, R> r;
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) r(j, i) = m(i, j);
    return r;
}

template <typename T, int N>
T trace(const MatRC<T, N, N>& m) {
    T s(0.0);
    for (int i = 0; i < N; ++i) s += m(i, i);
    return s;
}

template <typename T>
T det3(const MatRC<T, 3, 3>& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

template <typename T, int R, int C>
T frobenius_norm_sq(const MatRC<T, R, C>& m) {
    T s(0.0);
    for (const T& e : m.a) s += e * e;
    return s;
}

template <typename T, int R, int C>
T frobenius_norm(const MatRC<T, R, C>& m) {
    using std::sqrt;
    return sqrt(frobenius_norm_sq(m));
}

template <int R, int C>
double max_abs(const MatRC<double, R, C>& m) {
    double s = 0.0;
    for (double e : m.a) s = std::max(s, std::abs(e));
    return s;
}

template <typename T, int N, int M>
MatRC<T, N, M> outer(const VecN<T, N>& x, const VecN<T, M>& y) {
    MatRC<T, N, M> r;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < M; ++j) r(i, j) = x[i] * y[j];
    return r;
}

template <int R, int C>
bool all_finite(const MatRC<double, R, C>& m) {
    for (double e : m.a)
        if (!std::isfinite(e)) return false;
    return true;
}

template <int N>
bool all_finite(const VecN<double, N>& v) {
    for (double e : v.a)
        if (!std::isfinite(e)) return false;
    return true;
}

// Row-major vectorization of a 3×3 matrix; the layout every 9-row Jacobian
// and every Procrustes input uses.
template <typename T>
VecN<T, 9> vec9(const MatRC<T, 3, 3>& m) {
    VecN<T, 9> v;
    for (int i = 0; i < 9; ++i) v[i] = m.a[static_cast<std::size_t>(i)];
    return v;
}

template <typename T>
MatRC<T, 3, 3> unvec9(const VecN<T, 9>& v) {
    MatRC<T, 3, 3> m;
    for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = v[i];
    return m;
}

// Small dense dynamic matrix, row-major. Holds Jacobians (9×n, n ≤ 10),
// weight matrices of weighted Procrustes, and similar desk-scale blocks;
// not meant for large linear algebra.
class MatX {
public:
    MatX() = default;
    MatX(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
    const double& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }

    const double* data() const { return a_.data(); }
    double* data() { return a_.data(); }

    MatX transposed() const {
        MatX r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    bool finite() const {
        for (double e : a_)
            if (!std::isfinite(e)) return false;
        return true;
    }

    double max_abs() const {
        double s = 0.0;
        for (double e : a_) s = std::max(s, std::abs(e));
        return s;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

inline MatX matmul(const MatX& x, const MatX& y) {
    if (x.cols() != y.rows()) throw ShapeMismatch("matmul: inner dimensions disagree");
    MatX r(x.rows(), y.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int k = 0; k < x.cols(); ++k) {
            const double xik = x(i, k);
            for (int j = 0; j < y.cols(); ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

// y = Mᵀ x for a tall matrix M; the chain-rule contraction Jᵀ·grad.
inline std::vector<double> matvec_transposed(const MatX& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.rows()) throw ShapeMismatch("matvec_transposed: size disagrees");
    std::vector<double> y(static_cast<std::size_t>(m.cols()), 0.0);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) y[static_cast<std::size_t>(j)] += m(i, j) * x[static_cast<std::size_t>(i)];
    return y;
}

}  // namespace rotmap
