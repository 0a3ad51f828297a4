#pragma once

#include <vector>

#include "rotmap/mat.hpp"
#include "rotmap/tolerances.hpp"

namespace rotmap::linalg {

// Eigendecomposition of a symmetric matrix, eigenvalues ascending,
// eigenvectors as the columns of an orthogonal matrix.
template <int N>
struct SymEig {
    VecN<double, N> eigenvalues;
    MatRC<double, N, N> eigenvectors;
};

// Singular value decomposition M = U diag(d) Vᵀ with d₁ ≥ d₂ ≥ d₃ ≥ 0.
// U and V are orthogonal but not constrained to det +1.
struct Svd3 {
    Mat3 u;
    Vec3 d;
    Mat3 v;
};

SymEig<3> sym_eig(const Mat3& a);
SymEig<4> sym_eig(const Mat4& a);

Svd3 svd3(const Mat3& m);

struct RankInfo {
    int rank = 0;
    double smallest_retained = 0.0;          // σ_rank, the last singular value counted
    std::vector<double> singular_values;     // all of them, descending
};

// Rank of a small matrix as the number of singular values above
// tol · σ_max. Intended for ambient Jacobians (9×n, n ≤ 10).
RankInfo numeric_rank(const MatX& j, double tol = tol::RANK_REL_TOL);

// Cyclic Jacobi diagonalization, templated on the scalar so forward-mode
// dual numbers can flow through it. `a` is destroyed. With
// `until_converged` the loop exits once the off-diagonal mass is at noise
// level (still capped at max_sweeps); without it exactly max_sweeps sweeps
// run, which keeps the dual-number control flow independent of the
// derivative seed. Eigenvalues come out ascending.
template <typename T, int N>
void jacobi_sym_eig(MatRC<T, N, N> a, VecN<T, N>& eigenvalues, MatRC<T, N, N>& eigenvectors,
                    int max_sweeps, bool until_converged) {
    using std::abs;
    using std::sqrt;

    MatRC<T, N, N> v = MatRC<T, N, N>::identity();

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (until_converged) {
            T off(0.0);
            for (int p = 0; p < N; ++p)
                for (int q = p + 1; q < N; ++q) off += a(p, q) * a(p, q);
            T diag(0.0);
            for (int p = 0; p < N; ++p) diag += a(p, p) * a(p, p);
            if (value_of(off) <= 1e-30 * (value_of(diag) + 1e-300)) break;
        }
        for (int p = 0; p < N; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const T apq = a(p, q);
                const double scale = std::abs(value_of(a(p, p))) + std::abs(value_of(a(q, q)));
                if (std::abs(value_of(apq)) <= 1e-300 ||
                    std::abs(value_of(apq)) < 1e-17 * scale) {
                    continue;
                }
                // Rotation angle from the standard stable formula.
                const T theta = (a(q, q) - a(p, p)) / (T(2.0) * apq);
                T t;
                if (value_of(theta) >= 0.0) {
                    t = T(1.0) / (theta + sqrt(theta * theta + T(1.0)));
                } else {
                    t = T(-1.0) / (sqrt(theta * theta + T(1.0)) - theta);
                }
                const T c = T(1.0) / sqrt(t * t + T(1.0));
                const T s = t * c;

                // A ← Jᵀ A J with J the rotation in the (p,q) plane.
                for (int k = 0; k < N; ++k) {
                    const T akp = a(k, p);
                    const T akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    const T apk = a(p, k);
                    const T aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < N; ++k) {
                    const T vkp = v(k, p);
                    const T vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    // Ascending sort; stable so exact ties keep their sweep order.
    int order[N];
    for (int i = 0; i < N; ++i) order[i] = i;
    for (int i = 1; i < N; ++i) {
        const int oi = order[i];
        int j = i - 1;
        while (j >= 0 && value_of(a(order[j], order[j])) > value_of(a(oi, oi))) {
            order[j + 1] = order[j];
            --j;
        }
        order[j + 1] = oi;
    }
    for (int i = 0; i < N; ++i) {
        eigenvalues[i] = a(order[i], order[i]);
        for (int k = 0; k < N; ++k) eigenvectors(k, i) = v(k, order[i]);
    }
}

}  // namespace rotmap::linalg
