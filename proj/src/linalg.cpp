#include "rotmap/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "rotmap/errors.hpp"

namespace rotmap::linalg {

namespace {

constexpr int kMaxSweeps = 30;

template <int N>
SymEig<N> sym_eig_impl(const MatRC<double, N, N>& a) {
    if (!all_finite(a)) throw NonFinite("sym_eig: input has a non-finite entry");
    // Callers may have tiny asymmetry from accumulated round-off; fold it in.
    MatRC<double, N, N> s;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    SymEig<N> out;
    jacobi_sym_eig<double, N>(s, out.eigenvalues, out.eigenvectors, kMaxSweeps, true);
    return out;
}

// Dynamic-size cyclic Jacobi on a symmetric matrix held in a MatX. Only the
// eigenvalues are needed (for singular values of small Jacobians), so no
// eigenvector accumulation. Returns them ascending.
std::vector<double> jacobi_eigenvalues(MatX a) {
    const int n = a.rows();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        double diag = 0.0;
        for (int p = 0; p < n; ++p) {
            diag += a(p, p) * a(p, p);
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off <= 1e-30 * (diag + 1e-300)) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                const double scale = std::abs(a(p, p)) + std::abs(a(q, q));
                if (std::abs(apq) <= 1e-300 || std::abs(apq) < 1e-17 * scale) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0) ? 1.0 / (theta + std::sqrt(theta * theta + 1.0))
                                                : -1.0 / (std::sqrt(theta * theta + 1.0) - theta);
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace

SymEig<3> sym_eig(const Mat3& a) { return sym_eig_impl<3>(a); }
SymEig<4> sym_eig(const Mat4& a) { return sym_eig_impl<4>(a); }

Svd3 svd3(const Mat3& m) {
    if (!all_finite(m)) throw NonFinite("svd3: input has a non-finite entry");

    // Eigendecompose MᵀM; its eigenvectors are the right singular vectors
    // and its eigenvalues the squared singular values.
    const SymEig<3> e = sym_eig(transpose(m) * m);

    Svd3 out;
    Vec3 vcol[3];
    for (int i = 0; i < 3; ++i) {
        // Descending: column i of V is eigenvector 2−i of the ascending set.
        const int src = 2 - i;
        for (int k = 0; k < 3; ++k) vcol[i][k] = e.eigenvectors(k, src);
    }

    // One-sided Jacobi polish on B = M·V. Forming MᵀM squares the condition
    // number, so a singular value below √ε·σ_max comes out of the
    // eigenvalues with its leading digits gone; re-orthogonalizing the
    // columns of B (and rotating V along) restores full precision while
    // keeping B = M·V an identity by construction, which is what makes the
    // reconstruction bound hold for ill-conditioned inputs too.
    Vec3 bcol[3];
    for (int i = 0; i < 3; ++i) bcol[i] = m * vcol[i];
    for (int sweep = 0; sweep < 12; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < 3; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                const double app = dot(bcol[p], bcol[p]);
                const double aqq = dot(bcol[q], bcol[q]);
                const double apq = dot(bcol[p], bcol[q]);
                if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq) || apq == 0.0) continue;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = zeta >= 0.0 ? 1.0 / (zeta + std::sqrt(zeta * zeta + 1.0))
                                             : -1.0 / (std::sqrt(zeta * zeta + 1.0) - zeta);
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Vec3 bp = bcol[p];
                const Vec3 bq = bcol[q];
                bcol[p] = c * bp - s * bq;
                bcol[q] = s * bp + c * bq;
                const Vec3 vp = vcol[p];
                const Vec3 vq = vcol[q];
                vcol[p] = c * vp - s * vq;
                vcol[q] = s * vp + c * vq;
                rotated = true;
            }
        }
        if (!rotated) break;
    }

    // Singular values are the polished column norms; re-sort descending
    // (stable, so exact ties keep their order).
    int order[3] = {0, 1, 2};
    const double norms[3] = {norm(bcol[0]), norm(bcol[1]), norm(bcol[2])};
    for (int i = 1; i < 3; ++i) {
        const int oi = order[i];
        int j = i - 1;
        while (j >= 0 && norms[order[j]] < norms[oi]) {
            order[j + 1] = order[j];
            --j;
        }
        order[j + 1] = oi;
    }
    {
        const Vec3 b0 = bcol[order[0]], b1 = bcol[order[1]], b2 = bcol[order[2]];
        const Vec3 v0 = vcol[order[0]], v1 = vcol[order[1]], v2 = vcol[order[2]];
        bcol[0] = b0; bcol[1] = b1; bcol[2] = b2;
        vcol[0] = v0; vcol[1] = v1; vcol[2] = v2;
    }
    for (int i = 0; i < 3; ++i) out.d[i] = norm(bcol[i]);

    // Left singular vectors: the normalized polished columns where d_i
    // carries signal, completed to an orthonormal basis where it does not
    // (rank-deficient M).
    Vec3 ucol[3];
    const double dmax = out.d[0];
    for (int i = 0; i < 3; ++i) {
        Vec3 u;
        bool need_completion = true;
        if (out.d[i] > 1e-13 * dmax && out.d[i] > 0.0) {
            u = (1.0 / out.d[i]) * bcol[i];
            // Guard against drift between near-equal singular values.
            for (int j = 0; j < i; ++j) u = u - dot(ucol[j], u) * ucol[j];
            const double n = norm(u);
            if (n > 0.5) {
                u = (1.0 / n) * u;
                need_completion = false;
            }
        }
        if (need_completion) {
            // Pick the basis vector least aligned with the columns built so
            // far (smallest index wins ties, keeping the result deterministic).
            int best = 0;
            double best_residual = -1.0;
            for (int k = 0; k < 3; ++k) {
                Vec3 c{};
                c[k] = 1.0;
                for (int j = 0; j < i; ++j) c = c - dot(ucol[j], c) * ucol[j];
                const double r = norm(c);
                if (r > best_residual + 1e-12) {
                    best_residual = r;
                    best = k;
                }
            }
            Vec3 c{};
            c[best] = 1.0;
            for (int j = 0; j < i; ++j) c = c - dot(ucol[j], c) * ucol[j];
            u = (1.0 / norm(c)) * c;
        }
        ucol[i] = u;
    }
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            out.u(k, i) = ucol[i][k];
            out.v(k, i) = vcol[i][k];
        }
    return out;
}

RankInfo numeric_rank(const MatX& j, double tol) {
    if (j.rows() <= 0 || j.cols() <= 0) throw ShapeMismatch("numeric_rank: empty matrix");
    if (!j.finite()) throw NonFinite("numeric_rank: input has a non-finite entry");

    // Work with the Gram matrix of the thinner side.
    const bool tall = j.rows() >= j.cols();
    const MatX& b = tall ? j : j.transposed();
    const int n = b.cols();
    MatX g(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = p; q < n; ++q) {
            double s = 0.0;
            for (int k = 0; k < b.rows(); ++k) s += b(k, p) * b(k, q);
            g(p, q) = s;
            g(q, p) = s;
        }

    const std::vector<double> ev = jacobi_eigenvalues(std::move(g));

    RankInfo info;
    info.singular_values.reserve(ev.size());
    for (auto it = ev.rbegin(); it != ev.rend(); ++it)
        info.singular_values.push_back(std::sqrt(std::max(*it, 0.0)));

    const double smax = info.singular_values.front();
    const double threshold = tol * smax;
    for (double s : info.singular_values) {
        if (s > threshold && s > 0.0) {
            ++info.rank;
            info.smallest_retained = s;
        }
    }
    return info;
}

}  // namespace rotmap::linalg
