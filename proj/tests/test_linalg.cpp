#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rotmap/dual.hpp"
#include "rotmap/errors.hpp"
#include "rotmap/linalg.hpp"
#include "rotmap/mat.hpp"

using rotmap::Dual;
using rotmap::Mat3;
using rotmap::Mat4;
using rotmap::MatX;
using rotmap::Vec3;
using rotmap::Vec4;

namespace {

template <int N>
rotmap::MatRC<double, N, N> random_orthogonal(std::mt19937_64& gen) {
    // Modified Gram-Schmidt on a random Gaussian matrix; redraw on the
    // (measure-zero) chance of a short column.
    rotmap::MatRC<double, N, N> q;
    for (int c = 0; c < N; ++c) {
        rotmap::VecN<double, N> v;
        for (int i = 0; i < N; ++i) v[i] = oracle::nrand(gen);
        for (int p = 0; p < c; ++p) {
            double proj = 0.0;
            for (int i = 0; i < N; ++i) proj += q(i, p) * v[i];
            for (int i = 0; i < N; ++i) v[i] -= proj * q(i, p);
        }
        const double n = norm(v);
        if (n < 1e-6) {
            --c;
            continue;
        }
        for (int i = 0; i < N; ++i) q(i, c) = v[i] / n;
    }
    return q;
}

template <int N>
std::vector<std::vector<double>> to_rows(const rotmap::MatRC<double, N, N>& m) {
    std::vector<std::vector<double>> rows(N, std::vector<double>(N));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return rows;
}

template <int N>
double ortho_error(const rotmap::MatRC<double, N, N>& q) {
    const auto g = transpose(q) * q;
    double err = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            err = std::max(err, std::abs(g(i, j) - want));
        }
    return err;
}

}  // namespace

TEST_CASE("sym_eig recovers a planted spectrum") {
    std::mt19937_64 gen(101);
    for (int trial = 0; trial < 300; ++trial) {
        const auto q = random_orthogonal<3>(gen);
        Vec3 lambda;
        for (int i = 0; i < 3; ++i) lambda[i] = oracle::urand(gen, -5.0, 5.0);
        Mat3 diag{};
        for (int i = 0; i < 3; ++i) diag(i, i) = lambda[i];
        const Mat3 a = q * diag * transpose(q);

        const auto e = rotmap::linalg::sym_eig(a);
        std::vector<double> want{lambda[0], lambda[1], lambda[2]};
        std::sort(want.begin(), want.end());
        for (int i = 0; i < 3; ++i) CHECK_NEAR(e.eigenvalues[i], want[static_cast<std::size_t>(i)], 1e-9);

        // Residual and orthonormality, the decomposition's own contract.
        const double anorm = frobenius_norm(a);
        for (int i = 0; i < 3; ++i) {
            Vec3 v;
            for (int k = 0; k < 3; ++k) v[k] = e.eigenvectors(k, i);
            const Vec3 r = a * v - e.eigenvalues[i] * v;
            CHECK(norm(r) <= 1e-10 * anorm + 1e-30);
        }
        CHECK(ortho_error(e.eigenvectors) <= 1e-12);
    }
}

TEST_CASE("sym_eig matches the bisection oracle on random symmetric matrices") {
    std::mt19937_64 gen(102);
    for (int trial = 0; trial < 200; ++trial) {
        Mat4 a{};
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) {
                const double v = oracle::urand(gen, -3.0, 3.0);
                a(i, j) = v;
                a(j, i) = v;
            }
        const auto e = rotmap::linalg::sym_eig(a);
        const auto want = oracle::sym_eigenvalues_bisect(to_rows<4>(a));
        for (int i = 0; i < 4; ++i) CHECK_NEAR(e.eigenvalues[i], want[static_cast<std::size_t>(i)], 1e-8);

        const double anorm = frobenius_norm(a);
        for (int i = 0; i < 4; ++i) {
            Vec4 v;
            for (int k = 0; k < 4; ++k) v[k] = e.eigenvectors(k, i);
            const Vec4 r = a * v - e.eigenvalues[i] * v;
            CHECK(norm(r) <= 1e-10 * anorm + 1e-30);
        }
        CHECK(ortho_error(e.eigenvectors) <= 1e-12);
    }
}

TEST_CASE("sym_eig handles hand-computed and degenerate spectra") {
    // [[2,1,0],[1,2,0],[0,0,5]] has eigenvalues 1, 3, 5.
    Mat3 a{};
    a(0, 0) = 2.0; a(0, 1) = 1.0;
    a(1, 0) = 1.0; a(1, 1) = 2.0;
    a(2, 2) = 5.0;
    const auto e = rotmap::linalg::sym_eig(a);
    CHECK_NEAR(e.eigenvalues[0], 1.0, 1e-12);
    CHECK_NEAR(e.eigenvalues[1], 3.0, 1e-12);
    CHECK_NEAR(e.eigenvalues[2], 5.0, 1e-12);
    // λ=1 eigenvector is ±(1,−1,0)/√2.
    CHECK_NEAR(std::abs(e.eigenvectors(0, 0)), std::sqrt(0.5), 1e-12);
    CHECK_NEAR(e.eigenvectors(1, 0), -e.eigenvectors(0, 0), 1e-12);
    CHECK_NEAR(e.eigenvectors(2, 0), 0.0, 1e-12);

    // Repeated eigenvalue under a random similarity.
    std::mt19937_64 gen(103);
    const auto q = random_orthogonal<3>(gen);
    Mat3 d{};
    d(0, 0) = 2.0; d(1, 1) = 2.0; d(2, 2) = 5.0;
    const Mat3 b = q * d * transpose(q);
    const auto eb = rotmap::linalg::sym_eig(b);
    CHECK_NEAR(eb.eigenvalues[0], 2.0, 1e-10);
    CHECK_NEAR(eb.eigenvalues[1], 2.0, 1e-10);
    CHECK_NEAR(eb.eigenvalues[2], 5.0, 1e-10);
    CHECK(ortho_error(eb.eigenvectors) <= 1e-12);

    // The zero matrix.
    const auto ez = rotmap::linalg::sym_eig(Mat3{});
    for (int i = 0; i < 3; ++i) CHECK(ez.eigenvalues[i] == 0.0);
    CHECK(ortho_error(ez.eigenvectors) <= 1e-15);
}

TEST_CASE("sym_eig is deterministic and rejects non-finite input") {
    std::mt19937_64 gen(104);
    Mat4 a{};
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const double v = oracle::urand(gen, -1.0, 1.0);
            a(i, j) = v;
            a(j, i) = v;
        }
    const auto e1 = rotmap::linalg::sym_eig(a);
    const auto e2 = rotmap::linalg::sym_eig(a);
    for (int i = 0; i < 4; ++i) CHECK(e1.eigenvalues[i] == e2.eigenvalues[i]);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(e1.eigenvectors(i, j) == e2.eigenvectors(i, j));

    a(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(rotmap::linalg::sym_eig(a), rotmap::NonFinite);
}

TEST_CASE("svd3 reconstructs ten thousand seeded matrices") {
    std::mt19937_64 gen(105);
    for (int trial = 0; trial < 10000; ++trial) {
        Mat3 m;
        // Mix plain Gaussian draws with low-rank and badly scaled families.
        const int family = trial % 5;
        if (family <= 1) {
            for (auto& e : m.a) e = oracle::nrand(gen);
        } else if (family == 2) {
            Vec3 u, v;
            for (int i = 0; i < 3; ++i) u[i] = oracle::nrand(gen);
            for (int i = 0; i < 3; ++i) v[i] = oracle::nrand(gen);
            m = outer(u, v);
        } else if (family == 3) {
            Vec3 u1, v1, u2, v2;
            for (int i = 0; i < 3; ++i) u1[i] = oracle::nrand(gen);
            for (int i = 0; i < 3; ++i) v1[i] = oracle::nrand(gen);
            for (int i = 0; i < 3; ++i) u2[i] = oracle::nrand(gen);
            for (int i = 0; i < 3; ++i) v2[i] = oracle::nrand(gen);
            m = outer(u1, v1) + outer(u2, v2);
        } else {
            for (auto& e : m.a) e = oracle::nrand(gen);
            const double s = trial % 2 == 0 ? 1e-6 : 1e6;
            m = s * m;
        }

        const auto s = rotmap::linalg::svd3(m);
        CHECK(s.d[0] >= s.d[1]);
        CHECK(s.d[1] >= s.d[2]);
        CHECK(s.d[2] >= 0.0);
        CHECK(ortho_error(s.u) <= 1e-12);
        CHECK(ortho_error(s.v) <= 1e-12);

        Mat3 diag{};
        for (int i = 0; i < 3; ++i) diag(i, i) = s.d[i];
        const Mat3 recon = s.u * diag * transpose(s.v);
        CHECK(frobenius_norm(recon - m) <= 1e-10 * frobenius_norm(m) + 1e-300);
    }
}

TEST_CASE("svd3 singular values match the bisection oracle") {
    std::mt19937_64 gen(106);
    for (int trial = 0; trial < 200; ++trial) {
        Mat3 m;
        for (auto& e : m.a) e = oracle::urand(gen, -2.0, 2.0);
        const auto s = rotmap::linalg::svd3(m);
        const auto want = oracle::singular_values_bisect(to_rows<3>(m));
        for (int i = 0; i < 3; ++i) CHECK_NEAR(s.d[i], want[static_cast<std::size_t>(i)], 1e-8);
    }
}

TEST_CASE("svd3 on diag(3,2,-1) exposes the reflection in det(U)det(V)") {
    Mat3 m{};
    m(0, 0) = 3.0; m(1, 1) = 2.0; m(2, 2) = -1.0;
    const auto s = rotmap::linalg::svd3(m);
    CHECK_NEAR(s.d[0], 3.0, 1e-12);
    CHECK_NEAR(s.d[1], 2.0, 1e-12);
    CHECK_NEAR(s.d[2], 1.0, 1e-12);
    CHECK_NEAR(det3(s.u) * det3(s.v), -1.0, 1e-12);
}

TEST_CASE("svd3 handles rank deficiency and the zero matrix") {
    // Unit u and v make the lone singular value exactly 1.
    Vec3 u{{2.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0}};
    Vec3 v{{0.6, 0.8, 0.0}};
    const Mat3 m = outer(u, v);
    const auto s = rotmap::linalg::svd3(m);
    CHECK_NEAR(s.d[0], 1.0, 1e-12);
    CHECK_NEAR(s.d[1], 0.0, 1e-12);
    CHECK_NEAR(s.d[2], 0.0, 1e-12);
    CHECK(ortho_error(s.u) <= 1e-12);
    CHECK(ortho_error(s.v) <= 1e-12);
    Mat3 diag{};
    for (int i = 0; i < 3; ++i) diag(i, i) = s.d[i];
    CHECK(frobenius_norm(s.u * diag * transpose(s.v) - m) <= 1e-12);

    const auto z = rotmap::linalg::svd3(Mat3{});
    for (int i = 0; i < 3; ++i) CHECK(z.d[i] == 0.0);
    CHECK(ortho_error(z.u) <= 1e-15);
    CHECK(ortho_error(z.v) <= 1e-15);

    Mat3 bad{};
    bad(2, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(rotmap::linalg::svd3(bad), rotmap::NonFinite);
}

TEST_CASE("numeric_rank counts singular values against a relative threshold") {
    // 9×3 block with orthogonal columns of lengths 2, 1, 1e-9: the third
    // column sits far below tol·σ_max and must not count.
    MatX j(9, 3);
    j(0, 0) = 2.0;
    j(1, 1) = 1.0;
    j(2, 2) = 1e-9;
    auto info = rotmap::linalg::numeric_rank(j, 1e-7);
    CHECK(info.rank == 2);
    CHECK_NEAR(info.smallest_retained, 1.0, 1e-12);
    REQUIRE(info.singular_values.size() == 3);
    CHECK_NEAR(info.singular_values[0], 2.0, 1e-12);
    CHECK_NEAR(info.singular_values[2], 1e-9, 1e-15);

    // Duplicated column drops the rank to 2 regardless of magnitude.
    std::mt19937_64 gen(107);
    MatX d(9, 3);
    for (int i = 0; i < 9; ++i) {
        d(i, 0) = oracle::nrand(gen);
        d(i, 1) = oracle::nrand(gen);
        d(i, 2) = d(i, 0);
    }
    CHECK(rotmap::linalg::numeric_rank(d, 1e-7).rank == 2);

    // Full-rank random 9×6 matches the oracle's singular values.
    MatX f(9, 6);
    for (int i = 0; i < 9; ++i)
        for (int k = 0; k < 6; ++k) f(i, k) = oracle::nrand(gen);
    std::vector<std::vector<double>> rows(9, std::vector<double>(6));
    for (int i = 0; i < 9; ++i)
        for (int k = 0; k < 6; ++k) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = f(i, k);
    const auto want = oracle::singular_values_bisect(rows);
    const auto got = rotmap::linalg::numeric_rank(f, 1e-7);
    CHECK(got.rank == 6);
    REQUIRE(got.singular_values.size() == 6);
    for (int i = 0; i < 6; ++i)
        CHECK_NEAR(got.singular_values[static_cast<std::size_t>(i)], want[static_cast<std::size_t>(i)], 1e-8);

    // Wide input works through the transposed Gram path.
    MatX wide(3, 9);
    wide(0, 0) = 1.0;
    wide(1, 4) = 3.0;
    const auto w = rotmap::linalg::numeric_rank(wide, 1e-7);
    CHECK(w.rank == 2);
    CHECK(w.singular_values.size() == 3);

    MatX zero(9, 3);
    const auto zr = rotmap::linalg::numeric_rank(zero, 1e-7);
    CHECK(zr.rank == 0);
    CHECK(zr.smallest_retained == 0.0);

    MatX bad(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(rotmap::linalg::numeric_rank(bad, 1e-7), rotmap::NonFinite);
}

TEST_CASE("fixed-sweep jacobi carries dual derivatives through eigenvalues") {
    // d/dt of an eigenvalue of A + tE at t=0 is vᵀEv; the dual-number path
    // through the fixed-sweep solver must reproduce it.
    std::mt19937_64 gen(108);
    for (int trial = 0; trial < 50; ++trial) {
        Mat4 a0{};
        Mat4 e{};
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) {
                const double v = oracle::urand(gen, -2.0, 2.0);
                a0(i, j) = v;
                a0(j, i) = v;
                const double w = oracle::urand(gen, -1.0, 1.0);
                e(i, j) = w;
                e(j, i) = w;
            }

        rotmap::MatRC<Dual, 4, 4> ad;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) ad(i, j) = Dual{a0(i, j), e(i, j)};
        rotmap::VecN<Dual, 4> evals;
        rotmap::MatRC<Dual, 4, 4> evecs;
        rotmap::linalg::jacobi_sym_eig<Dual, 4>(ad, evals, evecs, 8, false);

        const auto base = rotmap::linalg::sym_eig(a0);
        for (int i = 0; i < 4; ++i) {
            Vec4 v;
            for (int k = 0; k < 4; ++k) v[k] = base.eigenvectors(k, i);
            const double want = dot(v, e * v);
            CHECK_NEAR(evals[i].v, base.eigenvalues[i], 1e-10);
            CHECK_NEAR(evals[i].d, want, 1e-7);
        }
    }
}
