#include "rotmap/mappings.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rotmap/dual.hpp"
#include "rotmap/errors.hpp"
#include "rotmap/linalg.hpp"
#include "rotmap/so3.hpp"
#include "rotmap/tolerances.hpp"

namespace rotmap::map {
namespace {

constexpr double kPi = std::numbers::pi;

// Row-major upper-triangle packing of a symmetric 4×4; the SymMatrix10
// input layout everywhere.
constexpr int kPackRow[10] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 3};
constexpr int kPackCol[10] = {0, 1, 2, 3, 1, 2, 3, 2, 3, 3};

void check_input(const MappingSpec& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.input_dim()) {
        throw ShapeMismatch(std::string(m.name()) + ": expected " +
                            std::to_string(m.input_dim()) + " inputs, got " +
                            std::to_string(x.size()));
    }
    for (double e : x) {
        if (!std::isfinite(e)) throw NonFinite(std::string(m.name()) + ": input not finite");
    }
    if (m.kind == Kind::RotVecRestricted && !(m.max_angle > 0.0 && m.max_angle < kPi)) {
        throw OutOfRange("rotvec-restricted: max angle must lie in (0, pi)");
    }
}

template <int N>
VecN<double, N> to_vec(const std::vector<double>& x) {
    VecN<double, N> v;
    for (int i = 0; i < N; ++i) v[i] = x[static_cast<std::size_t>(i)];
    return v;
}

// g_α(x) = α·tanh(‖x‖)·x/‖x‖ followed by the exponential map, with
// tanh(n)/n evaluated as a series in n² near zero so duals stay finite.
template <typename T>
MatRC<T, 3, 3> restricted_core(const VecN<T, 3>& x, double alpha) {
    using std::sqrt;
    using std::tanh;
    const T n2 = dot(x, x);
    T factor;
    if (value_of(n2) < tol::EXP_TAYLOR_EPS * tol::EXP_TAYLOR_EPS) {
        factor = T(alpha) * (T(1.0) - n2 / T(3.0) + T(2.0 / 15.0) * n2 * n2);
    } else {
        const T n = sqrt(n2);
        factor = T(alpha) * tanh(n) / n;
    }
    return so3::exp_map_t<T>(factor * x);
}

// Gram-Schmidt of the two column-stacked 3-vectors, e₃ = e₁×e₂.
template <typename T>
MatRC<T, 3, 3> sixd_core(const VecN<T, 6>& x) {
    const VecN<T, 3> a{{x[0], x[1], x[2]}};
    const VecN<T, 3> b{{x[3], x[4], x[5]}};
    const VecN<T, 3> e1 = (T(1.0) / norm(a)) * a;
    const VecN<T, 3> u = b - dot(e1, b) * e1;
    const VecN<T, 3> e2 = (T(1.0) / norm(u)) * u;
    const VecN<T, 3> e3 = cross(e1, e2);
    MatRC<T, 3, 3> r;
    for (int i = 0; i < 3; ++i) {
        r(i, 0) = e1[i];
        r(i, 1) = e2[i];
        r(i, 2) = e3[i];
    }
    return r;
}

// Singular values of the 3×2 [a|b] via its 2×2 Gram matrix, for the SixD
// rank guard.
void sixd_singular_values(const std::vector<double>& x, double* s1, double* s2) {
    const Vec3 a{{x[0], x[1], x[2]}};
    const Vec3 b{{x[3], x[4], x[5]}};
    const double g11 = dot(a, a), g22 = dot(b, b), g12 = dot(a, b);
    const double mean = 0.5 * (g11 + g22);
    const double disc = std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + g12 * g12);
    *s1 = std::sqrt(std::max(mean + disc, 0.0));
    *s2 = std::sqrt(std::max(mean - disc, 0.0));
}

Mat4 unpack_sym4(const std::vector<double>& x) {
    Mat4 s;
    for (int p = 0; p < 10; ++p) {
        s(kPackRow[p], kPackCol[p]) = x[static_cast<std::size_t>(p)];
        s(kPackCol[p], kPackRow[p]) = x[static_cast<std::size_t>(p)];
    }
    return s;
}

// det-corrected SVD projection; the degeneracy test mirrors the uniqueness
// condition (unique iff det(M) > 0 or d₂ ≠ d₃).
Mat3 procrustes_core(const Mat3& m) {
    const linalg::Svd3 f = linalg::svd3(m);
    if (det3(m) <= 0.0 && f.d[1] - f.d[2] < tol::PROCRUSTES_GAP_TOL) {
        throw DegenerateInput("procrustes: projection is not unique (det <= 0 and d2 = d3)");
    }
    const double sign = det3(f.u) * det3(f.v) < 0.0 ? -1.0 : 1.0;
    Mat3 sv;  // diag(1,1,sign)·Vᵀ
    for (int j = 0; j < 3; ++j) {
        sv(0, j) = f.v(j, 0);
        sv(1, j) = f.v(j, 1);
        sv(2, j) = sign * f.v(j, 2);
    }
    return f.u * sv;
}

template <int N, typename Core>
MatX dual_jacobian(const std::vector<double>& x, Core&& core) {
    MatX j(9, N);
    for (int c = 0; c < N; ++c) {
        VecN<Dual, N> xd;
        for (int i = 0; i < N; ++i) xd[i] = Dual(x[static_cast<std::size_t>(i)], i == c ? 1.0 : 0.0);
        const MatRC<Dual, 3, 3> r = core(xd);
        for (int k = 0; k < 9; ++k) j(k, c) = r.a[static_cast<std::size_t>(k)].d;
    }
    return j;
}

// Forward mode through the Jacobi eigensolver with a fixed sweep count so
// the dual control flow never depends on the seed column. The enforced
// eigen-gap keeps the smallest eigenvector differentiable.
MatX sym10_jacobian(const std::vector<double>& x) {
    MatX j(9, 10);
    for (int c = 0; c < 10; ++c) {
        MatRC<Dual, 4, 4> s;
        for (int p = 0; p < 10; ++p) {
            const Dual e(x[static_cast<std::size_t>(p)], p == c ? 1.0 : 0.0);
            s(kPackRow[p], kPackCol[p]) = e;
            s(kPackCol[p], kPackRow[p]) = e;
        }
        VecN<Dual, 4> evals;
        MatRC<Dual, 4, 4> evecs;
        linalg::jacobi_sym_eig<Dual, 4>(s, evals, evecs, 8, false);
        const MatRC<Dual, 3, 3> r =
            so3::quat_to_matrix_t<Dual>(evecs(0, 0), evecs(1, 0), evecs(2, 0), evecs(3, 0));
        for (int k = 0; k < 9; ++k) j(k, c) = r.a[static_cast<std::size_t>(k)].d;
    }
    return j;
}

MatX procrustes_jacobian(const Mat3& m) {
    const linalg::Svd3 f = linalg::svd3(m);
    const Vec3& d = f.d;
    const bool neg = det3(f.u) * det3(f.v) < 0.0;
    const double guard = tol::PROCRUSTES_DERIV_GUARD;
    // Every denominator the Ω entries can touch, checked up front. With a
    // flipped determinant the (·,3) and (3,·) pairs divide by d_k − d₃.
    const bool singular = neg ? (d[0] - d[2] <= guard || d[1] - d[2] <= guard ||
                                 d[0] + d[1] <= guard)
                              : (d[1] + d[2] <= guard);
    if (singular) {
        throw NearSingularDerivative(
            "procrustes: derivative denominator below guard, use finite differences");
    }
    MatX j(9, 9);
    for (int i = 0; i < 3; ++i) {
        for (int jj = 0; jj < 3; ++jj) {
            Mat3 omega;
            for (int k = 0; k < 3; ++k) {
                for (int l = 0; l < 3; ++l) {
                    if (k == l) continue;
                    // With a flipped determinant the third axis carries the
                    // sign of S, which turns the antisymmetric combination
                    // into a symmetric one on that row and column (the Ω
                    // block there is symmetric, not skew). Cross-checked
                    // against central differences.
                    double num, denom;
                    if (neg && l == 2) {
                        num = f.u(i, k) * f.v(jj, 2) + f.u(i, 2) * f.v(jj, k);
                        denom = d[k] - d[2];
                    } else if (neg && k == 2) {
                        num = f.u(i, l) * f.v(jj, 2) + f.u(i, 2) * f.v(jj, l);
                        denom = d[l] - d[2];
                    } else {
                        num = f.u(i, k) * f.v(jj, l) - f.u(i, l) * f.v(jj, k);
                        denom = d[k] + d[l];
                    }
                    omega(k, l) = num / denom;
                }
            }
            const Mat3 dr = f.u * omega * transpose(f.v);
            for (int k = 0; k < 9; ++k) j(k, 3 * i + jj) = dr.a[static_cast<std::size_t>(k)];
        }
    }
    return j;
}

std::vector<double> to_std(const VecN<double, 9>& v) {
    return std::vector<double>(v.a.begin(), v.a.end());
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

std::vector<double> pack_sym4(const Mat4& s) {
    std::vector<double> x(10);
    for (int p = 0; p < 10; ++p) x[static_cast<std::size_t>(p)] = s(kPackRow[p], kPackCol[p]);
    return x;
}

}  // namespace

int MappingSpec::input_dim() const {
    switch (kind) {
        case Kind::RotVec:
        case Kind::RotVecRestricted:
        case Kind::EulerXYZ:
            return 3;
        case Kind::Quaternion:
            return 4;
        case Kind::SixD:
            return 6;
        case Kind::Procrustes:
            return 9;
        case Kind::SymMatrix10:
            return 10;
    }
    return 0;
}

const char* MappingSpec::name() const {
    switch (kind) {
        case Kind::RotVec:
            return "rotvec";
        case Kind::RotVecRestricted:
            return "rotvec-restricted";
        case Kind::Quaternion:
            return "quaternion";
        case Kind::EulerXYZ:
            return "euler-xyz";
        case Kind::SixD:
            return "sixd";
        case Kind::Procrustes:
            return "procrustes";
        case Kind::SymMatrix10:
            return "symmatrix10";
    }
    return "unknown";
}

std::optional<MappingSpec> MappingSpec::parse(std::string_view name) {
    for (const MappingSpec& m : all()) {
        if (name == m.name()) return m;
    }
    return std::nullopt;
}

const std::vector<MappingSpec>& MappingSpec::all() {
    static const std::vector<MappingSpec> kAll = {
        MappingSpec::of(Kind::RotVec),      MappingSpec::of(Kind::RotVecRestricted),
        MappingSpec::of(Kind::Quaternion),  MappingSpec::of(Kind::EulerXYZ),
        MappingSpec::of(Kind::SixD),        MappingSpec::of(Kind::Procrustes),
        MappingSpec::of(Kind::SymMatrix10),
    };
    return kAll;
}

Mat3 apply(const MappingSpec& m, const std::vector<double>& x) {
    check_input(m, x);
    switch (m.kind) {
        case Kind::RotVec:
            return so3::exp_map_t<double>(to_vec<3>(x));
        case Kind::RotVecRestricted:
            return restricted_core<double>(to_vec<3>(x), m.max_angle);
        case Kind::Quaternion: {
            const VecN<double, 4> q = to_vec<4>(x);
            if (norm(q) < tol::QUAT_NORM_MIN) {
                throw DegenerateInput("quaternion: input too close to zero to normalize");
            }
            return so3::quat_to_matrix_t<double>(q[0], q[1], q[2], q[3]);
        }
        case Kind::EulerXYZ:
            return so3::euler_xyz_to_matrix_t<double>(x[0], x[1], x[2]);
        case Kind::SixD: {
            double s1 = 0.0, s2 = 0.0;
            sixd_singular_values(x, &s1, &s2);
            if (s2 <= tol::SIXD_RANK_TOL * s1 || s1 == 0.0) {
                throw DegenerateInput("sixd: input columns are rank deficient");
            }
            return sixd_core<double>(to_vec<6>(x));
        }
        case Kind::Procrustes:
            return procrustes_core(unvec9(to_vec<9>(x)));
        case Kind::SymMatrix10: {
            const linalg::SymEig<4> e = linalg::sym_eig(unpack_sym4(x));
            if (e.eigenvalues[1] - e.eigenvalues[0] < tol::SYM10_GAP_TOL) {
                throw DegenerateInput("symmatrix10: smallest eigenvalue is not simple");
            }
            return so3::quat_to_matrix_t<double>(e.eigenvectors(0, 0), e.eigenvectors(1, 0),
                                                 e.eigenvectors(2, 0), e.eigenvectors(3, 0));
        }
    }
    throw UnsupportedMapping("apply: unknown mapping kind");
}

MappingEval jacobian(const MappingSpec& m, const std::vector<double>& x) {
    MappingEval ev;
    ev.value = map::apply(m, x);  // runs every shape, finiteness, and degeneracy guard
    switch (m.kind) {
        case Kind::RotVec:
            ev.jacobian = dual_jacobian<3>(
                x, [](const VecN<Dual, 3>& v) { return so3::exp_map_t<Dual>(v); });
            break;
        case Kind::RotVecRestricted:
            ev.jacobian = dual_jacobian<3>(x, [alpha = m.max_angle](const VecN<Dual, 3>& v) {
                return restricted_core<Dual>(v, alpha);
            });
            break;
        case Kind::Quaternion:
            ev.jacobian = dual_jacobian<4>(x, [](const VecN<Dual, 4>& q) {
                return so3::quat_to_matrix_t<Dual>(q[0], q[1], q[2], q[3]);
            });
            break;
        case Kind::EulerXYZ:
            ev.jacobian = dual_jacobian<3>(x, [](const VecN<Dual, 3>& e) {
                return so3::euler_xyz_to_matrix_t<Dual>(e[0], e[1], e[2]);
            });
            break;
        case Kind::SixD:
            ev.jacobian = dual_jacobian<6>(
                x, [](const VecN<Dual, 6>& v) { return sixd_core<Dual>(v); });
            break;
        case Kind::Procrustes:
            ev.jacobian = procrustes_jacobian(unvec9(to_vec<9>(x)));
            break;
        case Kind::SymMatrix10:
            ev.jacobian = sym10_jacobian(x);
            break;
    }
    return ev;
}

MatX jacobian_fd(const MappingSpec& m, const std::vector<double>& x, double h) {
    check_input(m, x);
    const int n = m.input_dim();
    MatX j(9, n);
    std::vector<double> xp = x;
    for (int c = 0; c < n; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        const double step = h * std::max(1.0, std::abs(x[ci]));
        xp[ci] = x[ci] + step;
        const Mat3 rp = map::apply(m, xp);
        xp[ci] = x[ci] - step;
        const Mat3 rm = map::apply(m, xp);
        xp[ci] = x[ci];
        for (int k = 0; k < 9; ++k) {
            j(k, c) = (rp.a[static_cast<std::size_t>(k)] - rm.a[static_cast<std::size_t>(k)]) /
                      (2.0 * step);
        }
    }
    return j;
}

std::vector<double> canonical_preimage(const MappingSpec& m, const Mat3& r) {
    so3::validate_rotation(r, tol::ROTATION_INPUT_TOL);
    switch (m.kind) {
        case Kind::RotVec: {
            const Vec3 v = so3::log_map(r);
            return {v[0], v[1], v[2]};
        }
        case Kind::RotVecRestricted: {
            if (!(m.max_angle > 0.0 && m.max_angle < kPi)) {
                throw OutOfRange("rotvec-restricted: max angle must lie in (0, pi)");
            }
            const Vec3 v = so3::log_map(r);
            const double a = norm(v);
            if (a >= m.max_angle) {
                throw OutOfRange("rotvec-restricted: rotation angle reaches the cap");
            }
            // x = artanh(a/α)·v/a, with the a → 0 limit expanded in series.
            const double t = a / m.max_angle;
            double factor;
            if (a < 1e-6) {
                factor = (1.0 + t * t / 3.0) / m.max_angle;
            } else {
                factor = std::atanh(t) / a;
            }
            return {factor * v[0], factor * v[1], factor * v[2]};
        }
        case Kind::Quaternion: {
            const so3::UnitQuaternion q = so3::matrix_to_quat(r);
            return {q.x, q.y, q.z, q.w};
        }
        case Kind::EulerXYZ: {
            // R = R_x(α)·R_y(β)·R_z(γ) puts sin β at R(0,2); the remaining
            // angles come from the first row and last column. At gimbal
            // lock only α ± γ is determined, resolved by fixing γ = 0.
            const double sb = std::clamp(r(0, 2), -1.0, 1.0);
            if (std::abs(r(0, 2)) >= 1.0 - 1e-9) {
                const double beta = std::copysign(kPi / 2.0, sb);
                const double alpha = std::atan2(r(0, 2) * r(1, 0), r(1, 1));
                return {alpha, beta, 0.0};
            }
            const double beta = std::asin(sb);
            const double alpha = std::atan2(-r(1, 2), r(2, 2));
            const double gamma = std::atan2(-r(0, 1), r(0, 0));
            return {alpha, beta, gamma};
        }
        case Kind::SixD:
            return {r(0, 0), r(1, 0), r(2, 0), r(0, 1), r(1, 1), r(2, 1)};
        case Kind::Procrustes:
            return to_std(vec9(r));
        case Kind::SymMatrix10: {
            const so3::UnitQuaternion q = so3::matrix_to_quat(r);
            const VecN<double, 4> qv{{q.x, q.y, q.z, q.w}};
            const Mat4 s = Mat4::identity() - outer(qv, qv);
            return pack_sym4(s);
        }
    }
    throw UnsupportedMapping("canonical_preimage: unknown mapping kind");
}

std::vector<PreimagePair> preimage_pairs(const MappingSpec& m, const Mat3& r, Pcg32& rng) {
    so3::validate_rotation(r, tol::ROTATION_INPUT_TOL);
    const double min_gap = 1e-3;
    switch (m.kind) {
        case Kind::RotVec: {
            Vec3 v = so3::log_map(r);
            const double a = norm(v);
            Vec3 v2;
            if (a < 1e-12) {
                // Identity: the second pre-image is a full turn about any axis.
                Vec3 axis{{rng.normal(), rng.normal(), rng.normal()}};
                while (norm(axis) < tol::QUAT_NORM_MIN) {
                    axis = Vec3{{rng.normal(), rng.normal(), rng.normal()}};
                }
                v2 = (2.0 * kPi / norm(axis)) * axis;
            } else {
                v2 = (1.0 + 2.0 * kPi / a) * v;
            }
            return {PreimagePair{{v[0], v[1], v[2]}, {v2[0], v2[1], v2[2]}}};
        }
        case Kind::Quaternion: {
            const so3::UnitQuaternion q = so3::matrix_to_quat(r);
            const std::vector<double> x1 = {q.x, q.y, q.z, q.w};
            double lambda = rng.uniform(0.5, 2.0);
            while (std::abs(1.0 - lambda) < 2e-3) lambda = rng.uniform(0.5, 2.0);
            std::vector<double> scaled(4), negated(4);
            for (int i = 0; i < 4; ++i) {
                scaled[static_cast<std::size_t>(i)] = lambda * x1[static_cast<std::size_t>(i)];
                negated[static_cast<std::size_t>(i)] = -x1[static_cast<std::size_t>(i)];
            }
            return {PreimagePair{x1, scaled}, PreimagePair{x1, negated}};
        }
        case Kind::SixD: {
            // Pre-images of R share the flag of the first column: any
            // (c₁e₁, c₂e₂ + t·e₁) normalizes back to (e₁, e₂).
            const auto draw = [&]() {
                const double c1 = rng.uniform(0.5, 2.0);
                const double c2 = rng.uniform(0.5, 2.0);
                const double t = rng.normal();
                return std::vector<double>{c1 * r(0, 0),
                                           c1 * r(1, 0),
                                           c1 * r(2, 0),
                                           c2 * r(0, 1) + t * r(0, 0),
                                           c2 * r(1, 1) + t * r(1, 0),
                                           c2 * r(2, 1) + t * r(2, 0)};
            };
            const std::vector<double> x1 = draw();
            std::vector<double> x2 = draw();
            while (distance(x1, x2) <= min_gap) x2 = draw();
            return {PreimagePair{x1, x2}};
        }
        case Kind::Procrustes: {
            // R·P for symmetric positive definite P projects back to R.
            const auto draw = [&]() {
                const Mat3 q = so3::random_rotation(rng);
                Mat3 lam;
                for (int i = 0; i < 3; ++i) lam(i, i) = rng.uniform(0.5, 2.0);
                const Mat3 p = q * lam * transpose(q);
                return to_std(vec9(r * p));
            };
            const std::vector<double> x1 = draw();
            std::vector<double> x2 = draw();
            while (distance(x1, x2) <= min_gap) x2 = draw();
            return {PreimagePair{x1, x2}};
        }
        case Kind::SymMatrix10: {
            // b·(I − qqᵀ) + t·I keeps ±q the smallest eigenvector (gap b).
            const so3::UnitQuaternion q = so3::matrix_to_quat(r);
            const VecN<double, 4> qv{{q.x, q.y, q.z, q.w}};
            const Mat4 base = Mat4::identity() - outer(qv, qv);
            const auto draw = [&]() {
                const double b = rng.uniform(0.5, 2.0);
                const double t = rng.uniform(-1.0, 1.0);
                Mat4 s = b * base;
                for (int i = 0; i < 4; ++i) s(i, i) += t;
                return pack_sym4(s);
            };
            const std::vector<double> x1 = draw();
            std::vector<double> x2 = draw();
            while (distance(x1, x2) <= min_gap) x2 = draw();
            return {PreimagePair{x1, x2}};
        }
        case Kind::EulerXYZ:
            throw UnsupportedMapping(
                "euler-xyz: pre-image is a discrete union, no pair generator");
        case Kind::RotVecRestricted:
            throw InjectiveMapping("rotvec-restricted: mapping is injective");
    }
    throw UnsupportedMapping("preimage_pairs: unknown mapping kind");
}

Mat3 weighted_procrustes(const MatX& m, const MatX& lambda) {
    if (m.rows() != 3 || lambda.rows() != 3 || m.cols() != lambda.cols() || m.cols() < 1) {
        throw ShapeMismatch("weighted_procrustes: M and Lambda must both be 3 x k");
    }
    if (!m.finite() || !lambda.finite()) {
        throw NonFinite("weighted_procrustes: input not finite");
    }
    const MatX a = matmul(m, lambda.transposed());
    std::vector<double> x(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) x[static_cast<std::size_t>(3 * i + j)] = a(i, j);
    return map::apply(MappingSpec::of(Kind::Procrustes), x);
}

std::vector<double> softmax_map(const std::vector<double>& x) {
    if (x.empty()) throw ShapeMismatch("softmax_map: empty input");
    for (double e : x) {
        if (!std::isfinite(e)) throw NonFinite("softmax_map: input not finite");
    }
    const double m = *std::max_element(x.begin(), x.end());
    std::vector<double> p(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        p[i] = std::exp(x[i] - m);
        sum += p[i];
    }
    for (double& e : p) e /= sum;
    return p;
}

MatX softmax_jacobian(const std::vector<double>& x) {
    const std::vector<double> p = softmax_map(x);
    const int n = static_cast<int>(p.size());
    MatX j(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double pi = p[static_cast<std::size_t>(i)];
            const double pk = p[static_cast<std::size_t>(k)];
            j(i, k) = pi * ((i == k ? 1.0 : 0.0) - pk);
        }
    }
    return j;
}

std::vector<double> softmax_preimage(const std::vector<double>& p, double c) {
    if (p.empty()) throw ShapeMismatch("softmax_preimage: empty input");
    if (!std::isfinite(c)) throw NonFinite("softmax_preimage: offset not finite");
    std::vector<double> x(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i])) throw NonFinite("softmax_preimage: input not finite");
        if (p[i] <= 0.0) throw DegenerateInput("softmax_preimage: probabilities must be positive");
        x[i] = std::log(p[i]) + c;
    }
    return x;
}

}  // namespace rotmap::map
