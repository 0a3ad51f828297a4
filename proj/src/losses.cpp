#include "rotmap/losses.hpp"

#include <cmath>

#include "rotmap/dual.hpp"
#include "rotmap/errors.hpp"
#include "rotmap/linalg.hpp"
#include "rotmap/so3.hpp"

namespace rotmap::loss {
namespace {

void check_lambda(const Mat3& lambda) {
    if (!all_finite(lambda)) throw NonFinite("loss: lambda not finite");
    if (max_abs(lambda - transpose(lambda)) > 1e-12) {
        throw ShapeMismatch("loss: lambda must be symmetric");
    }
    const linalg::SymEig<3> e = linalg::sym_eig(lambda);
    if (e.eigenvalues[0] < -1e-12) {
        throw ShapeMismatch("loss: lambda must be positive semidefinite");
    }
}

// ‖(R − R*)Λ‖²_F and 2(R − R*)ΛΛᵀ for a symmetric Λ.
RotationLoss lambda_loss(const Mat3& r, const Mat3& r_star, const Mat3& lambda) {
    const Mat3 diff = r - r_star;
    RotationLoss out;
    out.value = frobenius_norm_sq(diff * lambda);
    out.grad = 2.0 * (diff * (lambda * lambda));
    return out;
}

}  // namespace

PointSet::PointSet(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw EmptyPointSet("point set: no points");
    Vec3 centroid;
    for (const Vec3& p : points_) {
        if (!all_finite(p)) throw NonFinite("point set: point not finite");
        centroid = centroid + p;
    }
    centroid = (1.0 / static_cast<double>(points_.size())) * centroid;
    for (Vec3& p : points_) p = p - centroid;

    for (std::size_t i = 0; i < points_.size(); ++i) {
        for (std::size_t j = i + 1; j < points_.size(); ++j) {
            diameter_ = std::max(diameter_, norm(points_[i] - points_[j]));
        }
    }
    if (diameter_ <= 0.0) throw ZeroDiameter("point set: all points coincide");

    const double scale = 1.0 / (diameter_ * diameter_ * static_cast<double>(points_.size()));
    for (const Vec3& p : points_) second_moment_ = second_moment_ + outer(p, p);
    second_moment_ = scale * second_moment_;

    // Symmetric square root through the eigendecomposition; tiny negative
    // eigenvalues are roundoff from the accumulation and clamp to zero.
    const linalg::SymEig<3> e = linalg::sym_eig(second_moment_);
    Mat3 sq;
    for (int i = 0; i < 3; ++i) sq(i, i) = std::sqrt(std::max(e.eigenvalues[i], 0.0));
    lambda_ = e.eigenvectors * sq * transpose(e.eigenvectors);
}

RotationLoss frobenius_loss(const Mat3& r, const Mat3& r_star) {
    const Mat3 diff = r - r_star;
    return RotationLoss{frobenius_norm_sq(diff), 2.0 * diff};
}

QuaternionLoss quaternion_min_loss(const Vec4& q, const Vec4& q_star) {
    if (!all_finite(q) || !all_finite(q_star)) {
        throw NonFinite("quaternion_min_loss: input not finite");
    }
    const Vec4 minus = q - q_star;
    const Vec4 plus = q + q_star;
    const double vm = dot(minus, minus);
    const double vp = dot(plus, plus);
    if (vm <= vp) return QuaternionLoss{vm, 2.0 * minus};
    return QuaternionLoss{vp, 2.0 * plus};
}

PointsLoss weighted_points_loss(const Mat3& r, const Mat3& r_star, const PointSet& ps) {
    const RotationLoss closed = lambda_loss(r, r_star, ps.lambda());
    PointsLoss out;
    out.value = closed.value;
    out.grad = closed.grad;
    out.lambda = ps.lambda();
    const Mat3 diff = r - r_star;
    double sum = 0.0;
    for (const Vec3& p : ps.points()) {
        const Vec3 e = diff * p;
        sum += dot(e, e);
    }
    out.direct_value =
        sum / (ps.diameter() * ps.diameter() * static_cast<double>(ps.points().size()));
    return out;
}

RotationLoss rotation_loss(const LossSpec& spec, const Mat3& r, const Mat3& r_star) {
    if (!std::isfinite(spec.weight)) throw NonFinite("rotation_loss: weight not finite");
    RotationLoss out;
    switch (spec.kind) {
        case Kind::FrobeniusSq:
            out = frobenius_loss(r, r_star);
            break;
        case Kind::QuaternionMinSq: {
            // Differentiate min‖q(R) ± q*‖² through the conversion with one
            // dual seed per matrix entry; the branch follows primal values.
            const so3::UnitQuaternion qs = so3::matrix_to_quat(r_star);
            const Vec4 q_star{{qs.x, qs.y, qs.z, qs.w}};
            const VecN<double, 4> q0 = so3::matrix_to_quat_t<double>(r);
            out.value = quaternion_min_loss(Vec4{{q0[0], q0[1], q0[2], q0[3]}}, q_star).value;
            for (int k = 0; k < 9; ++k) {
                MatRC<Dual, 3, 3> rd;
                for (int e = 0; e < 9; ++e) {
                    rd.a[static_cast<std::size_t>(e)] =
                        Dual(r.a[static_cast<std::size_t>(e)], e == k ? 1.0 : 0.0);
                }
                const VecN<Dual, 4> qd = so3::matrix_to_quat_t<Dual>(rd);
                Dual vm(0.0), vp(0.0);
                for (int i = 0; i < 4; ++i) {
                    const Dual dm = qd[i] - Dual(q_star[i]);
                    const Dual dp = qd[i] + Dual(q_star[i]);
                    vm += dm * dm;
                    vp += dp * dp;
                }
                out.grad.a[static_cast<std::size_t>(k)] = (vm.v <= vp.v ? vm : vp).d;
            }
            break;
        }
        case Kind::WeightedPoints:
            check_lambda(spec.lambda);
            out = lambda_loss(r, r_star, spec.lambda);
            break;
    }
    out.value *= spec.weight;
    out.grad = spec.weight * out.grad;
    return out;
}

}  // namespace rotmap::loss
