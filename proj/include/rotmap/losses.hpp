#pragma once

#include <vector>

#include "rotmap/mat.hpp"

namespace rotmap::loss {

// Rotation losses with gradients in ambient matrix coordinates; callers
// chain grad with a mapping Jacobian (Jᵀ·vec(grad)) to reach the inputs.
enum class Kind { FrobeniusSq, QuaternionMinSq, WeightedPoints };

struct LossSpec {
    Kind kind = Kind::FrobeniusSq;
    Mat3 lambda = Mat3::identity();  // WeightedPoints only, symmetric PSD
    double weight = 1.0;
};

struct RotationLoss {
    double value = 0.0;
    Mat3 grad;  // ∂value/∂R
};

struct QuaternionLoss {
    double value = 0.0;
    Vec4 grad;  // ∂value/∂q, scalar-last layout
};

// Centroid-centered 3D point sample of an object surface. Construction
// recenters the points and records the diameter (max pairwise distance).
class PointSet {
public:
    explicit PointSet(std::vector<Vec3> points);

    const std::vector<Vec3>& points() const { return points_; }
    double diameter() const { return diameter_; }
    // (1/(d²·N))·Σ xxᵀ and its symmetric square root.
    const Mat3& second_moment() const { return second_moment_; }
    const Mat3& lambda() const { return lambda_; }

private:
    std::vector<Vec3> points_;
    double diameter_ = 0.0;
    Mat3 second_moment_;
    Mat3 lambda_;
};

// ‖R − R*‖²_F with gradient 2(R − R*).
RotationLoss frobenius_loss(const Mat3& r, const Mat3& r_star);

// min(‖q − q*‖², ‖q + q*‖²), gradient of the achieved branch; an exact tie
// resolves to the minus branch.
QuaternionLoss quaternion_min_loss(const Vec4& q, const Vec4& q_star);

struct PointsLoss {
    double value = 0.0;         // closed form ‖(R − R*)Λ‖²_F
    double direct_value = 0.0;  // explicit per-point mean, kept for cross-checks
    Mat3 grad;
    Mat3 lambda;
};

PointsLoss weighted_points_loss(const Mat3& r, const Mat3& r_star, const PointSet& ps);

// Uniform evaluator used by the training loops; applies spec.weight. The
// quaternion branch differentiates through the matrix-to-quaternion
// conversion so the gradient stays in matrix coordinates.
RotationLoss rotation_loss(const LossSpec& spec, const Mat3& r, const Mat3& r_star);

// δ/γ: the relative weight that makes the quaternion and Frobenius losses
// agree at small angles (their leading terms are α²/4 and 2α²).
constexpr double loss_weight_ratio() { return 0.125; }

}  // namespace rotmap::loss
