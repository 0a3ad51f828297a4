#include "rotmap/so3.hpp"

#include <cmath>

#include "rotmap/errors.hpp"

namespace rotmap::so3 {

bool is_rotation(const Mat3& r, double tol) {
    if (!all_finite(r)) return false;
    const Mat3 g = transpose(r) * r;
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            err = std::max(err, std::abs(g(i, j) - want));
        }
    return err <= tol && std::abs(det3(r) - 1.0) <= tol;
}

void validate_rotation(const Mat3& r, double tol) {
    if (!all_finite(r)) throw NonFinite("rotation matrix has a non-finite entry");
    if (!is_rotation(r, tol)) throw InvalidRotation("matrix is not a rotation at tolerance");
}

Mat3 exp_map(const RotationVector& v) {
    if (!all_finite(v)) throw NonFinite("exp_map: non-finite rotation vector");
    return exp_map_t<double>(v);
}

RotationVector log_map(const Mat3& r) {
    validate_rotation(r, tol::ROTATION_INPUT_TOL);
    const UnitQuaternion q = matrix_to_quat(r);
    const double s = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
    // v = angle · axis with angle = 2·atan2(s, w) ∈ [0, π] since w ≥ 0.
    double factor;
    if (s < 1e-6) {
        // atan2(s, w)/s ≈ (1 − s²/(3w²))/w for small s; w ≈ 1 here.
        factor = 2.0 / q.w * (1.0 - s * s / (3.0 * q.w * q.w));
    } else {
        factor = 2.0 * std::atan2(s, q.w) / s;
    }
    return {{factor * q.x, factor * q.y, factor * q.z}};
}

Mat3 quat_to_matrix(const UnitQuaternion& q) {
    const double n2 = q.x * q.x + q.y * q.y + q.z * q.z + q.w * q.w;
    if (!std::isfinite(n2)) throw NonFinite("quat_to_matrix: non-finite quaternion");
    if (std::abs(n2 - 1.0) > 1e-9) throw InvalidRotation("quat_to_matrix: quaternion is not unit at 1e-9");
    return quat_to_matrix_t<double>(q.x, q.y, q.z, q.w);
}

UnitQuaternion matrix_to_quat(const Mat3& r) {
    validate_rotation(r, tol::ROTATION_INPUT_TOL);
    const VecN<double, 4> q = matrix_to_quat_t<double>(r);
    return {q[0], q[1], q[2], q[3]};
}

Mat3 euler_xyz_to_matrix(double alpha, double beta, double gamma) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma))
        throw NonFinite("euler_xyz_to_matrix: non-finite angle");
    return euler_xyz_to_matrix_t<double>(alpha, beta, gamma);
}

double geodesic_angle(const Mat3& r1, const Mat3& r2) {
    validate_rotation(r1, tol::ROTATION_INPUT_TOL);
    validate_rotation(r2, tol::ROTATION_INPUT_TOL);
    const double c = (trace(transpose(r1) * r2) - 1.0) / 2.0;
    return std::acos(std::min(1.0, std::max(-1.0, c)));
}

UnitQuaternion random_quaternion(Pcg32& rng) {
    while (true) {
        const double x = rng.normal();
        const double y = rng.normal();
        const double z = rng.normal();
        const double w = rng.normal();
        const double n = std::sqrt(x * x + y * y + z * z + w * w);
        if (n < tol::QUAT_NORM_MIN) continue;
        return {x / n, y / n, z / n, w / n};
    }
}

Mat3 random_rotation(Pcg32& rng) {
    const UnitQuaternion q = random_quaternion(rng);
    return quat_to_matrix_t<double>(q.x, q.y, q.z, q.w);
}

}  // namespace rotmap::so3
