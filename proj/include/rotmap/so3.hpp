#pragma once

#include <cmath>

#include "rotmap/mat.hpp"
#include "rotmap/rng.hpp"
#include "rotmap/tolerances.hpp"

namespace rotmap::so3 {

// A rotation matrix is carried as a plain Mat3; validity (RᵀR = I and
// det = +1 at tolerance) is checked at the public entry points that accept
// one from outside, via validate_rotation below.
using RotationMatrix = Mat3;

// Scalar-last convention throughout: (x, y, z, w), w the real part.
// ±q name the same rotation.
struct UnitQuaternion {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double w = 1.0;
};

// Axis direction, angle in radians as the norm.
using RotationVector = Vec3;

bool is_rotation(const Mat3& r, double tol);
// Throws InvalidRotation (or NonFinite) when r fails the invariants at tol.
void validate_rotation(const Mat3& r, double tol);

Mat3 exp_map(const RotationVector& v);
RotationVector log_map(const Mat3& r);

Mat3 quat_to_matrix(const UnitQuaternion& q);
UnitQuaternion matrix_to_quat(const Mat3& r);

Mat3 euler_xyz_to_matrix(double alpha, double beta, double gamma);

// arccos((trace(R1ᵀR2) − 1)/2) with the argument clamped to [−1, 1].
double geodesic_angle(const Mat3& r1, const Mat3& r2);

// Uniform over SO(3): quat_to_matrix of a normalized 4-vector of i.i.d.
// standard normals.
Mat3 random_rotation(Pcg32& rng);
UnitQuaternion random_quaternion(Pcg32& rng);

// Templated cores so forward-mode dual numbers can flow through the same
// arithmetic the double path uses. Branch predicates compare value parts
// only, keeping primal and derivative control flow aligned.

// Rodrigues: R = I + a·K + b·K² with a = sin‖v‖/‖v‖, b = (1−cos‖v‖)/‖v‖²,
// both switched to their series below the Taylor guard.
template <typename T>
MatRC<T, 3, 3> exp_map_t(const VecN<T, 3>& v) {
    using std::cos;
    using std::sin;
    using std::sqrt;
    const T n2 = dot(v, v);
    T a, b;
    if (value_of(n2) < tol::EXP_TAYLOR_EPS * tol::EXP_TAYLOR_EPS) {
        a = T(1.0) - n2 / T(6.0);
        b = T(0.5) - n2 / T(24.0);
    } else {
        const T n = sqrt(n2);
        a = sin(n) / n;
        b = (T(1.0) - cos(n)) / n2;
    }
    MatRC<T, 3, 3> r;
    // I + a·K + b·(vvᵀ − ‖v‖²I), written out with K the hat of v.
    r(0, 0) = T(1.0) + b * (v[0] * v[0] - n2);
    r(0, 1) = -a * v[2] + b * v[0] * v[1];
    r(0, 2) = a * v[1] + b * v[0] * v[2];
    r(1, 0) = a * v[2] + b * v[1] * v[0];
    r(1, 1) = T(1.0) + b * (v[1] * v[1] - n2);
    r(1, 2) = -a * v[0] + b * v[1] * v[2];
    r(2, 0) = -a * v[1] + b * v[2] * v[0];
    r(2, 1) = a * v[0] + b * v[2] * v[1];
    r(2, 2) = T(1.0) + b * (v[2] * v[2] - n2);
    return r;
}

// Unit-quaternion to rotation matrix; the input is normalized first so the
// formula stays on the manifold for slightly off-unit arguments.
template <typename T>
MatRC<T, 3, 3> quat_to_matrix_t(T x, T y, T z, T w) {
    using std::sqrt;
    const T n = sqrt(x * x + y * y + z * z + w * w);
    x = x / n;
    y = y / n;
    z = z / n;
    w = w / n;
    MatRC<T, 3, 3> r;
    r(0, 0) = T(1.0) - T(2.0) * (y * y + z * z);
    r(0, 1) = T(2.0) * (x * y - z * w);
    r(0, 2) = T(2.0) * (x * z + y * w);
    r(1, 0) = T(2.0) * (x * y + z * w);
    r(1, 1) = T(1.0) - T(2.0) * (x * x + z * z);
    r(1, 2) = T(2.0) * (y * z - x * w);
    r(2, 0) = T(2.0) * (x * z - y * w);
    r(2, 1) = T(2.0) * (y * z + x * w);
    r(2, 2) = T(1.0) - T(2.0) * (x * x + y * y);
    return r;
}

template <typename T>
MatRC<T, 3, 3> euler_xyz_to_matrix_t(T alpha, T beta, T gamma) {
    using std::cos;
    using std::sin;
    const T ca = cos(alpha), sa = sin(alpha);
    const T cb = cos(beta), sb = sin(beta);
    const T cg = cos(gamma), sg = sin(gamma);
    MatRC<T, 3, 3> rx, ry, rz;
    rx(0, 0) = T(1.0);
    rx(1, 1) = ca; rx(1, 2) = -sa;
    rx(2, 1) = sa; rx(2, 2) = ca;
    ry(0, 0) = cb; ry(0, 2) = sb;
    ry(1, 1) = T(1.0);
    ry(2, 0) = -sb; ry(2, 2) = cb;
    rz(0, 0) = cg; rz(0, 1) = -sg;
    rz(1, 0) = sg; rz(1, 1) = cg;
    rz(2, 2) = T(1.0);
    return rx * (ry * rz);
}

// Shepperd's matrix-to-quaternion with the largest-diagonal branch, then
// the canonical sign (w ≥ 0; ties resolved on x, then y, then z). Returns
// (x, y, z, w). Branches are decided on value parts.
template <typename T>
VecN<T, 4> matrix_to_quat_t(const MatRC<T, 3, 3>& r) {
    using std::sqrt;
    const double tr = value_of(r(0, 0)) + value_of(r(1, 1)) + value_of(r(2, 2));
    T x, y, z, w;
    if (tr > value_of(r(0, 0)) && tr > value_of(r(1, 1)) && tr > value_of(r(2, 2))) {
        const T s = sqrt(T(1.0) + r(0, 0) + r(1, 1) + r(2, 2)) * T(2.0);
        w = T(0.25) * s;
        x = (r(2, 1) - r(1, 2)) / s;
        y = (r(0, 2) - r(2, 0)) / s;
        z = (r(1, 0) - r(0, 1)) / s;
    } else if (value_of(r(0, 0)) > value_of(r(1, 1)) && value_of(r(0, 0)) > value_of(r(2, 2))) {
        const T s = sqrt(T(1.0) + r(0, 0) - r(1, 1) - r(2, 2)) * T(2.0);
        x = T(0.25) * s;
        w = (r(2, 1) - r(1, 2)) / s;
        y = (r(0, 1) + r(1, 0)) / s;
        z = (r(0, 2) + r(2, 0)) / s;
    } else if (value_of(r(1, 1)) > value_of(r(2, 2))) {
        const T s = sqrt(T(1.0) + r(1, 1) - r(0, 0) - r(2, 2)) * T(2.0);
        y = T(0.25) * s;
        w = (r(0, 2) - r(2, 0)) / s;
        x = (r(0, 1) + r(1, 0)) / s;
        z = (r(1, 2) + r(2, 1)) / s;
    } else {
        const T s = sqrt(T(1.0) + r(2, 2) - r(0, 0) - r(1, 1)) * T(2.0);
        z = T(0.25) * s;
        w = (r(1, 0) - r(0, 1)) / s;
        x = (r(0, 2) + r(2, 0)) / s;
        y = (r(1, 2) + r(2, 1)) / s;
    }
    const T n = sqrt(x * x + y * y + z * z + w * w);
    x = x / n;
    y = y / n;
    z = z / n;
    w = w / n;
    const double wv = value_of(w), xv = value_of(x), yv = value_of(y), zv = value_of(z);
    const bool flip = wv < 0.0 ||
                      (wv == 0.0 && (xv < 0.0 || (xv == 0.0 && (yv < 0.0 || (yv == 0.0 && zv < 0.0)))));
    if (flip) {
        x = -x;
        y = -y;
        z = -z;
        w = -w;
    }
    return {{x, y, z, w}};
}

}  // namespace rotmap::so3
