#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rotmap/mat.hpp"
#include "rotmap/rng.hpp"

namespace rotmap::map {

// Differentiable parameterizations of SO(3). Each maps a flat input of
// input_dim() values to a rotation matrix, exposes the 9×n ambient
// Jacobian ∂vec(R)/∂x, a canonical right inverse, and (where the
// pre-image has interesting structure) a pre-image pair generator.
enum class Kind {
    RotVec,            // exponential map of R³
    RotVecRestricted,  // exp of α·tanh(‖x‖)·x/‖x‖, range limited to angles < α
    Quaternion,        // x/‖x‖ as a unit quaternion, scalar-last
    EulerXYZ,          // R_x(α)·R_y(β)·R_z(γ)
    SixD,              // Gram-Schmidt of two 3D columns, e₃ = e₁×e₂
    Procrustes,        // nearest rotation to a 3×3 matrix, det-corrected SVD
    SymMatrix10,       // smallest-eigenvalue eigenvector of a symmetric 4×4
};

struct MappingSpec {
    Kind kind = Kind::Procrustes;
    double max_angle = 1.5707963267948966;  // RotVecRestricted only (α, radians)

    int input_dim() const;
    const char* name() const;

    static MappingSpec of(Kind k) { return MappingSpec{k, 1.5707963267948966}; }
    static MappingSpec restricted(double alpha) { return MappingSpec{Kind::RotVecRestricted, alpha}; }
    // Accepts the CLI names: rotvec, rotvec-restricted, quaternion,
    // euler-xyz, sixd, procrustes, symmatrix10.
    static std::optional<MappingSpec> parse(std::string_view name);

    // Every kind, in the fixed order used by reports and suites.
    static const std::vector<MappingSpec>& all();
};

struct MappingEval {
    Mat3 value;
    MatX jacobian;  // 9×n, row r is ∂vec(R)_r, column c is ∂/∂x_c
};

struct PreimagePair {
    std::vector<double> x1;
    std::vector<double> x2;
};

Mat3 apply(const MappingSpec& m, const std::vector<double>& x);
MappingEval jacobian(const MappingSpec& m, const std::vector<double>& x);

// Central-difference fallback (the escape hatch when the Procrustes closed
// form reports NearSingularDerivative).
MatX jacobian_fd(const MappingSpec& m, const std::vector<double>& x, double h = 1e-6);

std::vector<double> canonical_preimage(const MappingSpec& m, const Mat3& r);

// Distinct inputs mapping to the same rotation. Quaternion yields two
// pairs: a positive scaling (same half-line) and the antipodal pair that
// witnesses the disconnection. Throws UnsupportedMapping for EulerXYZ and
// InjectiveMapping for RotVecRestricted.
std::vector<PreimagePair> preimage_pairs(const MappingSpec& m, const Mat3& r, Pcg32& rng);

// argmin over SO(3) of ‖RΛ − M‖_F², i.e. Procrustes of M·Λᵀ. M and Λ are
// 3×k with matching k.
Mat3 weighted_procrustes(const MatX& m, const MatX& lambda);

// The simplex mapping used as the framework's sanity example.
std::vector<double> softmax_map(const std::vector<double>& x);
MatX softmax_jacobian(const std::vector<double>& x);
std::vector<double> softmax_preimage(const std::vector<double>& p, double c);

}  // namespace rotmap::map
