#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotmap/mappings.hpp"

namespace rotmap::checks {

// One pass/fail property check together with the measurement that decided
// it. `name` is the suite/case path the CLI prints, `anchor` the module the
// property belongs to.
struct CheckResult {
    std::string name;
    std::string anchor;
    bool passed = false;
    std::string detail;
};

// Catalog entry for --list-checks.
struct CheckInfo {
    std::string name;
    std::string anchor;
    std::string summary;
};

// Every check the suites below can emit, in emission order.
std::vector<CheckInfo> list_checks();

// Analytic Jacobians and gradients against central finite differences: the
// seven rotation mappings, the softmax sanity mapping, the three losses,
// and the end-to-end chain through a small net. `samples` is the probe
// count per case; the end-to-end case spreads its probes over the mappings.
std::vector<CheckResult> gradcheck(std::uint64_t seed, int samples);

// The same fd comparison for a single mapping's Jacobian only.
std::vector<CheckResult> gradcheck(std::uint64_t seed, int samples, const map::MappingSpec& only);

// Surjectivity round-trips through the canonical pre-images, full-rank
// Jacobians for the five immersive kinds, and the two known rank
// deficiencies (rotation vector at full turns, Euler at gimbal lock).
std::vector<CheckResult> rankcheck(std::uint64_t seed, int samples);

// Pre-image convexity for the convex kinds, the quaternion scaling ray,
// and the quaternion antipodal-midpoint degeneracy.
std::vector<CheckResult> convexity(std::uint64_t seed, int samples);

// Loss identities against the geodesic angle: 8 sin^2(a/2), 4 sin^2(a/4),
// the small-angle ratio band around 8, and the weighted-points closed form
// against the explicit point sum.
std::vector<CheckResult> identities(std::uint64_t seed, int pairs);

// Gram-Schmidt as the vanishing-weight limit of weighted Procrustes:
// monotone error decay over the weight grid and the final gap bound.
std::vector<CheckResult> gs_limit(std::uint64_t seed, int inputs);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace rotmap::checks
