#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rotmap/losses.hpp"
#include "rotmap/mappings.hpp"
#include "rotmap/mat.hpp"
#include "rotmap/tinynet.hpp"

// Desk-scale experiments: the linearity-deviation study, a point-cloud
// alignment regression, and a synthetic inverse-kinematics auto-encoder.
// Every run is fully determined by its config (seed included), and reports
// append rows in a fixed order so identical configs produce identical CSVs.

namespace rotmap::expt {

struct ReportRow {
    std::string experiment;
    std::string mapping;
    std::uint64_t seed = 0;
    std::string key;  // optimizer step or ε value, context-dependent
    std::string metric;
    double value = 0.0;
};

class ExperimentReport {
public:
    void append(ReportRow row);  // refuses non-finite metric values
    void extend(const ExperimentReport& other);
    const std::vector<ReportRow>& rows() const { return rows_; }

    // Value of the last appended row matching the filters, if any. Reports
    // append in step order, so this is the final value of a metric.
    std::optional<double> last(std::string_view experiment, std::string_view mapping,
                               std::string_view metric) const;

private:
    std::vector<ReportRow> rows_;
};

// 17 significant digits, enough to round-trip any double exactly.
std::string format_value(double v);

// CSV per the fixed schema: header `experiment,mapping,seed,key,metric,value`,
// LF line endings. read_csv accepts exactly what write_csv emits.
void write_csv(const ExperimentReport& report, std::ostream& os);
ExperimentReport read_csv(std::istream& is);

// Aggregates rows from several reports into a markdown comparison table:
// per (experiment, mapping, metric), the mean over seeds of each seed's
// final value.
std::string markdown_summary(const std::vector<ExperimentReport>& reports);

// Runs independent report-producing tasks, sequentially for jobs <= 1 or on
// a pool of `jobs` threads otherwise, and merges results in declared order.
// Output is byte-identical either way because every task owns its RNG.
ExperimentReport run_jobs(const std::vector<std::function<ExperimentReport()>>& tasks, int jobs);

struct LinearityConfig {
    std::vector<map::MappingSpec> mappings = map::MappingSpec::all();
    int samples = 10000;
    std::vector<double> eps;  // empty means default_eps_grid()
    std::uint64_t seed = 0;
};

std::vector<double> default_eps_grid();                           // logspace 1e-3…1, 7 points
std::vector<double> logspace(double lo, double hi, int count);    // inclusive endpoints

// Deviation from linearity of L(x) = v₁ᵀ R(x) v₂ under a gradient step:
// records |L(x − ε∇L) − (L(x) − ε‖∇L‖²)| per (mapping, ε) as nearest-rank
// median and quartiles over the sample count. Inadmissible draws are
// resampled and counted.
ExperimentReport run_linearity(const LinearityConfig& cfg);

struct AlignConfig {
    std::string experiment_name = "align";
    int cloud_size = 64;
    std::vector<int> hidden = {64, 64};
    map::MappingSpec mapping = map::MappingSpec::of(map::Kind::Procrustes);
    loss::LossSpec loss;
    int iterations = 5000;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    // Train on the raw 9 matrix entries and orthonormalize only at
    // evaluation (reported both via Procrustes and via Gram-Schmidt).
    bool matrix_mode = false;
    int eval_every = 500;
    int test_rotations = 512;
    double max_target_angle = 0.0;  // 0 means unconstrained (uniform targets)
    Mat3 target_shift = Mat3::identity();
};

// Regress the rotation between a fixed base cloud and its rotated copy.
// Reports mean geodesic test error in degrees at step 0, every eval_every
// steps, and at the last step.
ExperimentReport run_alignment(const AlignConfig& cfg);

struct IKConfig {
    int joints = 3;
    std::vector<Vec3> bones;      // empty means unit bones along +y
    std::vector<double> weights;  // empty means uniform 1/(3n)
    std::vector<int> hidden = {64, 64};
    map::MappingSpec mapping = map::MappingSpec::of(map::Kind::Procrustes);
    int iterations = 5000;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    int eval_every = 500;
    int test_poses = 256;
};

std::vector<double> ik_weights_uniform(int joints);
// The hip preset adds 10/9 to the root joint's weight.
std::vector<double> ik_weights_cmu_hips(int joints);

// Keypoint positions of a serial chain: joint rotations compose down the
// chain and each bone hangs off the previous keypoint.
std::vector<Vec3> forward_kinematics(const std::vector<Mat3>& joint_rotations,
                                     const std::vector<Vec3>& bones);

// Ambient-coordinate gradients of Σ αᵢ‖xᵢ − x*ᵢ‖² with respect to each joint
// rotation of the chain, where xᵢ = forward_kinematics(...)[i].
std::vector<Mat3> chain_gradients(const std::vector<Mat3>& joint_rotations,
                                  const std::vector<Vec3>& bones,
                                  const std::vector<Vec3>& positions,
                                  const std::vector<Vec3>& targets,
                                  const std::vector<double>& weights);

// Auto-encode chain keypoints: the net maps keypoints to one mapping input
// per joint, forward kinematics closes the loop, and the weighted keypoint
// residual is minimized. Reports mean per-joint position error.
ExperimentReport run_ik(const IKConfig& cfg);

// The restricted-rotation probe: on targets confined below 0.9·max_angle it
// trains RotVecRestricted(max_angle), Procrustes, and plain RotVec
// ("probe-restricted" rows), then repeats plain RotVec with every target
// composed with a 180° rotation about x ("probe-shifted" rows).
ExperimentReport run_restricted_rotvec_probe(double max_angle, const AlignConfig& base);

}  // namespace rotmap::expt
