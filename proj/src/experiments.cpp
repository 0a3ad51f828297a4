#include "rotmap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "rotmap/errors.hpp"
#include "rotmap/rng.hpp"
#include "rotmap/so3.hpp"

namespace rotmap::expt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegPerRad = 180.0 / kPi;

void check_field(const std::string& s, const char* what) {
    if (s.empty()) throw Error(std::string("report: empty ") + what);
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw Error(std::string("report: ") + what + " may not contain separators");
}

// Nearest-rank percentile of an ascending-sorted sample, p in (0, 100].
double nearest_rank(const std::vector<double>& sorted, double p) {
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

Vec3 random_unit(Pcg32& rng) {
    for (;;) {
        Vec3 v{{rng.normal(), rng.normal(), rng.normal()}};
        const double n = norm(v);
        if (n > 1e-9) return (1.0 / n) * v;
    }
}

Mat3 sample_target(Pcg32& rng, double max_angle, const Mat3& shift) {
    Mat3 r;
    if (max_angle <= 0.0) {
        r = so3::random_rotation(rng);
    } else {
        const Vec3 axis = random_unit(rng);
        r = so3::exp_map(rng.uniform(0.0, max_angle) * axis);
    }
    return shift * r;
}

bool is_degenerate(const Error& e) {
    return dynamic_cast<const DegenerateInput*>(&e) != nullptr ||
           dynamic_cast<const NearSingularDerivative*>(&e) != nullptr;
}

std::vector<double> sixd_input_of_columns(const Mat3& m) {
    return {m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)};
}

}  // namespace

void ExperimentReport::append(ReportRow row) {
    if (!std::isfinite(row.value)) throw NonFinite("report: metric value must be finite");
    check_field(row.experiment, "experiment");
    check_field(row.mapping, "mapping");
    check_field(row.key, "key");
    check_field(row.metric, "metric");
    rows_.push_back(std::move(row));
}

void ExperimentReport::extend(const ExperimentReport& other) {
    rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::optional<double> ExperimentReport::last(std::string_view experiment, std::string_view mapping,
                                             std::string_view metric) const {
    std::optional<double> found;
    for (const ReportRow& r : rows_)
        if (r.experiment == experiment && r.mapping == mapping && r.metric == metric)
            found = r.value;
    return found;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const ExperimentReport& report, std::ostream& os) {
    os << "experiment,mapping,seed,key,metric,value\n";
    for (const ReportRow& r : report.rows())
        os << r.experiment << ',' << r.mapping << ',' << r.seed << ',' << r.key << ',' << r.metric
           << ',' << format_value(r.value) << '\n';
}

ExperimentReport read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "experiment,mapping,seed,key,metric,value")
        throw Error("report: missing or unexpected CSV header");
    ExperimentReport report;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 6) throw Error("report: malformed CSV row: " + line);
        ReportRow row;
        row.experiment = fields[0];
        row.mapping = fields[1];
        try {
            row.seed = std::stoull(fields[2]);
            row.value = std::stod(fields[5]);
        } catch (const std::exception&) {
            throw Error("report: malformed CSV row: " + line);
        }
        row.key = fields[3];
        row.metric = fields[4];
        report.append(std::move(row));
    }
    return report;
}

std::string markdown_summary(const std::vector<ExperimentReport>& reports) {
    // Final value per (experiment, mapping, metric, seed): later rows win.
    std::map<std::tuple<std::string, std::string, std::string, std::uint64_t>, double> finals;
    for (const ExperimentReport& rep : reports)
        for (const ReportRow& r : rep.rows()) finals[{r.experiment, r.mapping, r.metric, r.seed}] = r.value;

    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> grouped;
    for (const auto& [key, value] : finals)
        grouped[{std::get<0>(key), std::get<1>(key), std::get<2>(key)}].push_back(value);

    std::ostringstream os;
    os << "| experiment | mapping | metric | seeds | mean final |\n";
    os << "|---|---|---|---|---|\n";
    for (const auto& [key, values] : grouped) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", mean);
        os << "| " << std::get<0>(key) << " | " << std::get<1>(key) << " | " << std::get<2>(key)
           << " | " << values.size() << " | " << buf << " |\n";
    }
    return os.str();
}

ExperimentReport run_jobs(const std::vector<std::function<ExperimentReport()>>& tasks, int jobs) {
    std::vector<ExperimentReport> results(tasks.size());
    if (jobs <= 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = tasks[i]();
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size());
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    try {
                        results[i] = tasks[i]();
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        for (std::thread& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    ExperimentReport merged;
    for (const ExperimentReport& r : results) merged.extend(r);
    return merged;
}

std::vector<double> logspace(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw OutOfRange("logspace: need 0 < lo < hi, count >= 2");
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] =
            std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return grid;
}

std::vector<double> default_eps_grid() { return logspace(1e-3, 1.0, 7); }

ExperimentReport run_linearity(const LinearityConfig& cfg) {
    if (cfg.samples < 100) throw OutOfRange("linearity: sample count must be at least 100");
    const std::vector<double> eps = cfg.eps.empty() ? default_eps_grid() : cfg.eps;
    for (double e : eps)
        if (!(e > 0.0)) throw OutOfRange("linearity: step sizes must be positive");

    ExperimentReport report;
    for (const map::MappingSpec& mapping : cfg.mappings) {
        // One child stream per mapping so a parallel split over mappings
        // reproduces the sequential byte stream.
        Pcg32 rng(cfg.seed, static_cast<std::uint64_t>(mapping.kind) + 1);
        const int n = mapping.input_dim();
        std::vector<std::vector<double>> devs(eps.size());
        for (auto& d : devs) d.reserve(static_cast<std::size_t>(cfg.samples));
        long long resampled = 0;

        for (int done = 0; done < cfg.samples;) {
            std::vector<double> x(static_cast<std::size_t>(n));
            for (double& v : x) v = rng.normal();
            const Vec3 v1 = random_unit(rng);
            const Vec3 v2 = random_unit(rng);
            try {
                const map::MappingEval ev = map::jacobian(mapping, x);
                const double l0 = dot(v1, ev.value * v2);
                const VecN<double, 9> w9 = vec9(outer(v1, v2));
                const std::vector<double> w(w9.a.begin(), w9.a.end());
                const std::vector<double> g = matvec_transposed(ev.jacobian, w);
                double gnorm2 = 0.0;
                for (double gi : g) gnorm2 += gi * gi;
                std::vector<double> sample_devs(eps.size());
                for (std::size_t k = 0; k < eps.size(); ++k) {
                    std::vector<double> xs = x;
                    for (std::size_t j = 0; j < xs.size(); ++j) xs[j] -= eps[k] * g[j];
                    const Mat3 rs = map::apply(mapping, xs);
                    sample_devs[k] = std::abs(dot(v1, rs * v2) - (l0 - eps[k] * gnorm2));
                }
                for (std::size_t k = 0; k < eps.size(); ++k) devs[k].push_back(sample_devs[k]);
                ++done;
            } catch (const Error& e) {
                if (!is_degenerate(e)) throw;
                ++resampled;
                if (resampled > 1000LL * cfg.samples)
                    throw Error("linearity: mapping rejects almost every draw");
            }
        }

        for (std::size_t k = 0; k < eps.size(); ++k) {
            std::sort(devs[k].begin(), devs[k].end());
            const std::string key = format_value(eps[k]);
            report.append({"linearity", mapping.name(), cfg.seed, key, "p25",
                           nearest_rank(devs[k], 25.0)});
            report.append({"linearity", mapping.name(), cfg.seed, key, "median",
                           nearest_rank(devs[k], 50.0)});
            report.append({"linearity", mapping.name(), cfg.seed, key, "p75",
                           nearest_rank(devs[k], 75.0)});
        }
        report.append({"linearity", mapping.name(), cfg.seed, "all", "resampled",
                       static_cast<double>(resampled)});
    }
    return report;
}

namespace {

struct AlignEval {
    double mean_error_deg = 0.0;     // worst case (180°) charged for failures
    long long degenerate = 0;
};

AlignEval evaluate_alignment(const net::DenseNet& n, const AlignConfig& cfg,
                             const std::vector<double>& base_features,
                             const std::vector<Mat3>& test_targets,
                             const std::string& eval_mapping) {
    AlignEval out;
    double total = 0.0;
    for (const Mat3& target : test_targets) {
        std::vector<double> features = base_features;
        const std::size_t half = features.size() / 2;
        for (std::size_t p = 0; p < half / 3; ++p) {
            const Vec3 q = target * Vec3{{base_features[3 * p], base_features[3 * p + 1],
                                          base_features[3 * p + 2]}};
            features[half + 3 * p] = q[0];
            features[half + 3 * p + 1] = q[1];
            features[half + 3 * p + 2] = q[2];
        }
        const std::vector<double> y = n.forward(features);
        double err = kPi;  // worst case when the output is inadmissible
        try {
            Mat3 r;
            if (eval_mapping == "procrustes-of-matrix") {
                r = map::apply(map::MappingSpec::of(map::Kind::Procrustes), y);
            } else if (eval_mapping == "gs-of-matrix") {
                Mat3 m;
                for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)];
                r = map::apply(map::MappingSpec::of(map::Kind::SixD), sixd_input_of_columns(m));
            } else {
                r = map::apply(cfg.mapping, y);
            }
            err = so3::geodesic_angle(r, target);
        } catch (const Error& e) {
            if (!is_degenerate(e)) throw;
            ++out.degenerate;
        }
        total += err;
    }
    out.mean_error_deg = kDegPerRad * total / static_cast<double>(test_targets.size());
    return out;
}

}  // namespace

ExperimentReport run_alignment(const AlignConfig& cfg) {
    if (cfg.cloud_size <= 0 || cfg.iterations <= 0 || cfg.test_rotations <= 0 ||
        cfg.eval_every <= 0)
        throw OutOfRange("align: sizes and counts must be positive");
    for (int h : cfg.hidden)
        if (h <= 0) throw OutOfRange("align: hidden sizes must be positive");

    Pcg32 rng(cfg.seed);

    // Fixed base cloud; features are (cloud, rotated cloud) flattened.
    const int n_features = 6 * cfg.cloud_size;
    std::vector<double> base_features(static_cast<std::size_t>(n_features), 0.0);
    for (int p = 0; p < 3 * cfg.cloud_size; ++p)
        base_features[static_cast<std::size_t>(p)] = rng.normal();

    std::vector<Mat3> test_targets;
    test_targets.reserve(static_cast<std::size_t>(cfg.test_rotations));
    for (int i = 0; i < cfg.test_rotations; ++i)
        test_targets.push_back(sample_target(rng, cfg.max_target_angle, cfg.target_shift));

    const int out_dim = cfg.matrix_mode ? 9 : cfg.mapping.input_dim();
    std::vector<int> sizes{n_features};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(out_dim);
    net::DenseNet n(sizes, net::Activation::Tanh, net::Activation::Identity);
    n.init_glorot(rng);

    net::OptimConfig ocfg;
    ocfg.lr = cfg.lr;
    net::OptimState optim(n, ocfg);

    const std::string mapping_name = cfg.matrix_mode ? "matrix" : cfg.mapping.name();
    ExperimentReport report;
    const auto eval_to = [&](const std::string& key) {
        if (cfg.matrix_mode) {
            const AlignEval pe = evaluate_alignment(n, cfg, base_features, test_targets,
                                                    "procrustes-of-matrix");
            const AlignEval ge =
                evaluate_alignment(n, cfg, base_features, test_targets, "gs-of-matrix");
            report.append({cfg.experiment_name, mapping_name, cfg.seed, key,
                           "test_error_deg_procrustes", pe.mean_error_deg});
            report.append({cfg.experiment_name, mapping_name, cfg.seed, key, "test_error_deg_gs",
                           ge.mean_error_deg});
            report.append({cfg.experiment_name, mapping_name, cfg.seed, key, "eval_degenerate",
                           static_cast<double>(pe.degenerate + ge.degenerate)});
        } else {
            const AlignEval e = evaluate_alignment(n, cfg, base_features, test_targets, "mapping");
            report.append({cfg.experiment_name, mapping_name, cfg.seed, key, "test_error_deg",
                           e.mean_error_deg});
            report.append({cfg.experiment_name, mapping_name, cfg.seed, key, "eval_degenerate",
                           static_cast<double>(e.degenerate)});
        }
    };

    eval_to("0");

    long long skipped = 0;
    double loss_since_eval = 0.0;
    int steps_since_eval = 0;
    const std::size_t half = base_features.size() / 2;
    try {
        for (int step = 1; step <= cfg.iterations; ++step) {
            const Mat3 target = sample_target(rng, cfg.max_target_angle, cfg.target_shift);
            std::vector<double> features = base_features;
            for (std::size_t p = 0; p < half / 3; ++p) {
                const Vec3 q = target * Vec3{{base_features[3 * p], base_features[3 * p + 1],
                                              base_features[3 * p + 2]}};
                features[half + 3 * p] = q[0];
                features[half + 3 * p + 1] = q[1];
                features[half + 3 * p + 2] = q[2];
            }

            if (cfg.matrix_mode) {
                net::ForwardCache cache;
                const std::vector<double> y = n.forward(features, cache);
                Mat3 m;
                for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)];
                const loss::RotationLoss rl = loss::frobenius_loss(m, target);
                const VecN<double, 9> g9 = vec9(rl.grad);
                net::Gradients grads = n.zero_gradients();
                (void)n.backward(cache, std::vector<double>(g9.a.begin(), g9.a.end()), grads);
                optim.apply(n, grads);
                loss_since_eval += rl.value;
                ++steps_since_eval;
            } else {
                net::TrainBatch batch;
                batch.inputs.push_back(std::move(features));
                batch.targets.push_back(target);
                const net::StepResult r = net::train_step(n, optim, batch, cfg.mapping, cfg.loss);
                skipped += r.skipped;
                if (r.used > 0) {
                    loss_since_eval += r.loss;
                    ++steps_since_eval;
                }
            }

            if (step % cfg.eval_every == 0 || step == cfg.iterations) {
                const std::string key = std::to_string(step);
                if (steps_since_eval > 0)
                    report.append({cfg.experiment_name, mapping_name, cfg.seed, key, "train_loss",
                                   loss_since_eval / steps_since_eval});
                eval_to(key);
                loss_since_eval = 0.0;
                steps_since_eval = 0;
                if (step == cfg.iterations)
                    report.append({cfg.experiment_name, mapping_name, cfg.seed, key, "skipped",
                                   static_cast<double>(skipped)});
            }
        }
    } catch (const NonFiniteParameters&) {
        report.append({cfg.experiment_name, mapping_name, cfg.seed, "aborted", "aborted", 1.0});
    }
    return report;
}

std::vector<double> ik_weights_uniform(int joints) {
    if (joints <= 0) throw OutOfRange("ik: joint count must be positive");
    return std::vector<double>(static_cast<std::size_t>(joints),
                               1.0 / (3.0 * static_cast<double>(joints)));
}

std::vector<double> ik_weights_cmu_hips(int joints) {
    std::vector<double> w = ik_weights_uniform(joints);
    w[0] += 10.0 / 9.0;
    return w;
}

std::vector<Vec3> forward_kinematics(const std::vector<Mat3>& joint_rotations,
                                     const std::vector<Vec3>& bones) {
    if (joint_rotations.size() != bones.size() || bones.empty())
        throw ShapeMismatch("fk: need one bone per joint");
    std::vector<Vec3> positions(bones.size());
    Mat3 cumulative = Mat3::identity();
    Vec3 at;
    for (std::size_t j = 0; j < bones.size(); ++j) {
        cumulative = cumulative * joint_rotations[j];
        at = at + cumulative * bones[j];
        positions[j] = at;
    }
    return positions;
}

namespace {

// A smooth per-joint rotation-vector trajectory w(t) = offset + amp·sin(ωt+φ).
struct JointTrack {
    Vec3 amp;
    double freq = 1.0;
    double phase = 0.0;
    Vec3 offset;
};

using Trajectory = std::vector<JointTrack>;

Trajectory sample_trajectory(Pcg32& rng, int joints) {
    // Amplitudes are chosen so joint angles sweep through and beyond π
    // (while staying safely below 2π): the task must exercise the full
    // rotation range, not just the small-angle regime.
    Trajectory traj(static_cast<std::size_t>(joints));
    for (JointTrack& jt : traj) {
        for (int i = 0; i < 3; ++i) jt.amp[i] = rng.uniform(-2.4, 2.4);
        jt.freq = rng.uniform(0.5, 2.0);
        jt.phase = rng.uniform(0.0, 2.0 * kPi);
        for (int i = 0; i < 3; ++i) jt.offset[i] = rng.uniform(-0.3, 0.3);
    }
    return traj;
}

std::vector<Mat3> pose_of(const Trajectory& traj, double t) {
    std::vector<Mat3> rs;
    rs.reserve(traj.size());
    for (const JointTrack& jt : traj)
        rs.push_back(so3::exp_map(jt.offset + std::sin(jt.freq * t + jt.phase) * jt.amp));
    return rs;
}

std::vector<double> stack_positions(const std::vector<Vec3>& ps) {
    std::vector<double> x;
    x.reserve(3 * ps.size());
    for (const Vec3& p : ps) {
        x.push_back(p[0]);
        x.push_back(p[1]);
        x.push_back(p[2]);
    }
    return x;
}

}  // namespace

// With C_k the cumulative rotation and G_k = Σ_{i≥k} 2αᵢ(xᵢ − x*ᵢ), the
// gradient with respect to R_j is C_{j−1}ᵀ · Σ_{k≥j} G_k (R_{j+1}⋯R_k b_k)ᵀ.
std::vector<Mat3> chain_gradients(const std::vector<Mat3>& rotations,
                                  const std::vector<Vec3>& bones,
                                  const std::vector<Vec3>& positions,
                                  const std::vector<Vec3>& targets,
                                  const std::vector<double>& weights) {
    const std::size_t n = rotations.size();
    if (bones.size() != n || positions.size() != n || targets.size() != n || weights.size() != n ||
        n == 0)
        throw ShapeMismatch("ik: chain gradient inputs must have one entry per joint");
    std::vector<Vec3> suffix(n);
    Vec3 acc;
    for (std::size_t k = n; k-- > 0;) {
        acc = acc + 2.0 * weights[k] * (positions[k] - targets[k]);
        suffix[k] = acc;
    }
    std::vector<Mat3> grads(n);
    Mat3 before = Mat3::identity();  // C_{j-1}
    for (std::size_t j = 0; j < n; ++j) {
        Mat3 m;
        Mat3 s = Mat3::identity();  // R_{j+1}⋯R_k
        for (std::size_t k = j; k < n; ++k) {
            if (k > j) s = s * rotations[k];
            m = m + outer(suffix[k], s * bones[k]);
        }
        grads[j] = transpose(before) * m;
        before = before * rotations[j];
    }
    return grads;
}

ExperimentReport run_ik(const IKConfig& cfg) {
    if (cfg.joints <= 0 || cfg.iterations <= 0 || cfg.test_poses <= 0 || cfg.eval_every <= 0)
        throw OutOfRange("ik: sizes and counts must be positive");
    const std::vector<Vec3> bones = cfg.bones.empty()
                                        ? std::vector<Vec3>(static_cast<std::size_t>(cfg.joints),
                                                            Vec3{{0.0, 1.0, 0.0}})
                                        : cfg.bones;
    if (static_cast<int>(bones.size()) != cfg.joints)
        throw ShapeMismatch("ik: need one bone per joint");
    const std::vector<double> weights =
        cfg.weights.empty() ? ik_weights_uniform(cfg.joints) : cfg.weights;
    if (static_cast<int>(weights.size()) != cfg.joints)
        throw ShapeMismatch("ik: need one weight per joint");
    double weight_sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw OutOfRange("ik: weights must be finite and non-negative");
        weight_sum += w;
    }
    if (!(weight_sum > 0.0)) throw OutOfRange("ik: weights must sum to a positive value");

    double chain_span = 0.0;
    for (const Vec3& b : bones) chain_span += norm(b);

    Pcg32 rng(cfg.seed);
    constexpr int kTrainTrajectories = 8;
    constexpr int kTestTrajectories = 4;
    std::vector<Trajectory> train_trajs, test_trajs;
    for (int i = 0; i < kTrainTrajectories; ++i)
        train_trajs.push_back(sample_trajectory(rng, cfg.joints));
    for (int i = 0; i < kTestTrajectories; ++i)
        test_trajs.push_back(sample_trajectory(rng, cfg.joints));

    struct TestPose {
        std::vector<double> keypoints;
        std::vector<Vec3> targets;
    };
    std::vector<TestPose> test_set;
    test_set.reserve(static_cast<std::size_t>(cfg.test_poses));
    for (int i = 0; i < cfg.test_poses; ++i) {
        const auto which = static_cast<std::size_t>(rng.uniform01() * kTestTrajectories);
        const double t = rng.uniform(0.0, 2.0 * kPi);
        const std::vector<Vec3> pos =
            forward_kinematics(pose_of(test_trajs[std::min<std::size_t>(which, kTestTrajectories - 1)], t), bones);
        test_set.push_back({stack_positions(pos), pos});
    }

    const int m_dim = cfg.mapping.input_dim();
    std::vector<int> sizes{3 * cfg.joints};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(cfg.joints * m_dim);
    net::DenseNet n(sizes, net::Activation::Tanh, net::Activation::Identity);
    n.init_glorot(rng);
    net::OptimConfig ocfg;
    ocfg.lr = cfg.lr;
    net::OptimState optim(n, ocfg);

    ExperimentReport report;
    const std::string mapping_name = cfg.mapping.name();

    // Decode keypoints to joint rotations; inadmissible joints surface as
    // a degenerate-mapping error from the mapping itself.
    const auto decode = [&](const std::vector<double>& out, std::vector<map::MappingEval>& evs) {
        evs.clear();
        for (int j = 0; j < cfg.joints; ++j) {
            const std::vector<double> block(out.begin() + j * m_dim, out.begin() + (j + 1) * m_dim);
            evs.push_back(map::jacobian(cfg.mapping, block));
        }
    };

    const auto eval_to = [&](const std::string& key) {
        std::vector<double> joint_err(static_cast<std::size_t>(cfg.joints), 0.0);
        long long degenerate = 0;
        for (const TestPose& pose : test_set) {
            const std::vector<double> out = n.forward(pose.keypoints);
            bool ok = true;
            std::vector<Mat3> rs;
            try {
                rs.reserve(static_cast<std::size_t>(cfg.joints));
                for (int j = 0; j < cfg.joints; ++j) {
                    const std::vector<double> block(out.begin() + j * m_dim,
                                                    out.begin() + (j + 1) * m_dim);
                    rs.push_back(map::apply(cfg.mapping, block));
                }
            } catch (const Error& e) {
                if (!is_degenerate(e)) throw;
                ok = false;
                ++degenerate;
            }
            if (ok) {
                const std::vector<Vec3> pos = forward_kinematics(rs, bones);
                for (int j = 0; j < cfg.joints; ++j)
                    joint_err[static_cast<std::size_t>(j)] +=
                        norm(pos[static_cast<std::size_t>(j)] - pose.targets[static_cast<std::size_t>(j)]);
            } else {
                // Worst case: a keypoint can be off by at most twice the
                // chain span.
                for (int j = 0; j < cfg.joints; ++j)
                    joint_err[static_cast<std::size_t>(j)] += 2.0 * chain_span;
            }
        }
        double total = 0.0;
        for (int j = 0; j < cfg.joints; ++j) {
            joint_err[static_cast<std::size_t>(j)] /= static_cast<double>(cfg.test_poses);
            total += joint_err[static_cast<std::size_t>(j)];
            report.append({"ik", mapping_name, cfg.seed, key, "joint" + std::to_string(j) + "_err",
                           joint_err[static_cast<std::size_t>(j)]});
        }
        report.append({"ik", mapping_name, cfg.seed, key, "test_error_pos",
                       total / static_cast<double>(cfg.joints)});
        report.append(
            {"ik", mapping_name, cfg.seed, key, "eval_degenerate", static_cast<double>(degenerate)});
    };

    eval_to("0");

    long long skipped = 0;
    double loss_since_eval = 0.0;
    int steps_since_eval = 0;
    try {
        for (int step = 1; step <= cfg.iterations; ++step) {
            const auto which = static_cast<std::size_t>(rng.uniform01() * kTrainTrajectories);
            const double t = rng.uniform(0.0, 2.0 * kPi);
            const std::vector<Vec3> targets = forward_kinematics(
                pose_of(train_trajs[std::min<std::size_t>(which, kTrainTrajectories - 1)], t), bones);
            const std::vector<double> input = stack_positions(targets);

            net::ForwardCache cache;
            const std::vector<double> out = n.forward(input, cache);
            std::vector<map::MappingEval> evs;
            try {
                decode(out, evs);
            } catch (const Error& e) {
                if (!is_degenerate(e)) throw;
                ++skipped;
                continue;
            }
            std::vector<Mat3> rs;
            rs.reserve(evs.size());
            for (const map::MappingEval& ev : evs) rs.push_back(ev.value);
            const std::vector<Vec3> positions = forward_kinematics(rs, bones);

            double loss_value = 0.0;
            for (int j = 0; j < cfg.joints; ++j) {
                const Vec3 d = positions[static_cast<std::size_t>(j)] - targets[static_cast<std::size_t>(j)];
                loss_value += weights[static_cast<std::size_t>(j)] * dot(d, d);
            }
            const std::vector<Mat3> r_grads =
                chain_gradients(rs, bones, positions, targets, weights);
            std::vector<double> dout(out.size(), 0.0);
            for (int j = 0; j < cfg.joints; ++j) {
                const VecN<double, 9> g9 = vec9(r_grads[static_cast<std::size_t>(j)]);
                const std::vector<double> gblock = matvec_transposed(
                    evs[static_cast<std::size_t>(j)].jacobian,
                    std::vector<double>(g9.a.begin(), g9.a.end()));
                for (int i = 0; i < m_dim; ++i)
                    dout[static_cast<std::size_t>(j * m_dim + i)] = gblock[static_cast<std::size_t>(i)];
            }
            net::Gradients grads = n.zero_gradients();
            (void)n.backward(cache, dout, grads);
            optim.apply(n, grads);
            loss_since_eval += loss_value;
            ++steps_since_eval;

            if (step % cfg.eval_every == 0 || step == cfg.iterations) {
                const std::string key = std::to_string(step);
                if (steps_since_eval > 0)
                    report.append({"ik", mapping_name, cfg.seed, key, "train_loss",
                                   loss_since_eval / steps_since_eval});
                eval_to(key);
                loss_since_eval = 0.0;
                steps_since_eval = 0;
                if (step == cfg.iterations)
                    report.append({"ik", mapping_name, cfg.seed, key, "skipped",
                                   static_cast<double>(skipped)});
            }
        }
    } catch (const NonFiniteParameters&) {
        report.append({"ik", mapping_name, cfg.seed, "aborted", "aborted", 1.0});
    }
    return report;
}

ExperimentReport run_restricted_rotvec_probe(double max_angle, const AlignConfig& base) {
    if (!(max_angle > 0.0) || !(max_angle < kPi))
        throw OutOfRange("probe: max angle must lie in (0, pi)");

    AlignConfig restricted = base;
    restricted.experiment_name = "probe-restricted";
    restricted.mapping = map::MappingSpec::restricted(max_angle);
    restricted.max_target_angle = 0.9 * max_angle;
    restricted.target_shift = Mat3::identity();

    AlignConfig procrustes = restricted;
    procrustes.mapping = map::MappingSpec::of(map::Kind::Procrustes);

    AlignConfig rotvec = restricted;
    rotvec.mapping = map::MappingSpec::of(map::Kind::RotVec);

    // The shift probe pairs plain RotVec against itself with the targets
    // composed with a fixed 180-degree rotation about x. Moving the targets
    // away from the identity only hurts when training minimizes the
    // quaternion loss: its branch tie sits exactly at geodesic distance pi,
    // which is where a freshly initialized net starts relative to the
    // shifted targets. Under the Frobenius loss the shifted task trains
    // about as well as the unshifted one, so both runs here use the
    // quaternion loss and the unshifted run serves as the baseline.
    AlignConfig quat_base = rotvec;
    quat_base.experiment_name = "probe-shifted-base";
    quat_base.loss.kind = loss::Kind::QuaternionMinSq;

    AlignConfig shifted = quat_base;
    shifted.experiment_name = "probe-shifted";
    shifted.target_shift = so3::euler_xyz_to_matrix(kPi, 0.0, 0.0);

    ExperimentReport report;
    report.extend(run_alignment(restricted));
    report.extend(run_alignment(procrustes));
    report.extend(run_alignment(rotvec));
    report.extend(run_alignment(quat_base));
    report.extend(run_alignment(shifted));
    return report;
}

}  // namespace rotmap::expt
