// Command-line front end: the property suites (pass/fail lines, exit 1 on
// any failure) and the experiments (CSV on stdout or --out). Every random
// choice is pinned by --seed; rerunning a command with the same seed gives
// byte-identical output.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rotmap/checks.hpp"
#include "rotmap/errors.hpp"
#include "rotmap/experiments.hpp"
#include "rotmap/so3.hpp"

namespace {

using namespace rotmap;

constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kMappingNames = {
    "rotvec", "rotvec-restricted", "quaternion", "euler-xyz",
    "sixd",   "procrustes",        "symmatrix10"};

std::vector<std::string> with_all(std::vector<std::string> names) {
    names.insert(names.begin(), "all");
    return names;
}

// The training set behind `--mapping all` for align/ik; Euler stays out of
// the experiments and the restricted mapping has its own probe command.
std::vector<map::MappingSpec> training_mappings() {
    return {map::MappingSpec::of(map::Kind::Procrustes), map::MappingSpec::of(map::Kind::SixD),
            map::MappingSpec::of(map::Kind::Quaternion), map::MappingSpec::of(map::Kind::RotVec)};
}

std::vector<map::MappingSpec> resolve_mappings(const std::string& name, bool training_set) {
    if (name == "all") return training_set ? training_mappings() : map::MappingSpec::all();
    return {*map::MappingSpec::parse(name)};
}

// Grid grammar LO:HI:logspaceN, e.g. 1e-3:1:logspace20.
std::optional<std::vector<double>> parse_eps_grid(const std::string& s) {
    const std::size_t p1 = s.find(':');
    const std::size_t p2 = p1 == std::string::npos ? std::string::npos : s.find(':', p1 + 1);
    if (p2 == std::string::npos) return std::nullopt;
    const std::string tail = s.substr(p2 + 1);
    if (tail.rfind("logspace", 0) != 0) return std::nullopt;
    try {
        std::size_t used = 0;
        const double lo = std::stod(s.substr(0, p1), &used);
        if (used != p1) return std::nullopt;
        const std::string mid = s.substr(p1 + 1, p2 - p1 - 1);
        const double hi = std::stod(mid, &used);
        if (used != mid.size()) return std::nullopt;
        const std::string count = tail.substr(8);
        const int n = std::stoi(count, &used);
        if (used != count.size()) return std::nullopt;
        if (!(lo > 0.0) || !(hi > lo) || n < 2) return std::nullopt;
        return expt::logspace(lo, hi, n);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// The flat key=value config file: keys are long flag names without the
// leading dashes, values use the same grammar as the command line. Options
// given on the command line keep precedence; CLI11's own config reader only
// feeds the app that owns it, so the per-subcommand flat format lives here.
void apply_config(CLI::App& sub, const std::string& path) {
    if (path.empty()) return;
    std::ifstream f(path);
    if (!f) throw CLI::FileError::Missing(path);
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        s.erase(0, s.find_first_not_of(ws));
        const std::size_t last = s.find_last_not_of(ws);
        if (last != std::string::npos) s.erase(last + 1);
        return s;
    };
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const std::string at = path + ":" + std::to_string(lineno);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError(at + ": expected key=value, got \"" + line + "\"");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        CLI::Option* op = key == "config" ? nullptr : sub.get_option_no_throw("--" + key);
        if (op == nullptr)
            throw CLI::ValidationError(at + ": no flag --" + key + " on subcommand " +
                                       sub.get_name());
        if (!op->empty()) continue;
        if (op->get_expected_min() == 0)
            op->add_result(op->get_flag_value("--" + key, value));
        else
            op->add_result(value);
        op->run_callback();
    }
}

int emit_check_lines(const std::vector<checks::CheckResult>& results, const std::string& out) {
    std::ostringstream lines;
    for (const checks::CheckResult& r : results)
        lines << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "  " << r.detail << "\n";
    std::fputs(lines.str().c_str(), stdout);
    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw Error("cannot open output file: " + out);
        f << lines.str();
    }
    return checks::all_passed(results) ? 0 : 1;
}

void emit_text(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot open output file: " + out);
    f << text;
}

void emit_csv(const expt::ExperimentReport& report, const std::string& out) {
    std::ostringstream os;
    expt::write_csv(report, os);
    emit_text(os.str(), out);
}

// Shared flags of every suite subcommand.
struct SuiteArgs {
    std::uint64_t seed = 0;
    int samples = 0;
    std::string out;
};

CLI::App* add_suite(CLI::App& app, const char* name, const char* help, SuiteArgs& args,
                    int default_samples, std::string& config_path) {
    CLI::App* sub = app.add_subcommand(name, help);
    args.samples = default_samples;
    sub->add_option("--seed", args.seed, "seed for all randomized probes");
    sub->add_option("--samples", args.samples, "probe count per check")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", args.out, "also write the pass/fail lines to this file");
    sub->add_option("--config", config_path,
                    "flat key=value file; command-line flags take precedence");
    return sub;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Property suites and desk-scale experiments for rotation mappings"};
    app.require_subcommand(0, 1);

    bool list_checks = false;
    app.add_flag("--list-checks", list_checks,
                 "print every property check with its module anchor and exit");

    std::string config_path;
    SuiteArgs grad_args, rank_args, convex_args, ident_args, limit_args;
    std::string grad_mapping = "all";
    CLI::App* grad = add_suite(app, "gradcheck",
                               "analytic Jacobians and gradients vs central differences",
                               grad_args, 500, config_path);
    grad->add_option("--mapping", grad_mapping, "mapping to check, or all")
        ->check(CLI::IsMember(with_all(kMappingNames)));
    CLI::App* rank = add_suite(app, "rankcheck",
                               "surjectivity round-trips, full-rank Jacobians, known deficiencies",
                               rank_args, 1000, config_path);
    CLI::App* convex = add_suite(app, "convexity",
                                 "pre-image convexity and the quaternion antipodal degeneracy",
                                 convex_args, 500, config_path);
    CLI::App* ident = add_suite(app, "identities",
                                "loss identities against the geodesic angle", ident_args, 10000,
                                config_path);
    CLI::App* limit = add_suite(app, "limit-gs",
                                "Gram-Schmidt as the vanishing-weight Procrustes limit",
                                limit_args, 100, config_path);

    // linearity
    std::string lin_mapping = "all";
    std::string lin_eps;
    int lin_samples = 10000;
    std::uint64_t lin_seed = 0;
    int lin_jobs = 1;
    std::string lin_out;
    CLI::App* lin = app.add_subcommand("linearity", "deviation from linearity under a gradient step");
    lin->add_option("--mapping", lin_mapping, "mapping to measure, or all")
        ->check(CLI::IsMember(with_all(kMappingNames)));
    lin->add_option("--samples", lin_samples, "draws per (mapping, eps) cell")
        ->check(CLI::PositiveNumber);
    lin->add_option("--eps", lin_eps, "step grid as LO:HI:logspaceN (default 1e-3:1:logspace7)");
    lin->add_option("--seed", lin_seed, "seed for all randomized draws");
    lin->add_option("--jobs", lin_jobs, "parallel jobs over mappings")->check(CLI::PositiveNumber);
    lin->add_option("--out", lin_out, "CSV output path (default stdout)");
    lin->add_option("--config", config_path,
                    "flat key=value file; command-line flags take precedence");

    // align
    expt::AlignConfig align_base;
    std::string align_mapping = "procrustes";
    std::string align_loss = "frobenius";
    std::vector<double> align_shift;
    int align_jobs = 1;
    std::string align_out;
    CLI::App* align = app.add_subcommand("align", "point-cloud rotation regression");
    align->add_option("--mapping", align_mapping,
                      "mapping to train, or all (= procrustes,sixd,quaternion,rotvec)")
        ->check(CLI::IsMember(with_all(kMappingNames)));
    align->add_option("--loss", align_loss, "training loss")
        ->check(CLI::IsMember({"frobenius", "quaternion", "weighted-points"}));
    align->add_option("--loss-weight", align_base.loss.weight, "scalar loss weight")
        ->check(CLI::PositiveNumber);
    align->add_option("--cloud-size", align_base.cloud_size, "points in the base cloud")
        ->check(CLI::PositiveNumber);
    align->add_option("--hidden", align_base.hidden, "hidden layer sizes")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    align->add_option("--iterations", align_base.iterations, "training steps")
        ->check(CLI::PositiveNumber);
    align->add_option("--lr", align_base.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
    align->add_option("--eval-every", align_base.eval_every, "steps between test evaluations")
        ->check(CLI::PositiveNumber);
    align->add_option("--test-rotations", align_base.test_rotations, "held-out test rotations")
        ->check(CLI::PositiveNumber);
    align->add_option("--max-target-angle", align_base.max_target_angle,
                      "cap on target angles in radians (0 = uniform targets)")
        ->check(CLI::Range(0.0, kPi));
    align->add_option("--shift-euler", align_shift,
                      "compose targets with this fixed XYZ Euler rotation (three angles)")
        ->delimiter(',')
        ->expected(3);
    align->add_flag("--matrix-mode", align_base.matrix_mode,
                    "train raw matrix entries, orthonormalize only at evaluation");
    align->add_option("--seed", align_base.seed, "seed for cloud, targets and weights");
    align->add_option("--jobs", align_jobs, "parallel jobs over mappings")
        ->check(CLI::PositiveNumber);
    align->add_option("--out", align_out, "CSV output path (default stdout)");
    align->add_option("--config", config_path,
                    "flat key=value file; command-line flags take precedence");

    // ik
    expt::IKConfig ik_base;
    std::string ik_mapping = "procrustes";
    std::string ik_weights = "uniform";
    std::vector<double> ik_bones;
    int ik_jobs = 1;
    std::string ik_out;
    CLI::App* ik = app.add_subcommand("ik", "inverse kinematics on a synthetic joint chain");
    ik->add_option("--mapping", ik_mapping,
                   "mapping to train, or all (= procrustes,sixd,quaternion,rotvec)")
        ->check(CLI::IsMember(with_all(kMappingNames)));
    ik->add_option("--joints", ik_base.joints, "chain length")->check(CLI::PositiveNumber);
    ik->add_option("--weights", ik_weights, "per-joint weight preset")
        ->check(CLI::IsMember({"uniform", "cmu-hips"}));
    ik->add_option("--bones", ik_bones, "bone offsets, 3 values per joint")->delimiter(',');
    ik->add_option("--hidden", ik_base.hidden, "hidden layer sizes")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    ik->add_option("--iterations", ik_base.iterations, "training steps")
        ->check(CLI::PositiveNumber);
    ik->add_option("--lr", ik_base.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
    ik->add_option("--eval-every", ik_base.eval_every, "steps between test evaluations")
        ->check(CLI::PositiveNumber);
    ik->add_option("--test-poses", ik_base.test_poses, "held-out test poses")
        ->check(CLI::PositiveNumber);
    ik->add_option("--seed", ik_base.seed, "seed for trajectories and weights");
    ik->add_option("--jobs", ik_jobs, "parallel jobs over mappings")->check(CLI::PositiveNumber);
    ik->add_option("--out", ik_out, "CSV output path (default stdout)");
    ik->add_option("--config", config_path,
                    "flat key=value file; command-line flags take precedence");

    // probe-restricted
    expt::AlignConfig probe_base;
    double probe_alpha = kPi / 2.0;
    std::string probe_out;
    CLI::App* probe = app.add_subcommand(
        "probe-restricted", "restricted rotation-vector mapping vs baselines on capped targets");
    probe->add_option("--alpha", probe_alpha, "angle cap of the restricted mapping, radians")
        ->check(CLI::Range(std::numeric_limits<double>::min(), kPi - 1e-12));
    probe->add_option("--cloud-size", probe_base.cloud_size, "points in the base cloud")
        ->check(CLI::PositiveNumber);
    probe->add_option("--hidden", probe_base.hidden, "hidden layer sizes")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    probe->add_option("--iterations", probe_base.iterations, "training steps")
        ->check(CLI::PositiveNumber);
    probe->add_option("--lr", probe_base.lr, "Adam learning rate")
        ->check(CLI::NonNegativeNumber);
    probe->add_option("--eval-every", probe_base.eval_every, "steps between test evaluations")
        ->check(CLI::PositiveNumber);
    probe->add_option("--test-rotations", probe_base.test_rotations, "held-out test rotations")
        ->check(CLI::PositiveNumber);
    probe->add_option("--seed", probe_base.seed, "seed for cloud, targets and weights");
    probe->add_option("--out", probe_out, "CSV output path (default stdout)");
    probe->add_option("--config", config_path,
                    "flat key=value file; command-line flags take precedence");

    // report
    std::vector<std::string> report_files;
    std::string report_out;
    CLI::App* report = app.add_subcommand("report", "aggregate CSV reports into a markdown table");
    report->add_option("files", report_files, "CSV files produced by the experiment commands")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "markdown output path (default stdout)");

    try {
        app.parse(argc, argv);
        for (CLI::App* sub : app.get_subcommands()) apply_config(*sub, config_path);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list_checks) {
        for (const checks::CheckInfo& info : checks::list_checks())
            std::printf("%-44s [%s] %s\n", info.name.c_str(), info.anchor.c_str(),
                        info.summary.c_str());
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        if (grad->parsed()) {
            const auto results =
                grad_mapping == "all"
                    ? checks::gradcheck(grad_args.seed, grad_args.samples)
                    : checks::gradcheck(grad_args.seed, grad_args.samples,
                                        *map::MappingSpec::parse(grad_mapping));
            return emit_check_lines(results, grad_args.out);
        }
        if (rank->parsed())
            return emit_check_lines(checks::rankcheck(rank_args.seed, rank_args.samples),
                                    rank_args.out);
        if (convex->parsed())
            return emit_check_lines(checks::convexity(convex_args.seed, convex_args.samples),
                                    convex_args.out);
        if (ident->parsed())
            return emit_check_lines(checks::identities(ident_args.seed, ident_args.samples),
                                    ident_args.out);
        if (limit->parsed())
            return emit_check_lines(checks::gs_limit(limit_args.seed, limit_args.samples),
                                    limit_args.out);

        if (lin->parsed()) {
            std::vector<double> eps;
            if (!lin_eps.empty()) {
                const auto grid = parse_eps_grid(lin_eps);
                if (!grid) {
                    std::cerr << "--eps: expected LO:HI:logspaceN with LO > 0, HI > LO, N >= 2 "
                                 "(got \""
                              << lin_eps << "\")\n";
                    return 2;
                }
                eps = *grid;
            }
            std::vector<std::function<expt::ExperimentReport()>> tasks;
            for (const map::MappingSpec& m : resolve_mappings(lin_mapping, false)) {
                expt::LinearityConfig cfg;
                cfg.mappings = {m};
                cfg.samples = lin_samples;
                cfg.eps = eps;
                cfg.seed = lin_seed;
                tasks.push_back([cfg] { return expt::run_linearity(cfg); });
            }
            emit_csv(expt::run_jobs(tasks, lin_jobs), lin_out);
            return 0;
        }

        if (align->parsed()) {
            if (align_loss == "quaternion")
                align_base.loss.kind = loss::Kind::QuaternionMinSq;
            else if (align_loss == "weighted-points")
                align_base.loss.kind = loss::Kind::WeightedPoints;
            if (!align_shift.empty())
                align_base.target_shift =
                    so3::euler_xyz_to_matrix(align_shift[0], align_shift[1], align_shift[2]);
            std::vector<std::function<expt::ExperimentReport()>> tasks;
            for (const map::MappingSpec& m : resolve_mappings(align_mapping, true)) {
                expt::AlignConfig cfg = align_base;
                cfg.mapping = m;
                tasks.push_back([cfg] { return expt::run_alignment(cfg); });
            }
            emit_csv(expt::run_jobs(tasks, align_jobs), align_out);
            return 0;
        }

        if (ik->parsed()) {
            if (!ik_bones.empty()) {
                if (ik_bones.size() != static_cast<std::size_t>(3 * ik_base.joints)) {
                    std::cerr << "--bones: expected " << 3 * ik_base.joints << " values for "
                              << ik_base.joints << " joints, got " << ik_bones.size() << "\n";
                    return 2;
                }
                for (std::size_t j = 0; j + 2 < ik_bones.size(); j += 3)
                    ik_base.bones.push_back(Vec3{{ik_bones[j], ik_bones[j + 1], ik_bones[j + 2]}});
            }
            ik_base.weights = ik_weights == "cmu-hips" ? expt::ik_weights_cmu_hips(ik_base.joints)
                                                       : expt::ik_weights_uniform(ik_base.joints);
            std::vector<std::function<expt::ExperimentReport()>> tasks;
            for (const map::MappingSpec& m : resolve_mappings(ik_mapping, true)) {
                expt::IKConfig cfg = ik_base;
                cfg.mapping = m;
                tasks.push_back([cfg] { return expt::run_ik(cfg); });
            }
            emit_csv(expt::run_jobs(tasks, ik_jobs), ik_out);
            return 0;
        }

        if (probe->parsed()) {
            emit_csv(expt::run_restricted_rotvec_probe(probe_alpha, probe_base), probe_out);
            return 0;
        }

        if (report->parsed()) {
            std::vector<expt::ExperimentReport> reports;
            for (const std::string& path : report_files) {
                std::ifstream f(path, std::ios::binary);
                if (!f) throw Error("cannot open " + path);
                reports.push_back(expt::read_csv(f));
            }
            emit_text(expt::markdown_summary(reports), report_out);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
