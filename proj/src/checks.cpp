#include "rotmap/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <vector>

#include "rotmap/linalg.hpp"
#include "rotmap/losses.hpp"
#include "rotmap/rng.hpp"
#include "rotmap/so3.hpp"
#include "rotmap/tinynet.hpp"

namespace rotmap::checks {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

int stream_of(const map::MappingSpec& m) {
    const auto& all = map::MappingSpec::all();
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].kind == m.kind) return static_cast<int>(i);
    return 0;
}

// Degeneracy margins keeping finite-difference probes away from guard
// boundaries, so the fd step cannot cross into a throwing region.
bool margin_ok(const map::MappingSpec& m, const std::vector<double>& x) {
    switch (m.kind) {
        case map::Kind::Quaternion: {
            double n2 = 0.0;
            for (double v : x) n2 += v * v;
            return n2 > 0.09;
        }
        case map::Kind::SixD: {
            const Vec3 a{{x[0], x[1], x[2]}};
            const Vec3 b{{x[3], x[4], x[5]}};
            const double na = norm(a);
            if (na < 0.3) return false;
            const Vec3 perp = b - (dot(a, b) / (na * na)) * a;
            return norm(perp) > 0.3;
        }
        case map::Kind::Procrustes: {
            Mat3 mm;
            for (int i = 0; i < 9; ++i) mm.a[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
            const linalg::Svd3 f = linalg::svd3(mm);
            if (f.d[1] + f.d[2] < 0.3) return false;
            if (det3(mm) < 0.0 && (f.d[0] - f.d[2] < 0.3 || f.d[1] - f.d[2] < 0.3)) return false;
            return true;
        }
        case map::Kind::SymMatrix10: {
            Mat4 s;
            const int ri[10] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 3};
            const int ci[10] = {0, 1, 2, 3, 1, 2, 3, 2, 3, 3};
            for (int k = 0; k < 10; ++k) {
                s(ri[k], ci[k]) = x[static_cast<std::size_t>(k)];
                s(ci[k], ri[k]) = x[static_cast<std::size_t>(k)];
            }
            const linalg::SymEig<4> e = linalg::sym_eig(s);
            return e.eigenvalues[1] - e.eigenvalues[0] > 0.1;
        }
        default:
            return true;
    }
}

std::vector<double> sample_admissible(const map::MappingSpec& m, Pcg32& rng) {
    const int n = m.input_dim();
    while (true) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (double& e : x) e = rng.normal();
        if (!margin_ok(m, x)) continue;
        try {
            (void)map::jacobian(m, x);
        } catch (const Error&) {
            continue;
        }
        return x;
    }
}

CheckResult mapping_gradcheck(const map::MappingSpec& m, std::uint64_t seed, int samples) {
    Pcg32 rng(seed, static_cast<std::uint64_t>(10 + stream_of(m)));
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
        const std::vector<double> x = sample_admissible(m, rng);
        const map::MappingEval ev = map::jacobian(m, x);
        const MatX fd = map::jacobian_fd(m, x, 1e-5);
        double err = 0.0;
        for (int r = 0; r < 9; ++r)
            for (int c = 0; c < m.input_dim(); ++c)
                err = std::max(err, std::abs(ev.jacobian(r, c) - fd(r, c)));
        worst = std::max(worst, err / (1.0 + ev.jacobian.max_abs()));
    }
    return {std::string("gradcheck/") + m.name(), "mappings", worst <= 1e-5,
            fmt("max rel err %.2e over %d probes (bound 1.0e-05)", worst, samples)};
}

CheckResult softmax_gradcheck(std::uint64_t seed, int samples) {
    Pcg32 rng(seed, 20);
    double worst = 0.0;
    const double h = 1e-5;
    for (int t = 0; t < samples; ++t) {
        const int n = 2 + static_cast<int>(rng.next_u32() % 7);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (double& e : x) e = rng.normal();
        const MatX j = map::softmax_jacobian(x);
        double err = 0.0;
        for (int c = 0; c < n; ++c) {
            std::vector<double> up = x, dn = x;
            up[static_cast<std::size_t>(c)] += h;
            dn[static_cast<std::size_t>(c)] -= h;
            const std::vector<double> pu = map::softmax_map(up);
            const std::vector<double> pd = map::softmax_map(dn);
            for (int r = 0; r < n; ++r)
                err = std::max(err, std::abs(j(r, c) - (pu[static_cast<std::size_t>(r)] -
                                                        pd[static_cast<std::size_t>(r)]) /
                                                           (2.0 * h)));
        }
        worst = std::max(worst, err / (1.0 + j.max_abs()));
    }
    return {"gradcheck/softmax", "mappings", worst <= 1e-5,
            fmt("max rel err %.2e over %d probes (bound 1.0e-05)", worst, samples)};
}

// Central difference of a scalar function of one matrix entry.
template <typename F>
double fd_entry(Mat3 m, int idx, const F& value_of_matrix, double h) {
    m.a[static_cast<std::size_t>(idx)] += h;
    const double up = value_of_matrix(m);
    m.a[static_cast<std::size_t>(idx)] -= 2.0 * h;
    const double dn = value_of_matrix(m);
    return (up - dn) / (2.0 * h);
}

CheckResult frobenius_gradcheck(std::uint64_t seed, int samples) {
    Pcg32 rng(seed, 21);
    const double h = 1e-6;
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
        const Mat3 r = so3::random_rotation(rng);
        const Mat3 r_star = so3::random_rotation(rng);
        const loss::RotationLoss l = loss::frobenius_loss(r, r_star);
        double gmax = 0.0, err = 0.0;
        for (int i = 0; i < 9; ++i) {
            const double fd = fd_entry(
                r, i, [&](const Mat3& m) { return loss::frobenius_loss(m, r_star).value; }, h);
            err = std::max(err, std::abs(l.grad.a[static_cast<std::size_t>(i)] - fd));
            gmax = std::max(gmax, std::abs(l.grad.a[static_cast<std::size_t>(i)]));
        }
        worst = std::max(worst, err / (1.0 + gmax));
    }
    return {"gradcheck/loss-frobenius", "losses", worst <= 1e-5,
            fmt("max rel err %.2e over %d probes (bound 1.0e-05)", worst, samples)};
}

CheckResult quaternion_gradcheck(std::uint64_t seed, int samples) {
    Pcg32 rng(seed, 22);
    const double h = 1e-6;
    double worst = 0.0;
    int done = 0;
    while (done < samples) {
        const so3::UnitQuaternion a = so3::random_quaternion(rng);
        const so3::UnitQuaternion b = so3::random_quaternion(rng);
        Vec4 q{{a.x, a.y, a.z, a.w}};
        const Vec4 qs{{b.x, b.y, b.z, b.w}};
        // Stay away from the branch tie so the fd probe cannot switch sides.
        if (std::abs(dot(q, qs)) < 1e-3) continue;
        ++done;
        const loss::QuaternionLoss l = loss::quaternion_min_loss(q, qs);
        double gmax = 0.0, err = 0.0;
        for (int i = 0; i < 4; ++i) {
            Vec4 up = q, dn = q;
            up[i] += h;
            dn[i] -= h;
            const double fd = (loss::quaternion_min_loss(up, qs).value -
                               loss::quaternion_min_loss(dn, qs).value) /
                              (2.0 * h);
            err = std::max(err, std::abs(l.grad[i] - fd));
            gmax = std::max(gmax, std::abs(l.grad[i]));
        }
        worst = std::max(worst, err / (1.0 + gmax));
    }
    return {"gradcheck/loss-quaternion", "losses", worst <= 1e-5,
            fmt("max rel err %.2e over %d probes (bound 1.0e-05)", worst, samples)};
}

CheckResult weighted_points_gradcheck(std::uint64_t seed, int samples) {
    Pcg32 rng(seed, 23);
    const double h = 1e-6;
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
        std::vector<Vec3> pts(static_cast<std::size_t>(4 + rng.next_u32() % 29));
        for (Vec3& p : pts) p = Vec3{{rng.normal(), rng.normal(), rng.normal()}};
        const loss::PointSet ps(pts);
        const Mat3 r = so3::random_rotation(rng);
        const Mat3 r_star = so3::random_rotation(rng);
        const loss::PointsLoss l = loss::weighted_points_loss(r, r_star, ps);
        double gmax = 0.0, err = 0.0;
        for (int i = 0; i < 9; ++i) {
            const double fd = fd_entry(
                r, i,
                [&](const Mat3& m) { return loss::weighted_points_loss(m, r_star, ps).value; }, h);
            err = std::max(err, std::abs(l.grad.a[static_cast<std::size_t>(i)] - fd));
            gmax = std::max(gmax, std::abs(l.grad.a[static_cast<std::size_t>(i)]));
        }
        worst = std::max(worst, err / (1.0 + gmax));
    }
    return {"gradcheck/loss-weighted-points", "losses", worst <= 1e-5,
            fmt("max rel err %.2e over %d probes (bound 1.0e-05)", worst, samples)};
}

CheckResult end_to_end_gradcheck(std::uint64_t seed, int samples) {
    Pcg32 rng(seed, 24);
    const double h = 1e-5;
    const int per_mapping = std::max(29, (samples + 6) / 7);
    double worst = 0.0;
    int probes = 0;
    for (const map::MappingSpec& mapping : map::MappingSpec::all()) {
        const int n_out = mapping.input_dim();
        int done = 0;
        while (done < per_mapping) {
            net::DenseNet n({9, 16, n_out}, net::Activation::Tanh, net::Activation::Identity);
            n.init_glorot(rng);
            std::vector<double> input(9);
            for (double& e : input) e = rng.normal();
            const std::vector<double> out = n.forward(input);
            if (!margin_ok(mapping, out)) continue;
            try {
                (void)map::jacobian(mapping, out);
            } catch (const Error&) {
                continue;
            }
            ++done;
            ++probes;
            const Mat3 r_star = so3::random_rotation(rng);

            net::ForwardCache cache;
            (void)n.forward(input, cache);
            const map::MappingEval ev = map::jacobian(mapping, out);
            const loss::RotationLoss rl = loss::frobenius_loss(ev.value, r_star);
            const VecN<double, 9> g9 = vec9(rl.grad);
            const std::vector<double> gvec(g9.a.begin(), g9.a.end());
            net::Gradients grads = n.zero_gradients();
            (void)n.backward(cache, matvec_transposed(ev.jacobian, gvec), grads);

            const auto loss_at = [&]() {
                return loss::frobenius_loss(map::apply(mapping, n.forward(input)), r_star).value;
            };
            double gmax = 0.0, err = 0.0;
            for (std::size_t l = 0; l < n.layers().size(); ++l) {
                net::Layer& layer = n.layer(l);
                for (std::size_t k = 0; k < layer.w.size(); ++k) {
                    const double keep = layer.w[k];
                    layer.w[k] = keep + h;
                    const double up = loss_at();
                    layer.w[k] = keep - h;
                    const double dn = loss_at();
                    layer.w[k] = keep;
                    const double fd = (up - dn) / (2.0 * h);
                    err = std::max(err, std::abs(grads.dw[l][k] - fd));
                    gmax = std::max(gmax, std::abs(grads.dw[l][k]));
                }
                for (std::size_t k = 0; k < layer.b.size(); ++k) {
                    const double keep = layer.b[k];
                    layer.b[k] = keep + h;
                    const double up = loss_at();
                    layer.b[k] = keep - h;
                    const double dn = loss_at();
                    layer.b[k] = keep;
                    const double fd = (up - dn) / (2.0 * h);
                    err = std::max(err, std::abs(grads.db[l][k] - fd));
                    gmax = std::max(gmax, std::abs(grads.db[l][k]));
                }
            }
            worst = std::max(worst, err / (1.0 + gmax));
        }
    }
    return {"gradcheck/end-to-end", "tinynet", worst <= 1e-4,
            fmt("max rel err %.2e over %d probes (bound 1.0e-04)", worst, probes)};
}

CheckResult surjectivity_check(const map::MappingSpec& m, std::uint64_t seed, int samples) {
    Pcg32 rng(seed, static_cast<std::uint64_t>(30 + stream_of(m)));
    double worst = 0.0;
    int covered = 0, refused = 0;
    bool refusals_ok = true;
    for (int t = 0; t < samples; ++t) {
        const Mat3 r = so3::random_rotation(rng);
        if (m.kind == map::Kind::RotVecRestricted &&
            so3::geodesic_angle(r, Mat3::identity()) >= m.max_angle) {
            // Outside the covered ball the canonical pre-image must refuse.
            try {
                (void)map::canonical_preimage(m, r);
                refusals_ok = false;
            } catch (const OutOfRange&) {
                ++refused;
            }
            continue;
        }
        ++covered;
        const std::vector<double> x = map::canonical_preimage(m, r);
        worst = std::max(worst, max_abs(map::apply(m, x) - r));
    }
    const bool passed = worst <= 1e-8 && refusals_ok && covered > 0;
    std::string detail = fmt("max round-trip err %.2e over %d rotations (bound 1.0e-08)",
                             worst, covered);
    if (m.kind == map::Kind::RotVecRestricted)
        detail += fmt(", %d out-of-ball targets refused", refused);
    return {std::string("rankcheck/surjectivity/") + m.name(), "mappings", passed, detail};
}

CheckResult full_rank_check(const map::MappingSpec& m, std::uint64_t seed, int samples) {
    Pcg32 rng(seed, static_cast<std::uint64_t>(40 + stream_of(m)));
    double min_sigma3 = std::numeric_limits<double>::infinity();
    int deficient = 0;
    for (int t = 0; t < samples; ++t) {
        const std::vector<double> x = sample_admissible(m, rng);
        const map::MappingEval ev = map::jacobian(m, x);
        const linalg::RankInfo info = linalg::numeric_rank(ev.jacobian, 1e-6);
        if (info.rank != 3) ++deficient;
        min_sigma3 = std::min(min_sigma3, info.singular_values[2]);
    }
    return {std::string("rankcheck/full-rank/") + m.name(), "mappings",
            deficient == 0 && min_sigma3 > 1e-6,
            fmt("min sigma3 %.2e over %d inputs (bound 1.0e-06), %d rank-deficient", min_sigma3,
                samples, deficient)};
}

CheckResult rotvec_deficiency_check(std::uint64_t seed, int samples) {
    Pcg32 rng(seed, 50);
    const map::MappingSpec m = map::MappingSpec::of(map::Kind::RotVec);
    int deficient = 0, total = 0;
    double max_sigma3 = 0.0;
    for (int k = 1; k <= 2; ++k) {
        for (int t = 0; t < samples / 2; ++t) {
            Vec3 v{{rng.normal(), rng.normal(), rng.normal()}};
            v = (2.0 * kPi * k / norm(v)) * v;
            const map::MappingEval ev = map::jacobian(m, {v[0], v[1], v[2]});
            const linalg::RankInfo info = linalg::numeric_rank(ev.jacobian, 1e-6);
            ++total;
            if (info.rank < 3) ++deficient;
            max_sigma3 = std::max(max_sigma3, info.singular_values[2]);
        }
    }
    return {"rankcheck/deficiency/rotvec-full-turn", "mappings", deficient == total,
            fmt("%d/%d full-turn inputs rank-deficient, max sigma3 %.2e", deficient, total,
                max_sigma3)};
}

CheckResult euler_deficiency_check(std::uint64_t seed, int samples) {
    Pcg32 rng(seed, 51);
    const map::MappingSpec m = map::MappingSpec::of(map::Kind::EulerXYZ);
    int deficient = 0, total = 0;
    double max_sigma3 = 0.0;
    for (double sign : {1.0, -1.0}) {
        for (int t = 0; t < samples / 2; ++t) {
            const std::vector<double> x = {rng.normal(), sign * kPi / 2.0, rng.normal()};
            const map::MappingEval ev = map::jacobian(m, x);
            const linalg::RankInfo info = linalg::numeric_rank(ev.jacobian, 1e-6);
            ++total;
            if (info.rank < 3) ++deficient;
            max_sigma3 = std::max(max_sigma3, info.singular_values[2]);
        }
    }
    return {"rankcheck/deficiency/euler-gimbal", "mappings", deficient == total,
            fmt("%d/%d gimbal inputs rank-deficient, max sigma3 %.2e", deficient, total,
                max_sigma3)};
}

CheckResult convexity_check(const map::MappingSpec& m, std::uint64_t seed, int samples) {
    Pcg32 rot_rng(seed, static_cast<std::uint64_t>(60 + stream_of(m)));
    Pcg32 pair_rng(seed, static_cast<std::uint64_t>(70 + stream_of(m)));
    double worst = 0.0;
    int segments = 0;
    for (int t = 0; t < samples; ++t) {
        const Mat3 r = so3::random_rotation(rot_rng);
        for (const map::PreimagePair& pair : map::preimage_pairs(m, r, pair_rng)) {
            ++segments;
            for (int step = 1; step <= 9; ++step) {
                const double w = 0.1 * step;
                std::vector<double> mix(pair.x1.size());
                for (std::size_t i = 0; i < mix.size(); ++i)
                    mix[i] = w * pair.x1[i] + (1.0 - w) * pair.x2[i];
                worst = std::max(worst, max_abs(map::apply(m, mix) - r));
            }
        }
    }
    return {std::string("convexity/") + m.name(), "mappings", worst <= 1e-8,
            fmt("max pre-image drift %.2e over %d segments (bound 1.0e-08)", worst, segments)};
}

CheckResult quaternion_scaling_check(std::uint64_t seed, int samples) {
    Pcg32 rot_rng(seed, 64);
    Pcg32 pair_rng(seed, 74);
    const map::MappingSpec m = map::MappingSpec::of(map::Kind::Quaternion);
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
        const Mat3 r = so3::random_rotation(rot_rng);
        const auto pairs = map::preimage_pairs(m, r, pair_rng);
        const map::PreimagePair& scaled = pairs[0];
        for (int step = 1; step <= 9; ++step) {
            const double w = 0.1 * step;
            std::vector<double> mix(scaled.x1.size());
            for (std::size_t i = 0; i < mix.size(); ++i)
                mix[i] = w * scaled.x1[i] + (1.0 - w) * scaled.x2[i];
            worst = std::max(worst, max_abs(map::apply(m, mix) - r));
        }
    }
    return {"convexity/quaternion-scaling-ray", "mappings", worst <= 1e-8,
            fmt("max drift along the scaling ray %.2e over %d rotations (bound 1.0e-08)", worst,
                samples)};
}

CheckResult quaternion_antipodal_check(std::uint64_t seed, int samples) {
    Pcg32 rot_rng(seed, 65);
    Pcg32 pair_rng(seed, 75);
    const map::MappingSpec m = map::MappingSpec::of(map::Kind::Quaternion);
    int raised = 0;
    for (int t = 0; t < samples; ++t) {
        const Mat3 r = so3::random_rotation(rot_rng);
        const auto pairs = map::preimage_pairs(m, r, pair_rng);
        const map::PreimagePair& antipodal = pairs[1];
        std::vector<double> mid(antipodal.x1.size());
        for (std::size_t i = 0; i < mid.size(); ++i)
            mid[i] = 0.5 * (antipodal.x1[i] + antipodal.x2[i]);
        try {
            (void)map::apply(m, mid);
        } catch (const DegenerateInput&) {
            ++raised;
        }
    }
    return {"convexity/quaternion-antipodal-midpoint", "mappings", raised == samples,
            fmt("%d/%d antipodal midpoints raised the degeneracy", raised, samples)};
}

CheckResult frobenius_identity_check(std::uint64_t seed, int pairs) {
    Pcg32 rng(seed, 80);
    double worst = 0.0;
    for (int t = 0; t < pairs; ++t) {
        const Mat3 r1 = so3::random_rotation(rng);
        const Mat3 r2 = so3::random_rotation(rng);
        const double alpha = so3::geodesic_angle(r1, r2);
        const double s = std::sin(alpha / 2.0);
        worst = std::max(worst,
                         std::abs(loss::frobenius_loss(r1, r2).value - 8.0 * s * s));
    }
    return {"identities/frobenius-geodesic", "losses", worst <= 1e-9,
            fmt("max |loss - 8 sin^2(a/2)| = %.2e over %d pairs (bound 1.0e-09)", worst, pairs)};
}

CheckResult quaternion_identity_check(std::uint64_t seed, int pairs) {
    Pcg32 rng(seed, 81);
    double worst = 0.0;
    for (int t = 0; t < pairs; ++t) {
        const Mat3 r1 = so3::random_rotation(rng);
        const Mat3 r2 = so3::random_rotation(rng);
        const so3::UnitQuaternion a = so3::matrix_to_quat(r1);
        const so3::UnitQuaternion b = so3::matrix_to_quat(r2);
        // Random sign flips exercise both branches of the min.
        const double sa = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        const double sb = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        const Vec4 q{{sa * a.x, sa * a.y, sa * a.z, sa * a.w}};
        const Vec4 qs{{sb * b.x, sb * b.y, sb * b.z, sb * b.w}};
        const double alpha = so3::geodesic_angle(r1, r2);
        const double s = std::sin(alpha / 4.0);
        worst = std::max(worst,
                         std::abs(loss::quaternion_min_loss(q, qs).value - 4.0 * s * s));
    }
    return {"identities/quaternion-geodesic", "losses", worst <= 1e-9,
            fmt("max |loss - 4 sin^2(a/4)| = %.2e over %d pairs (bound 1.0e-09)", worst, pairs)};
}

CheckResult ratio_identity_check(std::uint64_t seed, int pairs) {
    Pcg32 rng(seed, 82);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int t = 0; t < pairs; ++t) {
        const Mat3 r1 = so3::random_rotation(rng);
        Vec3 axis{{rng.normal(), rng.normal(), rng.normal()}};
        axis = (1.0 / norm(axis)) * axis;
        const double alpha = rng.uniform(1e-3, 0.1);
        const Mat3 r2 = r1 * so3::exp_map(alpha * axis);
        const so3::UnitQuaternion a = so3::matrix_to_quat(r1);
        const so3::UnitQuaternion b = so3::matrix_to_quat(r2);
        const Vec4 q{{a.x, a.y, a.z, a.w}};
        const Vec4 qs{{b.x, b.y, b.z, b.w}};
        const double ratio =
            loss::frobenius_loss(r1, r2).value / loss::quaternion_min_loss(q, qs).value;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    const bool passed = lo >= 8.0 * 0.98 && hi <= 8.0 * 1.02;
    return {"identities/small-angle-ratio", "losses", passed,
            fmt("ratio in [%.4f, %.4f] over %d small-angle pairs (band 8 +- 2%%)", lo, hi, pairs)};
}

CheckResult weighted_points_identity_check(std::uint64_t seed, int pairs) {
    Pcg32 rng(seed, 83);
    double worst = 0.0;
    for (int t = 0; t < pairs; ++t) {
        std::vector<Vec3> pts(static_cast<std::size_t>(4 + rng.next_u32() % 61));
        for (Vec3& p : pts) p = Vec3{{rng.normal(), rng.normal(), rng.normal()}};
        const loss::PointSet ps(pts);
        const loss::PointsLoss l =
            loss::weighted_points_loss(so3::random_rotation(rng), so3::random_rotation(rng), ps);
        worst = std::max(worst, std::abs(l.value - l.direct_value));
    }
    return {"identities/weighted-points-closed-form", "losses", worst <= 1e-9,
            fmt("max |closed form - point sum| = %.2e over %d pairs (bound 1.0e-09)", worst,
                pairs)};
}

std::vector<CheckResult> gs_limit_checks(std::uint64_t seed, int inputs) {
    Pcg32 rng(seed, 90);
    const map::MappingSpec sixd = map::MappingSpec::of(map::Kind::SixD);
    const double lambdas[4] = {1e-1, 1e-2, 1e-3, 1e-4};
    int monotone_breaks = 0;
    double worst_final = 0.0;
    for (int t = 0; t < inputs; ++t) {
        const std::vector<double> x = sample_admissible(sixd, rng);
        const Mat3 limit = map::apply(sixd, x);
        MatX m(3, 2);
        for (int i = 0; i < 3; ++i) {
            m(i, 0) = x[static_cast<std::size_t>(i)];
            m(i, 1) = x[static_cast<std::size_t>(i) + 3];
        }
        double prev = std::numeric_limits<double>::infinity();
        double err = 0.0;
        for (double l2 : lambdas) {
            MatX lam(3, 2);
            lam(0, 0) = 1.0;
            lam(1, 1) = l2;
            err = frobenius_norm(map::weighted_procrustes(m, lam) - limit);
            if (err >= prev) ++monotone_breaks;
            prev = err;
        }
        worst_final = std::max(worst_final, err);
    }
    std::vector<CheckResult> out;
    out.push_back({"limit-gs/monotone", "mappings", monotone_breaks == 0,
                   fmt("%d monotonicity breaks over %d inputs x 4 weights", monotone_breaks,
                       inputs)});
    out.push_back({"limit-gs/limit-error", "mappings", worst_final <= 1e-2,
                   fmt("max gap to Gram-Schmidt %.2e at weight 1e-4 (bound 1.0e-02)",
                       worst_final)});
    return out;
}

}  // namespace

std::vector<CheckResult> gradcheck(std::uint64_t seed, int samples) {
    std::vector<CheckResult> out;
    for (const map::MappingSpec& m : map::MappingSpec::all())
        out.push_back(mapping_gradcheck(m, seed, samples));
    out.push_back(softmax_gradcheck(seed, samples));
    out.push_back(frobenius_gradcheck(seed, samples));
    out.push_back(quaternion_gradcheck(seed, samples));
    out.push_back(weighted_points_gradcheck(seed, samples));
    out.push_back(end_to_end_gradcheck(seed, samples));
    return out;
}

std::vector<CheckResult> gradcheck(std::uint64_t seed, int samples, const map::MappingSpec& only) {
    return {mapping_gradcheck(only, seed, samples)};
}

std::vector<CheckResult> rankcheck(std::uint64_t seed, int samples) {
    std::vector<CheckResult> out;
    for (const map::MappingSpec& m : map::MappingSpec::all())
        out.push_back(surjectivity_check(m, seed, samples));
    for (const map::MappingSpec& m : map::MappingSpec::all()) {
        if (m.kind == map::Kind::RotVec || m.kind == map::Kind::EulerXYZ) continue;
        out.push_back(full_rank_check(m, seed, samples));
    }
    out.push_back(rotvec_deficiency_check(seed, std::max(2, samples / 10)));
    out.push_back(euler_deficiency_check(seed, std::max(2, samples / 10)));
    return out;
}

std::vector<CheckResult> convexity(std::uint64_t seed, int samples) {
    std::vector<CheckResult> out;
    for (map::Kind kind : {map::Kind::SixD, map::Kind::Procrustes, map::Kind::SymMatrix10})
        out.push_back(convexity_check(map::MappingSpec::of(kind), seed, samples));
    out.push_back(quaternion_scaling_check(seed, samples));
    out.push_back(quaternion_antipodal_check(seed, samples));
    return out;
}

std::vector<CheckResult> identities(std::uint64_t seed, int pairs) {
    std::vector<CheckResult> out;
    out.push_back(frobenius_identity_check(seed, pairs));
    out.push_back(quaternion_identity_check(seed, pairs));
    out.push_back(ratio_identity_check(seed, std::max(1, pairs / 10)));
    out.push_back(weighted_points_identity_check(seed, std::max(1, pairs / 10)));
    return out;
}

std::vector<CheckResult> gs_limit(std::uint64_t seed, int inputs) {
    return gs_limit_checks(seed, inputs);
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results)
        if (!r.passed) return false;
    return true;
}

std::vector<CheckInfo> list_checks() {
    std::vector<CheckInfo> out;
    for (const map::MappingSpec& m : map::MappingSpec::all())
        out.push_back({std::string("gradcheck/") + m.name(), "mappings",
                       "analytic 9xn Jacobian vs central differences"});
    out.push_back({"gradcheck/softmax", "mappings",
                   "softmax Jacobian vs central differences"});
    out.push_back({"gradcheck/loss-frobenius", "losses",
                   "Frobenius loss gradient vs central differences"});
    out.push_back({"gradcheck/loss-quaternion", "losses",
                   "quaternion min loss gradient vs central differences"});
    out.push_back({"gradcheck/loss-weighted-points", "losses",
                   "weighted points loss gradient vs central differences"});
    out.push_back({"gradcheck/end-to-end", "tinynet",
                   "parameter gradients of net -> mapping -> loss vs central differences"});
    for (const map::MappingSpec& m : map::MappingSpec::all())
        out.push_back({std::string("rankcheck/surjectivity/") + m.name(), "mappings",
                       "apply(canonical_preimage(R)) returns R on uniform rotations"});
    for (const map::MappingSpec& m : map::MappingSpec::all()) {
        if (m.kind == map::Kind::RotVec || m.kind == map::Kind::EulerXYZ) continue;
        out.push_back({std::string("rankcheck/full-rank/") + m.name(), "mappings",
                       "Jacobian keeps rank 3 at random admissible inputs"});
    }
    out.push_back({"rankcheck/deficiency/rotvec-full-turn", "mappings",
                   "rotation vector loses rank at 2 pi k norms"});
    out.push_back({"rankcheck/deficiency/euler-gimbal", "mappings",
                   "Euler XYZ loses rank at beta of half pi"});
    out.push_back({"convexity/sixd", "mappings",
                   "pre-image segments stay on the same rotation"});
    out.push_back({"convexity/procrustes", "mappings",
                   "pre-image segments stay on the same rotation"});
    out.push_back({"convexity/symmatrix10", "mappings",
                   "pre-image segments stay on the same rotation"});
    out.push_back({"convexity/quaternion-scaling-ray", "mappings",
                   "positive scalings mix safely on the same rotation"});
    out.push_back({"convexity/quaternion-antipodal-midpoint", "mappings",
                   "antipodal midpoints raise the degeneracy"});
    out.push_back({"identities/frobenius-geodesic", "losses",
                   "Frobenius loss equals 8 sin^2(a/2)"});
    out.push_back({"identities/quaternion-geodesic", "losses",
                   "quaternion min loss equals 4 sin^2(a/4)"});
    out.push_back({"identities/small-angle-ratio", "losses",
                   "Frobenius over quaternion loss near 8 for small angles"});
    out.push_back({"identities/weighted-points-closed-form", "losses",
                   "closed form equals the explicit point sum"});
    out.push_back({"limit-gs/monotone", "mappings",
                   "weighted Procrustes approaches Gram-Schmidt monotonically"});
    out.push_back({"limit-gs/limit-error", "mappings",
                   "gap to Gram-Schmidt below 1e-2 at weight 1e-4"});
    return out;
}

}  // namespace rotmap::checks
