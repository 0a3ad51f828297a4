#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rotmap/errors.hpp"
#include "rotmap/linalg.hpp"
#include "rotmap/losses.hpp"
#include "rotmap/mat.hpp"
#include "rotmap/rng.hpp"
#include "rotmap/so3.hpp"

using namespace rotmap;

namespace {

constexpr double kPi = std::numbers::pi;

Vec4 quat_of(const Mat3& r) {
    const so3::UnitQuaternion q = so3::matrix_to_quat(r);
    return {{q.x, q.y, q.z, q.w}};
}

Vec3 random_axis(Pcg32& rng) {
    Vec3 a{{rng.normal(), rng.normal(), rng.normal()}};
    return (1.0 / norm(a)) * a;
}

std::vector<Vec3> gaussian_cloud(std::mt19937_64& gen, int n) {
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pts.push_back({{oracle::nrand(gen), oracle::nrand(gen), oracle::nrand(gen)}});
    return pts;
}

}  // namespace

TEST_CASE("frobenius loss") {
    Pcg32 rng(11);

    SUBCASE("fixed values") {
        const Mat3 r = so3::random_rotation(rng);
        const loss::RotationLoss same = loss::frobenius_loss(r, r);
        CHECK(same.value == 0.0);
        CHECK(max_abs(same.grad) == 0.0);
        Mat3 flip;
        flip(0, 0) = 1.0;
        flip(1, 1) = -1.0;
        flip(2, 2) = -1.0;
        CHECK(loss::frobenius_loss(Mat3::identity(), flip).value == 8.0);
    }

    SUBCASE("equals eight sin-squared of half the geodesic angle") {
        for (int t = 0; t < 1000; ++t) {
            const Mat3 r1 = so3::random_rotation(rng);
            const Mat3 r2 = so3::random_rotation(rng);
            const double alpha = so3::geodesic_angle(r1, r2);
            const double s = std::sin(alpha / 2.0);
            CHECK_NEAR(loss::frobenius_loss(r1, r2).value, 8.0 * s * s, 1e-9);
        }
    }

    SUBCASE("gradient matches finite differences") {
        std::mt19937_64 gen(12);
        for (int t = 0; t < 200; ++t) {
            const Mat3 r = so3::random_rotation(rng);
            const Mat3 rs = so3::random_rotation(rng);
            const loss::RotationLoss l = loss::frobenius_loss(r, rs);
            std::vector<double> x(r.a.begin(), r.a.end());
            const auto fd = oracle::fd_gradient(
                [&](const std::vector<double>& v) {
                    Mat3 m;
                    for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
                    return loss::frobenius_loss(m, rs).value;
                },
                x, 1e-6);
            for (int i = 0; i < 9; ++i)
                CHECK_NEAR(l.grad.a[static_cast<std::size_t>(i)], fd[static_cast<std::size_t>(i)],
                           1e-5 * (1.0 + max_abs(l.grad)));
        }
    }

    SUBCASE("invariant under a common left rotation") {
        for (int t = 0; t < 100; ++t) {
            const Mat3 r = so3::random_rotation(rng);
            const Mat3 rs = so3::random_rotation(rng);
            const Mat3 q = so3::random_rotation(rng);
            CHECK_NEAR(loss::frobenius_loss(q * r, q * rs).value,
                       loss::frobenius_loss(r, rs).value, 1e-12);
        }
    }
}

TEST_CASE("quaternion min loss") {
    Pcg32 rng(13);

    SUBCASE("antipodal identification") {
        for (int t = 0; t < 100; ++t) {
            const Vec4 q = quat_of(so3::random_rotation(rng));
            CHECK(loss::quaternion_min_loss(q, q).value == 0.0);
            const Vec4 neg = -1.0 * q;
            CHECK(loss::quaternion_min_loss(q, neg).value == 0.0);
            // Negating the first argument changes nothing, exactly.
            const Vec4 q_star = quat_of(so3::random_rotation(rng));
            CHECK(loss::quaternion_min_loss(q, q_star).value ==
                  loss::quaternion_min_loss(neg, q_star).value);
        }
    }

    SUBCASE("equals four sin-squared of a quarter of the geodesic angle") {
        for (int t = 0; t < 1000; ++t) {
            const Mat3 r1 = so3::random_rotation(rng);
            const Mat3 r2 = so3::random_rotation(rng);
            const double alpha = so3::geodesic_angle(r1, r2);
            const double s = std::sin(alpha / 4.0);
            CHECK_NEAR(loss::quaternion_min_loss(quat_of(r1), quat_of(r2)).value, 4.0 * s * s,
                       1e-9);
        }
    }

    SUBCASE("gradient matches finite differences on the achieved branch") {
        std::mt19937_64 gen(14);
        for (int t = 0; t < 200; ++t) {
            Vec4 q, qs;
            for (int i = 0; i < 4; ++i) {
                q[i] = oracle::nrand(gen);
                qs[i] = oracle::nrand(gen);
            }
            if (std::abs(dot(q, qs)) < 1e-3) continue;  // stay off the tie boundary
            const loss::QuaternionLoss l = loss::quaternion_min_loss(q, qs);
            const std::vector<double> x(q.a.begin(), q.a.end());
            const auto fd = oracle::fd_gradient(
                [&](const std::vector<double>& v) {
                    return loss::quaternion_min_loss(Vec4{{v[0], v[1], v[2], v[3]}}, qs).value;
                },
                x, 1e-6);
            for (int i = 0; i < 4; ++i)
                CHECK_NEAR(l.grad[i], fd[static_cast<std::size_t>(i)], 1e-5 * (1.0 + norm(l.grad)));
        }
    }

    SUBCASE("an exact tie picks the minus branch") {
        const Vec4 q{{1.0, 0.0, 0.0, 0.0}};
        const Vec4 qs{{0.0, 1.0, 0.0, 0.0}};  // orthogonal, both branches give 2
        const loss::QuaternionLoss l = loss::quaternion_min_loss(q, qs);
        CHECK(l.value == 2.0);
        CHECK(l.grad[0] == 2.0);
        CHECK(l.grad[1] == -2.0);
    }

    SUBCASE("rejects non-finite input") {
        CHECK_THROWS_AS(loss::quaternion_min_loss(Vec4{{std::nan(""), 0.0, 0.0, 1.0}},
                                                  Vec4{{0.0, 0.0, 0.0, 1.0}}),
                        NonFinite);
    }
}

TEST_CASE("small-angle weighting of the two losses") {
    CHECK(loss::loss_weight_ratio() == 0.125);
    Pcg32 rng(15);
    for (int t = 0; t < 1000; ++t) {
        const Mat3 r1 = so3::random_rotation(rng);
        const double alpha = rng.uniform(1e-3, 0.1);
        const Mat3 r2 = r1 * so3::exp_map(alpha * random_axis(rng));
        const double ratio = loss::frobenius_loss(r1, r2).value /
                             loss::quaternion_min_loss(quat_of(r1), quat_of(r2)).value;
        CHECK(std::abs(ratio - 8.0) <= 0.02 * 8.0);
    }
}

TEST_CASE("point sets") {
    SUBCASE("construction recenters and measures the diameter") {
        std::mt19937_64 gen(16);
        for (int t = 0; t < 20; ++t) {
            std::vector<Vec3> pts = gaussian_cloud(gen, 50);
            const Vec3 offset{{oracle::urand(gen, -5.0, 5.0), oracle::urand(gen, -5.0, 5.0),
                               oracle::urand(gen, -5.0, 5.0)}};
            for (Vec3& p : pts) p = p + offset;
            const loss::PointSet ps(pts);
            Vec3 centroid;
            for (const Vec3& p : ps.points()) centroid = centroid + p;
            centroid = (1.0 / static_cast<double>(ps.points().size())) * centroid;
            CHECK(norm(centroid) <= 1e-9);
            double best = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t j = i + 1; j < pts.size(); ++j)
                    best = std::max(best, norm(pts[i] - pts[j]));
            CHECK_NEAR(ps.diameter(), best, 1e-12);
        }
    }

    SUBCASE("degenerate sets are refused") {
        CHECK_THROWS_AS(loss::PointSet({}), EmptyPointSet);
        CHECK_THROWS_AS(loss::PointSet({Vec3{{1.0, 2.0, 3.0}}}), ZeroDiameter);
        CHECK_THROWS_AS(loss::PointSet({Vec3{{1.0, 2.0, 3.0}}, Vec3{{1.0, 2.0, 3.0}}}),
                        ZeroDiameter);
        CHECK_THROWS_AS(loss::PointSet({Vec3{{std::nan(""), 0.0, 0.0}}, Vec3{{1.0, 0.0, 0.0}}}),
                        NonFinite);
    }
}

TEST_CASE("weighted points loss") {
    Pcg32 rng(17);
    std::mt19937_64 gen(18);

    SUBCASE("closed form agrees with the explicit mean") {
        for (int t = 0; t < 50; ++t) {
            const loss::PointSet ps(gaussian_cloud(gen, 200));
            const Mat3 r = so3::random_rotation(rng);
            const Mat3 rs = so3::random_rotation(rng);
            const loss::PointsLoss l = loss::weighted_points_loss(r, rs, ps);
            CHECK_NEAR(l.value, l.direct_value, 1e-9);
        }
        const loss::PointSet ps(gaussian_cloud(gen, 100));
        const Mat3 r = so3::random_rotation(rng);
        CHECK(loss::weighted_points_loss(r, r, ps).value == 0.0);
    }

    SUBCASE("gradient matches finite differences") {
        const loss::PointSet ps(gaussian_cloud(gen, 120));
        for (int t = 0; t < 200; ++t) {
            const Mat3 r = so3::random_rotation(rng);
            const Mat3 rs = so3::random_rotation(rng);
            const loss::PointsLoss l = loss::weighted_points_loss(r, rs, ps);
            std::vector<double> x(r.a.begin(), r.a.end());
            const auto fd = oracle::fd_gradient(
                [&](const std::vector<double>& v) {
                    Mat3 m;
                    for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
                    return loss::weighted_points_loss(m, rs, ps).value;
                },
                x, 1e-6);
            for (int i = 0; i < 9; ++i)
                CHECK_NEAR(l.grad.a[static_cast<std::size_t>(i)], fd[static_cast<std::size_t>(i)],
                           1e-5 * (1.0 + max_abs(l.grad)));
        }
    }

    SUBCASE("uniform sphere sample approaches the isotropic value") {
        // For points uniform on the unit sphere the second moment is I/3,
        // so the loss tends to 8 sin²(α/2)/(3 d²).
        std::vector<Vec3> pts;
        for (int i = 0; i < 4000; ++i) {
            Vec3 p{{rng.normal(), rng.normal(), rng.normal()}};
            pts.push_back((1.0 / norm(p)) * p);
        }
        const loss::PointSet ps(pts);
        for (int t = 0; t < 20; ++t) {
            const Mat3 r = so3::random_rotation(rng);
            const double alpha = rng.uniform(0.2, kPi - 0.2);
            const Mat3 rs = r * so3::exp_map(alpha * random_axis(rng));
            const double s = std::sin(alpha / 2.0);
            const double expected = 8.0 * s * s / (3.0 * ps.diameter() * ps.diameter());
            const loss::PointsLoss l = loss::weighted_points_loss(r, rs, ps);
            CHECK(std::abs(l.value - expected) <= 0.05 * expected);
            CHECK_NEAR(l.value, l.direct_value, 1e-9);
        }
    }

    SUBCASE("a collinear pair yields a rank-one lambda blind to its axis") {
        const loss::PointSet ps({Vec3{{0.7, 0.0, 0.0}}, Vec3{{-0.7, 0.0, 0.0}}});
        const linalg::RankInfo info = [&] {
            MatX l(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) l(i, j) = ps.lambda()(i, j);
            return linalg::numeric_rank(l, 1e-9);
        }();
        CHECK(info.rank == 1);
        for (int t = 0; t < 50; ++t) {
            const Mat3 r = so3::random_rotation(rng);
            const Mat3 rs = so3::random_rotation(rng);
            const double base = loss::weighted_points_loss(r, rs, ps).value;
            const Mat3 about_x = so3::exp_map(Vec3{{rng.uniform(-kPi, kPi), 0.0, 0.0}});
            CHECK_NEAR(loss::weighted_points_loss(r * about_x, rs, ps).value, base, 1e-12);
        }
        CHECK(loss::weighted_points_loss(so3::exp_map(Vec3{{1.1, 0.0, 0.0}}), Mat3::identity(), ps)
                  .value <= 1e-30);
    }

    SUBCASE("isotropic lambda is invariant under a common left rotation") {
        loss::LossSpec spec;
        spec.kind = loss::Kind::WeightedPoints;
        spec.lambda = 0.37 * Mat3::identity();
        for (int t = 0; t < 100; ++t) {
            const Mat3 r = so3::random_rotation(rng);
            const Mat3 rs = so3::random_rotation(rng);
            const Mat3 q = so3::random_rotation(rng);
            CHECK_NEAR(loss::rotation_loss(spec, q * r, q * rs).value,
                       loss::rotation_loss(spec, r, rs).value, 1e-12);
        }
    }
}

TEST_CASE("generic rotation loss evaluator") {
    Pcg32 rng(19);

    SUBCASE("weight scales value and gradient") {
        loss::LossSpec spec;
        spec.kind = loss::Kind::FrobeniusSq;
        spec.weight = 0.25;
        const Mat3 r = so3::random_rotation(rng);
        const Mat3 rs = so3::random_rotation(rng);
        const loss::RotationLoss base = loss::frobenius_loss(r, rs);
        const loss::RotationLoss scaled = loss::rotation_loss(spec, r, rs);
        CHECK_NEAR(scaled.value, 0.25 * base.value, 1e-15);
        CHECK(max_abs(scaled.grad - 0.25 * base.grad) <= 1e-15);
    }

    SUBCASE("quaternion branch matches the quaternion loss and finite differences") {
        loss::LossSpec spec;
        spec.kind = loss::Kind::QuaternionMinSq;
        for (int t = 0; t < 200; ++t) {
            const Mat3 r = so3::random_rotation(rng);
            const Mat3 rs = so3::random_rotation(rng);
            const loss::RotationLoss l = loss::rotation_loss(spec, r, rs);
            CHECK_NEAR(l.value, loss::quaternion_min_loss(quat_of(r), quat_of(rs)).value, 1e-12);
            // fd across the conversion; perturbed matrices are slightly
            // off-manifold, which the conversion tolerates by normalizing.
            std::vector<double> x(r.a.begin(), r.a.end());
            const auto fd = oracle::fd_gradient(
                [&](const std::vector<double>& v) {
                    Mat3 m;
                    for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
                    return loss::rotation_loss(spec, m, rs).value;
                },
                x, 1e-6);
            for (int i = 0; i < 9; ++i)
                CHECK_NEAR(l.grad.a[static_cast<std::size_t>(i)], fd[static_cast<std::size_t>(i)],
                           1e-5 * (1.0 + max_abs(l.grad)));
        }
    }

    SUBCASE("lambda validation") {
        loss::LossSpec spec;
        spec.kind = loss::Kind::WeightedPoints;
        spec.lambda(0, 1) = 0.2;  // asymmetric
        const Mat3 i3 = Mat3::identity();
        CHECK_THROWS_AS(loss::rotation_loss(spec, i3, i3), ShapeMismatch);
        spec.lambda = Mat3::identity();
        spec.lambda(2, 2) = -0.5;  // negative eigenvalue
        CHECK_THROWS_AS(loss::rotation_loss(spec, i3, i3), ShapeMismatch);
        spec.lambda = Mat3::identity();
        spec.lambda(0, 0) = std::nan("");
        CHECK_THROWS_AS(loss::rotation_loss(spec, i3, i3), NonFinite);
        spec.lambda = Mat3::identity();
        spec.weight = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(loss::rotation_loss(spec, i3, i3), NonFinite);
    }
}
