#include "support.hpp"

#include "ksphere/errors.hpp"
#include "ksphere/reduced.hpp"

#include <doctest.h>

#include <cmath>

using namespace ksphere;
using namespace ktest;

namespace {

double pair_cross_ratio(const Mat& x, int i, int j, int k, int l) {
    return cross_ratio(Vec(x.col(i)), Vec(x.col(j)), Vec(x.col(k)), Vec(x.col(l)));
}

ReducedStateWZeta random_state(Eigen::Index d, Eigen::Index n, Rng& rng) {
    return {random_ball(d, 0.8, rng), random_rotation(d, rng), make_base(random_configuration(d, n, rng))};
}

}  // namespace

TEST_CASE("alpha operator") {
    const Vec e1 = Vec::Unit(3, 0);
    const Vec e2 = Vec::Unit(3, 1);
    CHECK(max_abs(alpha_apply(e1, e2, e1) - e2) == 0.0);
    Rng rng = make_rng(1);
    for (int k = 0; k < 50; ++k) {
        const Vec y1 = random_ball_point(4, 2.0, rng);
        const Vec y2 = random_ball_point(4, 2.0, rng);
        const Vec y = random_ball_point(4, 2.0, rng);
        CHECK(max_abs(alpha_apply(y1, y1, y)) <= 1e-15);
        CHECK(std::abs(alpha_apply(y1, y2, y).dot(y)) <= 1e-14);
        CHECK(max_abs(alpha_matrix(y1, y2) * y - alpha_apply(y1, y2, y)) <= 1e-14);
        const Mat m = alpha_matrix(y1, y2);
        CHECK(max_abs(m + m.transpose()) <= 1e-15);
    }
}

TEST_CASE("base points must be in general position") {
    Rng rng = make_rng(2);
    CHECK_THROWS_AS(BasePoints(random_configuration(3, 2, rng)), InvalidInput);
    Mat dup = random_sphere_points(3, 4, rng);
    dup.col(3) = dup.col(1);
    CHECK_THROWS_AS(BasePoints(Configuration(dup)), InvalidInput);
    Mat two_lines(3, 4);
    two_lines << 1, -1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0;
    CHECK_THROWS_AS(BasePoints(Configuration(two_lines)), InvalidInput);
    Mat three_lines(3, 4);
    three_lines << 1, -1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
    CHECK_NOTHROW(BasePoints(Configuration(three_lines)));
}

TEST_CASE("rates at the identity") {
    Rng rng = make_rng(3);
    const Configuration p = random_configuration(3, 7, rng);
    const AntisymmetricMatrix A = random_antisymmetric(3, 1.0, rng);
    const auto spec = OrderParameterSpec::linear(WeightSpec::gaussian_riemann(7));
    const Vec Zp = order_parameter(p, spec);
    const ReducedStateWZeta s = initial_state(p);
    const ReducedRate r = wzeta_rhs(s, A, spec);
    CHECK(max_abs(r.boost_dot + 0.5 * Zp) <= 1e-15);
    CHECK(max_abs(r.zeta_dot - A.matrix()) <= 1e-15);
    const ReducedRate rz = zzeta_rhs(to_zzeta(s), A, spec);
    CHECK(max_abs(rz.boost_dot - 0.5 * Zp) <= 1e-15);
    CHECK(max_abs(rz.zeta_dot - A.matrix()) <= 1e-15);
    CHECK(max_abs(w_rhs(BallPoint::origin(3), p, WeightSpec::gaussian_riemann(7)) + 0.5 * Zp) <= 1e-15);
}

TEST_CASE("w equation does not depend on zeta") {
    Rng rng = make_rng(4);
    for (int k = 0; k < 60; ++k) {
        const int d = 2 + k % 3;
        const ReducedStateWZeta s = random_state(d, 9, rng);
        const WeightSpec w = WeightSpec::gaussian_riemann(9);
        const auto spec = OrderParameterSpec::linear(w);
        const AntisymmetricMatrix A = random_antisymmetric(d, 1.0, rng);
        const Vec free = w_rhs(s.w, s.base->config(), w);
        CHECK(max_abs(wzeta_rhs(s, A, spec).boost_dot - free) <= 1e-12);
        const ReducedStateWZeta other{s.w, random_rotation(d, rng), s.base};
        CHECK(max_abs(wzeta_rhs(other, A, spec).boost_dot - free) <= 1e-12);
        CHECK(max_abs(w_rhs(s.w, s.base->config(), spec) - free) == 0.0);
        // Z(M_w p) built from independent boosts
        Vec Z = Vec::Zero(d);
        for (int i = 0; i < 9; ++i) Z += w.weights()(i) * boost_ahlfors(s.w.vec(), s.base->config().point(i));
        CHECK(max_abs(free + 0.5 * (1 - s.w.vec().squaredNorm()) * Z) <= 1e-14);
    }
}

TEST_CASE("(z, zeta) rates agree with the product rule") {
    Rng rng = make_rng(5);
    for (int k = 0; k < 60; ++k) {
        const int d = 2 + k % 3;
        const ReducedStateWZeta s = random_state(d, 8, rng);
        const AntisymmetricMatrix A = random_antisymmetric(d, 1.0, rng);
        const auto spec = k % 2 ? OrderParameterSpec::mean_field(1.7) : OrderParameterSpec::linear(WeightSpec::equal(8));
        const ReducedRate rw = wzeta_rhs(s, A, spec);
        const ReducedStateZZeta sz = to_zzeta(s);
        const ReducedRate rz = zzeta_rhs(sz, A, spec);
        // z = -zeta w
        const Vec dz = -(rw.zeta_dot * s.w.vec() + s.zeta.matrix() * rw.boost_dot);
        CHECK(max_abs(rz.boost_dot - dz) <= 1e-10);
        CHECK(max_abs(rz.zeta_dot - rw.zeta_dot) <= 1e-10);

        const Vec Z = order_parameter(reconstruct(sz), spec);
        const Vec& z = sz.z.vec();
        CHECK(std::abs(rz.boost_dot.dot(z) - 0.5 * (1 - z.squaredNorm()) * Z.dot(z)) <= 1e-12);

        const ReducedStateWZeta back = to_wzeta(sz);
        CHECK(max_abs(back.w.vec() - s.w.vec()) <= 1e-15);
        CHECK(max_abs(reconstruct(sz).points() - reconstruct(s).points()) <= 1e-12);
    }
}

TEST_CASE("reconstruction") {
    Rng rng = make_rng(6);
    const Configuration p = random_configuration(3, 6, rng);
    CHECK(reconstruct(initial_state(p)).points() == p.points());
    for (int k = 0; k < 30; ++k) {
        const ReducedStateWZeta s{random_ball(3, 0.9, rng), random_rotation(3, rng), make_base(p)};
        const Mat x = reconstruct(s).points();
        for (int i = 0; i < 6; ++i) {
            const Vec oracle = s.zeta.matrix() * boost_ahlfors(s.w.vec(), p.point(i));
            CHECK(max_abs(x.col(i) - oracle) <= 1e-14);
        }
        CHECK(pair_cross_ratio(x, 0, 1, 2, 3) ==
              doctest::Approx(pair_cross_ratio(p.points(), 0, 1, 2, 3)).epsilon(1e-10));
        CHECK(pair_cross_ratio(x, 5, 2, 4, 1) ==
              doctest::Approx(pair_cross_ratio(p.points(), 5, 2, 4, 1)).epsilon(1e-10));
    }
}

TEST_CASE("reduced trajectories reconstruct the full system") {
    Rng rng = make_rng(7);
    for (int d = 2; d <= 4; ++d) {
        const Configuration c0 = random_configuration(d, 10, rng);
        const AntisymmetricMatrix A = random_antisymmetric(d, 1.0, rng);
        const auto spec = OrderParameterSpec::linear(WeightSpec::equal(10));
        IntegrationOptions o;
        o.h = 1e-3;
        o.t_end = 10.0;
        o.stride = 250;
        const FullTrajectory full = integrate_full(c0, RotationTerms::shared(A), spec, o);
        const ReducedTrajectory red = integrate_reduced(initial_state(c0), A, spec, o);
        REQUIRE(full.records.size() == red.records.size());
        double dev = 0.0;
        for (std::size_t k = 0; k < full.records.size(); ++k) {
            CHECK(full.records[k].t == red.records[k].t);
            dev = std::max(dev, max_abs(full.records[k].positions - red.records[k].positions));
            CHECK(red.records[k].max_orth_residual <= 1e-9);
            CHECK(orthogonality_residual(red.records[k].zeta) <= 1e-9);
        }
        CHECK(dev <= 1e-5);

        const double c_a = pair_cross_ratio(c0.points(), 0, 1, 2, 3);
        for (const auto& r : red.records) CHECK(std::abs(pair_cross_ratio(r.positions, 0, 1, 2, 3) - c_a) <= 1e-6);

        // (z, zeta) coordinates give the same trajectory
        std::vector<ReducedRecord> zr;
        integrate_reduced_zzeta(to_zzeta(initial_state(c0)), A, spec, o, [&](const ReducedRecord& r) { zr.push_back(r); });
        REQUIRE(zr.size() == full.records.size());
        for (std::size_t k = 0; k < zr.size(); ++k) {
            CHECK(max_abs(zr[k].positions - full.records[k].positions) <= 1e-5);
            const Vec Z = order_parameter(Configuration(zr[k].positions, 1e-9), spec);
            const ReducedRate rate = zzeta_rhs(ReducedStateZZeta{BallPoint(zr[k].boost), Rotation::project(zr[k].zeta),
                                                                 make_base(c0)},
                                               A, spec);
            const Vec& z = zr[k].boost;
            CHECK(std::abs(rate.boost_dot.dot(z) - 0.5 * (1 - z.squaredNorm()) * Z.dot(z)) <= 1e-10);
        }
    }
}

TEST_CASE("t_end = 0 returns the initial state") {
    Rng rng = make_rng(8);
    const ReducedStateWZeta s = random_state(3, 5, rng);
    IntegrationOptions o;
    o.t_end = 0.0;
    const ReducedTrajectory tr =
        integrate_reduced(s, AntisymmetricMatrix::zero(3), OrderParameterSpec::linear(WeightSpec::equal(5)), o);
    REQUIRE(tr.records.size() == 1);
    CHECK(tr.records[0].boost == s.w.vec());
    CHECK(tr.records[0].zeta == s.zeta.matrix());
}

TEST_CASE("forward w flow runs to the boundary") {
    Rng rng = make_rng(9);
    const Configuration p = random_configuration(3, 100, rng);
    WFlowOptions wo;
    wo.integration.h = 0.01;
    wo.integration.t_end = 40.0;
    wo.integration.stride = 10;
    wo.stop_radius = 1.0 - 1e-9;
    const WFlowTrajectory tr = integrate_w(BallPoint::origin(3), p, WeightSpec::equal(100), wo);
    CHECK(tr.stop == WFlowStop::Radius);
    CHECK(tr.records.back().w.norm() >= 1.0 - 1e-9 - 1e-6);
    // monotone after the first time unit
    for (std::size_t k = 11; k < tr.records.size(); ++k) CHECK(tr.records[k].w.norm() > tr.records[k - 1].w.norm());
    for (std::size_t k = 1; k < tr.records.size(); ++k) CHECK(tr.records[k].t > tr.records[k - 1].t);
}

TEST_CASE("boundary breach carries the last interior state") {
    Rng rng = make_rng(10);
    const Configuration p = random_configuration(3, 20, rng);
    IntegrationOptions o;
    o.h = 0.01;
    o.t_end = 60.0;
    o.stride = 1000;
    try {
        integrate_reduced(initial_state(p), AntisymmetricMatrix::zero(3), OrderParameterSpec::linear(WeightSpec::equal(20)),
                          o);
        FAIL("expected a boundary breach");
    } catch (const BoundaryBreach& b) {
        CHECK(b.time() > 10.0);
        CHECK(b.time() < 60.0);
        CHECK(b.last_boost().norm() < kBoundaryGuard);
        CHECK(orthogonality_residual(b.last_zeta()) <= 1e-9);
    }
}

TEST_CASE("base point change") {
    Rng rng = make_rng(11);
    const BallPoint w = random_ball(3, 0.7, rng);
    CHECK(max_abs(basepoint_change(w, MobiusMap::identity(3)).vec() - w.vec()) <= 1e-15);
    const BallPoint v = random_ball(3, 0.7, rng);
    CHECK(max_abs(basepoint_change(BallPoint::origin(3), MobiusMap::pure_boost(v)).vec() + v.vec()) <= 1e-15);

    for (int k = 0; k < 30; ++k) {
        const int d = 2 + k % 3;
        const ReducedStateWZeta s = random_state(d, 7, rng);
        const MobiusMap M = random_map(d, 0.6, rng);
        const ReducedStateWZeta s2 = change_base(s, M);
        CHECK(max_abs(s2.w.vec() - mobius_apply(M, s.w.vec())) <= 1e-14);
        for (int i = 0; i < 7; ++i)
            CHECK(max_abs(s2.base->config().point(i) - mobius_apply(M, s.base->config().point(i))) <= 1e-14);
        CHECK(max_abs(reconstruct(s2).points() - reconstruct(s).points()) <= 1e-10);
    }
}
