#include "support.hpp"

#include "ksphere/dynamics.hpp"
#include "ksphere/errors.hpp"
#include "ksphere/rk4.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

using namespace ksphere;
using namespace ktest;

namespace {

Mat columns(std::initializer_list<Vec> cols) {
    Mat m(cols.begin()->size(), static_cast<Eigen::Index>(cols.size()));
    Eigen::Index j = 0;
    for (const auto& c : cols) m.col(j++) = c;
    return m;
}

Vec e(int d, int k) { return Vec::Unit(d, k); }

// Rotation by angle theta in the (0,1) plane.
Mat planar_rotation(double theta) {
    Mat r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

}  // namespace

TEST_CASE("weight specs") {
    const WeightSpec eq = WeightSpec::equal(4);
    CHECK(eq.weights().isApproxToConstant(0.25));
    CHECK(eq.is_normalized());

    const WeightSpec g = WeightSpec::gaussian_riemann(100);
    CHECK(g.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.weights().minCoeff() > 0.0);
    for (int i = 0; i < 50; ++i) CHECK(g.weights()(i) == doctest::Approx(g.weights()(99 - i)).epsilon(1e-13));
    // midpoint of cell i is -3 + 6(i + 1/2)/n
    const double x0 = -3.0 + 6.0 * 0.5 / 100.0;
    const double x1 = -3.0 + 6.0 * 1.5 / 100.0;
    CHECK(g.weights()(1) / g.weights()(0) == doctest::Approx(std::exp(-(x1 * x1 - x0 * x0) / 2)).epsilon(1e-12));

    const WeightSpec m = WeightSpec::majority(100, 0.6);
    CHECK(m.weights()(0) == 0.6);
    CHECK(m.weights()(1) == doctest::Approx(0.4 / 99).epsilon(1e-15));
    CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-14));

    Vec neg(3);
    neg << 0.5, 0.6, -0.1;
    CHECK_THROWS_AS(WeightSpec::explicit_weights(neg), InvalidInput);
    Vec low(3);
    low << 0.3, 0.3, 0.3;
    CHECK_FALSE(WeightSpec::explicit_weights(low).is_normalized());
    CHECK_THROWS_AS(WeightSpec::explicit_weights(low).require_normalized(), InvalidInput);
}

TEST_CASE("configuration validation") {
    CHECK_THROWS_AS(Configuration(Mat::Ones(3, 2)), InvalidInput);
    CHECK_NOTHROW(Configuration(columns({e(3, 0), e(3, 1)})));
    Rng rng = make_rng(3);
    const Configuration c = random_configuration(4, 50, rng);
    CHECK(max_norm_drift(c.points()) <= 1e-15);
}

TEST_CASE("order parameter examples") {
    const auto eq2 = OrderParameterSpec::linear(WeightSpec::equal(2));
    CHECK(order_parameter(Configuration(columns({e(3, 0), -e(3, 0)})), eq2).norm() == 0.0);

    Rng rng = make_rng(4);
    const Vec q = random_sphere_point(3, rng);
    const auto eq5 = OrderParameterSpec::linear(WeightSpec::equal(5));
    CHECK(max_abs(order_parameter(Configuration(q.replicate(1, 5)), eq5) - q) <= 1e-15);

    Vec a(3);
    a << 0.5, 0.25, 0.25;
    const auto lin = OrderParameterSpec::linear(WeightSpec::explicit_weights(a));
    CHECK(max_abs(order_parameter(Configuration(Mat::Identity(3, 3)), lin) - a) == 0.0);

    const auto mf = OrderParameterSpec::mean_field(2.0);
    CHECK(max_abs(order_parameter(Configuration(Mat::Identity(3, 3)), mf) - Vec::Constant(3, 2.0 / 3.0)) <= 1e-15);

    // direct sum on a random ensemble
    const Configuration c = random_configuration(3, 100, rng);
    const auto eq100 = OrderParameterSpec::linear(WeightSpec::equal(100));
    Vec direct = Vec::Zero(3);
    for (int i = 0; i < 100; ++i) direct += c.point(i) / 100.0;
    const SyncMetrics sm = sync_metrics(c, eq100);
    CHECK(sm.znorm == doctest::Approx(direct.norm()).epsilon(1e-13));
    CHECK(sm.znorm < 5.0 / std::sqrt(100.0));
}

TEST_CASE("sync metrics") {
    Rng rng = make_rng(5);
    const Vec q = random_sphere_point(3, rng);
    const SyncMetrics s = sync_metrics(Configuration(q.replicate(1, 4)), OrderParameterSpec::linear(WeightSpec::equal(4)));
    CHECK(s.znorm == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.min_pair_dot == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.dist_to_diagonal <= 1e-15);
    CHECK(s.z_residual == doctest::Approx(1.0).epsilon(1e-15));

    const SyncMetrics anti =
        sync_metrics(Configuration(columns({e(3, 2), -e(3, 2)})), OrderParameterSpec::linear(WeightSpec::equal(2)));
    CHECK(anti.znorm == 0.0);
    CHECK(anti.min_pair_dot == -1.0);
}

TEST_CASE("full_rhs tangency and synchronized rest") {
    Rng rng = make_rng(6);
    for (int k = 0; k < 50; ++k) {
        const int d = 2 + k % 4;
        const Configuration c = random_configuration(d, 20, rng);
        std::vector<AntisymmetricMatrix> terms;
        for (int i = 0; i < 20; ++i) terms.push_back(random_antisymmetric(d, 1.0, rng));
        const Mat v = full_rhs(c, RotationTerms::per_particle(terms), OrderParameterSpec::mean_field(3.0));
        for (int i = 0; i < 20; ++i) CHECK(std::abs(v.col(i).dot(c.point(i))) <= 1e-14);
    }
    const Vec q = random_sphere_point(3, rng);
    const Mat v = full_rhs(Configuration(q.replicate(1, 7)), RotationTerms::shared(AntisymmetricMatrix::zero(3)),
                           OrderParameterSpec::linear(WeightSpec::equal(7)));
    CHECK(max_abs(v) <= 1e-16);
    CHECK_THROWS_AS(RotationTerms::per_particle({AntisymmetricMatrix::zero(3), AntisymmetricMatrix::zero(3)}).shared_term(),
                    InvalidInput);
}

TEST_CASE("d = 2 velocity equals the angle form") {
    Rng rng = make_rng(7);
    const int n = 12;
    const double omega = 0.7;
    Vec up(1);
    up << -omega;  // A(0,1) = -omega rotates counterclockwise
    const AntisymmetricMatrix A(2, up);
    const WeightSpec w = WeightSpec::gaussian_riemann(n);
    const Configuration c = random_configuration(2, n, rng);
    const Mat v = full_rhs(c, RotationTerms::shared(A), OrderParameterSpec::linear(w));
    for (int i = 0; i < n; ++i) {
        const double ti = std::atan2(c.point(i)(1), c.point(i)(0));
        double rate = omega;
        for (int j = 0; j < n; ++j) rate += w.weights()(j) * std::sin(std::atan2(c.point(j)(1), c.point(j)(0)) - ti);
        Vec tangent(2);
        tangent << -std::sin(ti), std::cos(ti);
        CHECK(max_abs(v.col(i) - rate * tangent) <= 1e-14);
    }
}

TEST_CASE("d = 2 trajectories match an angle-form RK4 integrator") {
    Rng rng = make_rng(8);
    const int n = 10;
    const double omega = -0.4;
    Vec up(1);
    up << -omega;
    const WeightSpec w = WeightSpec::equal(n);
    const Configuration c0 = random_configuration(2, n, rng);

    IntegrationOptions o;
    o.h = 0.01;
    o.t_end = 10.0;
    o.stride = 1000;
    o.projection = false;
    const FullTrajectory full = integrate_full(c0, RotationTerms::shared(AntisymmetricMatrix(2, up)),
                                               OrderParameterSpec::linear(w), o);

    Vec th(n);
    for (int i = 0; i < n; ++i) th(i) = std::atan2(c0.point(i)(1), c0.point(i)(0));
    auto f = [&](const Vec& t) {
        Vec r(n);
        for (int i = 0; i < n; ++i) {
            r(i) = omega;
            for (int j = 0; j < n; ++j) r(i) += w.weights()(j) * std::sin(t(j) - t(i));
        }
        return r;
    };
    for (int k = 0; k < 1000; ++k) {
        const Vec k1 = f(th);
        const Vec k2 = f(th + 0.005 * k1);
        const Vec k3 = f(th + 0.005 * k2);
        const Vec k4 = f(th + 0.01 * k3);
        th += (0.01 / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const Mat& xend = full.records.back().positions;
    for (int i = 0; i < n; ++i) {
        Vec p(2);
        p << std::cos(th(i)), std::sin(th(i));
        CHECK(max_abs(xend.col(i) - p) <= 1e-8);
    }
}

TEST_CASE("two-particle phase difference has a closed form") {
    // psi' = -sin psi, so tan(psi/2) decays like e^{-t}.
    const double psi0 = 2.5;
    Vec a(2), b(2);
    a << 1.0, 0.0;
    b << std::cos(psi0), std::sin(psi0);
    IntegrationOptions o;
    o.h = 0.001;
    o.t_end = 3.0;
    o.stride = 3000;
    const FullTrajectory tr = integrate_full(Configuration(columns({a, b})),
                                             RotationTerms::shared(AntisymmetricMatrix::zero(2)),
                                             OrderParameterSpec::linear(WeightSpec::equal(2)), o);
    const Mat& x = tr.records.back().positions;
    const double psi = std::atan2(x(1, 1), x(0, 1)) - std::atan2(x(1, 0), x(0, 0));
    CHECK(psi == doctest::Approx(2.0 * std::atan(std::tan(psi0 / 2) * std::exp(-3.0))).epsilon(1e-11));
}

TEST_CASE("rk4_step basics") {
    auto lin = [](const Vec& x) -> Vec { return -x; };
    Vec x = Vec::Constant(3, 2.0);
    CHECK(rk4_step(x, lin, 0.0) == x);
    CHECK_THROWS_AS(rk4_step(x, lin, std::nan("")), InvalidInput);
    auto bad = [](const Vec& v) -> Vec { return v / 0.0 - v / 0.0; };
    CHECK_THROWS_AS(rk4_step(x, bad, 0.1), IntegrationFailure);
    // exact amplification polynomial for x' = -x
    const double h = 0.3;
    const double amp = 1 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24;
    CHECK(max_abs(rk4_step(x, lin, h) - amp * x) <= 1e-15);
}

TEST_CASE("rk4 order and reversibility on a rotation field") {
    const double omega = 1.3;
    Mat A(2, 2);
    A << 0, -omega, omega, 0;
    auto f = [&](const Vec& x) -> Vec { return A * x; };
    Vec x0(2);
    x0 << 0.6, 0.8;
    auto global_error = [&](double h) {
        Vec x = x0;
        const int n = static_cast<int>(std::llround(1.0 / h));
        for (int k = 0; k < n; ++k) x = rk4_step(x, f, h);
        return (x - planar_rotation(omega * 1.0) * x0).norm();
    };
    const double e1 = global_error(0.1);
    const double e2 = global_error(0.05);
    CHECK(std::log2(e1 / e2) >= 3.9);

    const double h = 0.05;
    const double one = (rk4_step(x0, f, h) - planar_rotation(omega * h) * x0).norm();
    CHECK(one <= 2.0 * std::pow(omega * h, 5) / 120.0);
    const Vec back = rk4_step(rk4_step(x0, f, -h), f, h);
    CHECK((back - x0).norm() <= std::pow(omega * h, 5));
}

TEST_CASE("step_count") {
    CHECK(step_count(0.01, 40.0) == 4000);
    CHECK(step_count(-0.01, -40.0) == 4000);
    CHECK(step_count(0.01, 0.0) == 0);
    CHECK_THROWS_AS(step_count(0.01, -1.0), InvalidInput);
    CHECK_THROWS_AS(step_count(0.3, 1.0), InvalidInput);
}

TEST_CASE("integrate_full records") {
    Rng rng = make_rng(9);
    const Configuration c0 = random_configuration(3, 8, rng);
    const auto A = RotationTerms::shared(random_antisymmetric(3, 0.5, rng));
    const auto spec = OrderParameterSpec::linear(WeightSpec::equal(8));
    IntegrationOptions o;
    o.h = 0.01;
    o.t_end = 0.0;
    const FullTrajectory t0 = integrate_full(c0, A, spec, o);
    REQUIRE(t0.records.size() == 1);
    CHECK(t0.records[0].positions == c0.points());
    CHECK(t0.records[0].t == 0.0);

    o.t_end = 1.05;
    o.stride = 10;
    const FullTrajectory tr = integrate_full(c0, A, spec, o);
    REQUIRE(tr.records.size() == 12);
    CHECK(tr.records[10].t == doctest::Approx(1.0));
    CHECK(tr.records.back().t == doctest::Approx(1.05));
    CHECK(tr.steps == 105);
    for (std::size_t k = 1; k < tr.records.size(); ++k) CHECK(tr.records[k].t > tr.records[k - 1].t);

    const FullTrajectory again = integrate_full(c0, A, spec, o);
    const Mat& a = tr.records.back().positions;
    const Mat& b = again.records.back().positions;
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

TEST_CASE("norm conservation without projection") {
    Rng rng = make_rng(10);
    const Configuration c0 = random_configuration(3, 100, rng);
    IntegrationOptions o;
    o.h = 0.01;
    o.t_end = 40.0;
    o.projection = false;
    o.stride = 4000;
    o.pair_metrics = false;
    const FullTrajectory tr = integrate_full(c0, RotationTerms::shared(AntisymmetricMatrix::zero(3)),
                                             OrderParameterSpec::linear(WeightSpec::equal(100)), o);
    CHECK(tr.records.back().max_norm_drift <= 1e-6);
    CHECK(std::isnan(tr.records.back().min_pair_dot));
}

TEST_CASE("large drift aborts an unprojected run") {
    Rng rng = make_rng(11);
    const Configuration c0 = random_configuration(3, 10, rng);
    IntegrationOptions o;
    o.h = 0.5;
    o.t_end = 50.0;
    o.projection = false;
    CHECK_THROWS_AS(integrate_full(c0, RotationTerms::shared(random_antisymmetric(3, 5.0, rng)),
                                   OrderParameterSpec::mean_field(20.0), o),
                    IntegrationFailure);
}

TEST_CASE("cross ratios are conserved for identical rotation terms") {
    Rng rng = make_rng(12);
    for (int d = 2; d <= 4; ++d) {
        const Configuration c0 = random_configuration(d, 6, rng);
        IntegrationOptions o;
        o.h = 1e-3;
        o.t_end = 10.0;
        o.stride = 500;
        const FullTrajectory tr = integrate_full(c0, RotationTerms::shared(random_antisymmetric(d, 1.0, rng)),
                                                 OrderParameterSpec::linear(WeightSpec::gaussian_riemann(6)), o);
        auto cr = [](const Mat& x, int i, int j, int k, int l) {
            return cross_ratio(Vec(x.col(i)), Vec(x.col(j)), Vec(x.col(k)), Vec(x.col(l)));
        };
        const double c_a = cr(c0.points(), 0, 1, 2, 3);
        const double c_b = cr(c0.points(), 2, 3, 4, 5);
        for (const auto& r : tr.records) {
            CHECK(std::abs(cr(r.positions, 0, 1, 2, 3) - c_a) <= 1e-6);
            CHECK(std::abs(cr(r.positions, 2, 3, 4, 5) - c_b) <= 1e-6);
        }
    }
}
