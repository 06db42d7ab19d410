#include "support.hpp"

#include "ksphere/complexcase.hpp"
#include "ksphere/errors.hpp"

#include <doctest.h>

#include <complex>
#include <cstdint>
#include <vector>

using namespace ksphere;
using namespace ktest;

namespace {

using cd = std::complex<double>;

std::vector<cd> as_complex(const ComplexVector& v) {
    std::vector<cd> out;
    for (Eigen::Index k = 0; k < v.m(); ++k) out.emplace_back(v.re(k), v.im(k));
    return out;
}

ComplexVector random_cvec(Eigen::Index m, double r, Rng& rng) { return ComplexVector(random_ball_point(2 * m, r, rng)); }
ComplexVector random_csphere(Eigen::Index m, Rng& rng) { return ComplexVector(random_sphere_point(2 * m, rng)); }

double cdist(const ComplexVector& a, const ComplexVector& b) { return max_abs(a.real_view() - b.real_view()); }

}  // namespace

TEST_CASE("complex vectors and the Hermitian product") {
    CHECK_THROWS_AS(ComplexVector(Vec::Zero(3)), InvalidInput);
    Vec re(2), im(2);
    re << 1.0, 2.0;
    im << -0.5, 3.0;
    const ComplexVector v = ComplexVector::from_parts(re, im);
    CHECK(v.m() == 2);
    CHECK(v.real_view()(1) == -0.5);
    CHECK(v.im(1) == 3.0);

    Rng rng = make_rng(1);
    for (int k = 0; k < 50; ++k) {
        const ComplexVector x = random_cvec(3, 1.0, rng);
        const ComplexVector y = random_cvec(3, 1.0, rng);
        cd want = 0.0;
        const auto xs = as_complex(x), ys = as_complex(y);
        for (int j = 0; j < 3; ++j) want += xs[j] * std::conj(ys[j]);
        const ComplexScalar got = hermitian(x, y);
        CHECK(std::abs(cd(got.re, got.im) - want) <= 1e-15);
        const ComplexScalar c{0.3, -1.2};
        const auto sx = as_complex(scale(c, x));
        for (int j = 0; j < 3; ++j) CHECK(std::abs(sx[j] - cd(0.3, -1.2) * xs[j]) <= 1e-15);
    }
}

TEST_CASE("anti-Hermitian matrices") {
    Mat re = Mat::Zero(2, 2), im = Mat::Zero(2, 2);
    re(0, 1) = 1.0;
    CHECK_THROWS_AS(AntiHermitianMatrix(re, im), InvalidInput);
    re(1, 0) = -1.0;
    im(0, 1) = 0.5;
    CHECK_THROWS_AS(AntiHermitianMatrix(re, im), InvalidInput);
    im(1, 0) = 0.5;
    CHECK_NOTHROW(AntiHermitianMatrix(re, im));

    Rng rng = make_rng(2);
    for (int k = 0; k < 20; ++k) {
        const AntiHermitianMatrix A = AntiHermitianMatrix::random(3, 1.0, rng);
        const Mat R = A.realified();
        CHECK(max_abs(R + R.transpose()) == 0.0);
        const ComplexVector x = random_cvec(3, 1.0, rng);
        const auto xs = as_complex(x);
        const auto ax = as_complex(A.apply(x));
        for (int i = 0; i < 3; ++i) {
            cd want = 0.0;
            for (int j = 0; j < 3; ++j) want += cd(A.re()(i, j), A.im()(i, j)) * xs[j];
            CHECK(std::abs(ax[i] - want) <= 1e-14);
        }
    }
}

TEST_CASE("complex boost examples") {
    Rng rng = make_rng(3);
    const ComplexVector x = random_csphere(2, rng);
    CHECK(cdist(cboost_apply(ComplexVector::zero(2), x), x) == 0.0);
    const ComplexVector w = random_cvec(2, 0.9, rng);
    CHECK(cdist(cboost_apply(w, w), ComplexVector::zero(2)) <= 1e-15);

    Vec w1(2), x1(2), want(2);
    w1 << 0.5, 0.0;
    x1 << 0.0, 1.0;
    want << -0.8, 0.6;
    CHECK(max_abs(cboost_apply(ComplexVector(w1), ComplexVector(x1)).real_view() - want) <= 1e-15);
    CHECK_THROWS_AS(cboost_apply(ComplexVector(Vec::Unit(4, 0)), x), InvalidInput);
}

TEST_CASE("complex boost identities") {
    Rng rng = make_rng(4);
    for (int k = 0; k < 200; ++k) {
        const Eigen::Index m = 1 + k % 3;
        const ComplexVector w = random_cvec(m, 0.95, rng);
        const ComplexVector x = random_csphere(m, rng);
        const ComplexVector y = cboost_apply(w, x);
        CHECK(std::abs(y.norm() - 1.0) <= 1e-12);
        CHECK(cdist(cboost_apply(scale({-1.0, 0.0}, w), y), x) <= 1e-12);
        CHECK(cdist(cboost_apply(w, ComplexVector::zero(m)), scale({-1.0, 0.0}, w)) <= 1e-15);
        if (m == 1) {
            const cd wc(w.re(0), w.im(0)), xc(x.re(0), x.im(0));
            CHECK(std::abs(cd(y.re(0), y.im(0)) - boost_complex(wc, xc)) <= 1e-14);
        }
    }
}

TEST_CASE("derivative of the complex boost family") {
    // d/dt M_{tw}(x) at t = 0 equals <x,w> x - w, the flow field with Z = -w.
    Rng rng = make_rng(5);
    for (int k = 0; k < 30; ++k) {
        const Eigen::Index m = 1 + k % 3;
        const ComplexVector w = random_cvec(m, 1.0, rng);
        const ComplexVector x = random_csphere(m, rng);
        const double h = 1e-5;
        const Vec fd = (cboost_apply(scale({h, 0.0}, w), x).real_view() - cboost_apply(scale({-h, 0.0}, w), x).real_view()) / (2 * h);
        const ComplexVector gen = cflow_rhs(x, AntiHermitianMatrix::zero(m), scale({-1.0, 0.0}, w));
        CHECK(max_abs(fd - gen.real_view()) <= 1e-8);
        CHECK(max_abs(fd - (scale(hermitian(x, w), x) - w).real_view()) <= 1e-8);
    }
}

TEST_CASE("complex flow field") {
    Rng rng = make_rng(6);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Index m = 1 + k % 3;
        const AntiHermitianMatrix A = AntiHermitianMatrix::random(m, 1.0, rng);
        const ComplexVector x = random_csphere(m, rng);
        const ComplexVector a0 = cflow_rhs(x, A, ComplexVector::zero(m));
        CHECK(cdist(a0, A.apply(x)) == 0.0);
        CHECK(std::abs(hermitian(a0, x).re) <= 1e-14);
        const ComplexVector v = cflow_rhs(x, A, random_cvec(m, 2.0, rng));
        CHECK(std::abs(hermitian(v, x).re) <= 1e-14);
    }
    CHECK_THROWS_AS(cflow_rhs(ComplexVector(Vec::Constant(2, 0.5)), AntiHermitianMatrix::zero(1), ComplexVector::zero(1)),
                    InvalidInput);
}

TEST_CASE("single complex flow stays on the sphere") {
    // Unit-order field: |A| about 0.25, |Z| = 0.5.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_rng(seed, 7);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(seed % 3);
        const AntiHermitianMatrix A = AntiHermitianMatrix::random(m, 0.25, rng);
        const ComplexVector Z(0.5 * random_sphere_point(2 * m, rng));
        IntegrationOptions o;
        o.h = 0.01;
        o.t_end = 10.0;
        o.stride = 100;
        const auto recs = integrate_cflow(random_csphere(m, rng), A, Z, o);
        REQUIRE(recs.size() == 11);
        CHECK(recs.back().t == doctest::Approx(10.0));
        CHECK(recs.back().max_norm_drift <= 1e-9);
    }
}

TEST_CASE("complex ensemble keeps unit norms") {
    Rng rng = make_rng(7);
    const AntiHermitianMatrix A = AntiHermitianMatrix::random(2, 0.25, rng);
    const Mat x0 = random_sphere_points(4, 20, rng);
    IntegrationOptions o;
    o.h = 0.01;
    o.t_end = 10.0;
    o.stride = 100;
    const auto recs = integrate_complex_ensemble(x0, A, 1.0, o);
    REQUIRE(recs.size() == 11);
    CHECK(recs.back().max_norm_drift <= 1e-8);
    CHECK(recs.back().t == doctest::Approx(10.0));
}

TEST_CASE("m = 1 matches the real planar system") {
    // For m = 1 the real coupling Y corresponds to the complex coupling Y / 2.
    // The two fields agree only on the circle, so RK4 stages that leave it
    // separate the runs at O(h^4); h = 1e-3 keeps that below 1e-13.
    Rng rng = make_rng(8);
    const double theta = 0.9;
    Mat re = Mat::Zero(1, 1), im = Mat::Constant(1, 1, theta);
    const AntiHermitianMatrix A(re, im);
    Vec up(1);
    up << -theta;
    const Mat x0 = random_sphere_points(2, 15, rng);
    IntegrationOptions o;
    o.h = 1e-3;
    o.t_end = 10.0;
    o.stride = 500;
    o.projection = false;
    const double K = 1.3;
    const auto cx = integrate_complex_ensemble(x0, A, K / 2, o);
    const FullTrajectory rx = integrate_full(Configuration(x0), RotationTerms::shared(AntisymmetricMatrix(2, up)),
                                             OrderParameterSpec::mean_field(K), o);
    REQUIRE(cx.size() == rx.records.size());
    for (std::size_t k = 0; k < cx.size(); ++k) CHECK(max_abs(cx[k].positions - rx.records[k].positions) <= 1e-10);
    CHECK(max_abs(A.realified() - AntisymmetricMatrix(2, up).matrix()) == 0.0);
}

TEST_CASE("real and complex flows diverge only for m >= 2 with Z != 0") {
    Rng rng = make_rng(9);
    const AntiHermitianMatrix A2 = AntiHermitianMatrix::random(2, 1.0, rng);
    const DivergenceReport z0 = real_complex_divergence_check(A2, ComplexVector::zero(2), 1);
    CHECK(z0.residual_rms <= 1e-12);
    CHECK(z0.residual_max <= 1e-12);
    CHECK(max_abs(z0.A_fit - A2.realified()) <= 1e-10);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DivergenceReport one = real_complex_divergence_check(1, seed);
        CHECK(one.residual_rms <= 1e-12);
        const DivergenceReport two = real_complex_divergence_check(2, seed);
        CHECK(two.residual_rms > 1e-6);
        CHECK(two.samples == 200);
        CHECK(two.field_rms > 0.0);
    }
    const DivergenceReport three = real_complex_divergence_check(3, 7);
    CHECK(three.residual_rms > 1e-6);
}
