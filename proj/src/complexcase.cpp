#include "ksphere/complexcase.hpp"

#include "ksphere/errors.hpp"
#include "ksphere/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksphere {

ComplexVector::ComplexVector(Vec interleaved) : v_(std::move(interleaved)) {
    if (v_.size() < 2 || v_.size() % 2 != 0) throw InvalidInput("ComplexVector: need an even, nonzero real length");
    if (!v_.allFinite()) throw InvalidInput("ComplexVector: non-finite component");
}

ComplexVector ComplexVector::from_parts(const Vec& re, const Vec& im) {
    if (re.size() != im.size()) throw InvalidInput("ComplexVector: real and imaginary parts differ in length");
    Vec v(2 * re.size());
    for (Eigen::Index k = 0; k < re.size(); ++k) {
        v(2 * k) = re(k);
        v(2 * k + 1) = im(k);
    }
    return ComplexVector(std::move(v));
}

ComplexScalar hermitian(const ComplexVector& x, const ComplexVector& y) {
    if (x.m() != y.m()) throw InvalidInput("hermitian: dimension mismatch");
    ComplexScalar s;
    for (Eigen::Index k = 0; k < x.m(); ++k) {
        // x_k * conj(y_k)
        s.re += x.re(k) * y.re(k) + x.im(k) * y.im(k);
        s.im += x.im(k) * y.re(k) - x.re(k) * y.im(k);
    }
    return s;
}

ComplexVector scale(ComplexScalar c, const ComplexVector& x) {
    Vec v(x.real_view().size());
    for (Eigen::Index k = 0; k < x.m(); ++k) {
        v(2 * k) = c.re * x.re(k) - c.im * x.im(k);
        v(2 * k + 1) = c.re * x.im(k) + c.im * x.re(k);
    }
    return ComplexVector(std::move(v));
}

ComplexVector operator+(const ComplexVector& x, const ComplexVector& y) {
    if (x.m() != y.m()) throw InvalidInput("ComplexVector: dimension mismatch");
    return ComplexVector(x.real_view() + y.real_view());
}

ComplexVector operator-(const ComplexVector& x, const ComplexVector& y) {
    if (x.m() != y.m()) throw InvalidInput("ComplexVector: dimension mismatch");
    return ComplexVector(x.real_view() - y.real_view());
}

AntiHermitianMatrix::AntiHermitianMatrix(Mat re, Mat im) : re_(std::move(re)), im_(std::move(im)) {
    if (re_.rows() != re_.cols() || im_.rows() != im_.cols() || re_.rows() != im_.rows() || re_.rows() < 1) {
        throw InvalidInput("AntiHermitianMatrix: parts must be square and of equal size");
    }
    if (!re_.allFinite() || !im_.allFinite()) throw InvalidInput("AntiHermitianMatrix: non-finite entry");
    // A^H = -A  <=>  re^T = -re and im^T = im
    const double err = std::max((re_ + re_.transpose()).cwiseAbs().maxCoeff(),
                                (im_ - im_.transpose()).cwiseAbs().maxCoeff());
    if (err > 1e-12) throw InvalidInput("AntiHermitianMatrix: conjugate transpose is not the negation");
}

AntiHermitianMatrix AntiHermitianMatrix::zero(Eigen::Index m) { return {Mat::Zero(m, m), Mat::Zero(m, m)}; }

AntiHermitianMatrix AntiHermitianMatrix::random(Eigen::Index m, double scale, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat re = Mat::Zero(m, m);
    Mat im = Mat::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        im(i, i) = scale * normal(rng);
        for (Eigen::Index j = i + 1; j < m; ++j) {
            re(i, j) = scale * normal(rng);
            re(j, i) = -re(i, j);
            im(i, j) = scale * normal(rng);
            im(j, i) = im(i, j);
        }
    }
    return {std::move(re), std::move(im)};
}

Mat AntiHermitianMatrix::realified() const {
    const Eigen::Index m = re_.rows();
    Mat r(2 * m, 2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            // (P + iQ)(a + ib) = (Pa - Qb) + i(Qa + Pb)
            r(2 * i, 2 * j) = re_(i, j);
            r(2 * i, 2 * j + 1) = -im_(i, j);
            r(2 * i + 1, 2 * j) = im_(i, j);
            r(2 * i + 1, 2 * j + 1) = re_(i, j);
        }
    }
    return r;
}

ComplexVector AntiHermitianMatrix::apply(const ComplexVector& x) const {
    if (x.m() != m()) throw InvalidInput("AntiHermitianMatrix::apply: dimension mismatch");
    return ComplexVector(realified() * x.real_view());
}

ComplexVector cboost_apply(const ComplexVector& w, const ComplexVector& x) {
    if (w.m() != x.m()) throw InvalidInput("cboost_apply: dimension mismatch");
    const double w2 = w.real_view().squaredNorm();
    if (!(w2 < 1.0)) throw InvalidInput("cboost_apply: |w| >= 1");
    if (x.norm() > 1.0 + kSphereTol) throw InvalidInput("cboost_apply: point lies outside the closed unit ball");
    const ComplexScalar xw = hermitian(x, w);
    const ComplexScalar den{1.0 - xw.re, -xw.im};
    const double den2 = den.re * den.re + den.im * den.im;
    if (!(std::sqrt(den2) >= 1e-300)) throw InvalidInput("cboost_apply: degenerate denominator");
    const double s = 1.0 + std::sqrt(1.0 - w2);
    const ComplexVector correction = scale(ComplexScalar{1.0 / s, 0.0},
                                           scale(xw, w) - scale(ComplexScalar{w2, 0.0}, x));
    const ComplexVector num = x - w + correction;
    // Divide by den: multiply by conj(den) / |den|^2.
    return scale(ComplexScalar{den.re / den2, -den.im / den2}, num);
}

ComplexVector cflow_rhs(const ComplexVector& x, const AntiHermitianMatrix& A, const ComplexVector& Z) {
    if (x.m() != A.m() || Z.m() != x.m()) throw InvalidInput("cflow_rhs: dimension mismatch");
    if (std::abs(x.norm() - 1.0) > kSphereTol) throw InvalidInput("cflow_rhs: x must lie on the unit sphere");
    const ComplexScalar xz = hermitian(x, Z);
    return A.apply(x) + Z - scale(xz, x);
}

namespace {

// Field of the ensemble in the flat real layout, without the sphere check so
// RK4 stages can be evaluated slightly off the sphere.
Mat ensemble_field(const Mat& x, const Mat& A_real, double K) {
    const Eigen::Index n = x.cols();
    const Vec Zr = (K / static_cast<double>(n)) * x.rowwise().sum();
    const ComplexVector Z(Zr);
    Mat v = A_real * x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const ComplexVector xi{Vec(x.col(i))};
        v.col(i) += Zr - scale(hermitian(xi, Z), xi).real_view();
    }
    return v;
}

}  // namespace

std::vector<ComplexFlowRecord> integrate_cflow(const ComplexVector& x0, const AntiHermitianMatrix& A,
                                               const ComplexVector& Z, const IntegrationOptions& opts) {
    if (x0.m() != A.m() || Z.m() != A.m()) throw InvalidInput("integrate_cflow: dimension mismatch");
    if (std::abs(x0.norm() - 1.0) > kSphereTol) throw InvalidInput("integrate_cflow: x0 must lie on the unit sphere");
    const long long n_steps = step_count(opts.h, opts.t_end);
    if (opts.stride < 1) throw InvalidInput("integrate_cflow: stride must be >= 1");
    const Mat a = A.realified();
    const Vec& z = Z.real_view();
    auto field = [&](const Vec& x) -> Vec {
        const ComplexVector xc(x);
        return a * x + z - scale(hermitian(xc, Z), xc).real_view();
    };
    std::vector<ComplexFlowRecord> out;
    Vec x = x0.real_view();
    double drift = std::abs(x.norm() - 1.0);
    out.push_back({0.0, x0, drift});
    for (long long k = 1; k <= n_steps; ++k) {
        x = rk4_step(x, field, opts.h);
        drift = std::max(drift, std::abs(x.norm() - 1.0));
        if (k % opts.stride == 0 || k == n_steps) out.push_back({static_cast<double>(k) * opts.h, ComplexVector(x), drift});
    }
    return out;
}

std::vector<ComplexEnsembleRecord> integrate_complex_ensemble(const Mat& x0, const AntiHermitianMatrix& A, double K,
                                                              const IntegrationOptions& opts) {
    if (x0.rows() != 2 * A.m()) throw InvalidInput("integrate_complex_ensemble: dimension mismatch");
    (void)Configuration(x0);
    const long long n_steps = step_count(opts.h, opts.t_end);
    if (opts.stride < 1) throw InvalidInput("integrate_complex_ensemble: stride must be >= 1");
    const Mat a = A.realified();
    const Eigen::Index rows = x0.rows();
    const Eigen::Index n = x0.cols();
    auto field = [&](const Vec& flat) -> Vec {
        const Mat v = ensemble_field(Eigen::Map<const Mat>(flat.data(), rows, n), a, K);
        return Eigen::Map<const Vec>(v.data(), v.size());
    };
    std::vector<ComplexEnsembleRecord> out;
    Vec state = Eigen::Map<const Vec>(x0.data(), x0.size());
    double drift = max_norm_drift(x0);
    out.push_back({0.0, x0, drift});
    for (long long k = 1; k <= n_steps; ++k) {
        state = rk4_step(state, field, opts.h);
        const Eigen::Map<const Mat> x(state.data(), rows, n);
        drift = std::max(drift, max_norm_drift(x));
        if (k % opts.stride == 0 || k == n_steps) out.push_back({static_cast<double>(k) * opts.h, Mat(x), drift});
    }
    return out;
}

DivergenceReport real_complex_divergence_check(const AntiHermitianMatrix& A, const ComplexVector& Z,
                                               std::uint64_t seed, std::size_t samples) {
    if (Z.m() != A.m()) throw InvalidInput("real_complex_divergence_check: dimension mismatch");
    if (samples < 1) throw InvalidInput("real_complex_divergence_check: need at least one sample");
    const Eigen::Index d = 2 * A.m();
    const Eigen::Index n_upper = d * (d - 1) / 2;
    const Eigen::Index n_params = n_upper + d;
    const Eigen::Index n_rows = static_cast<Eigen::Index>(samples) * d;

    Rng rng = make_rng(seed, 0x6469766572ull);
    Mat design = Mat::Zero(n_rows, n_params);
    Vec target(n_rows);
    for (std::size_t s = 0; s < samples; ++s) {
        const Vec x = random_sphere_point(d, rng);
        const Eigen::Index row0 = static_cast<Eigen::Index>(s) * d;
        target.segment(row0, d) = cflow_rhs(ComplexVector(x), A, Z).real_view();
        // (Ax)_r = sum_{i<j} A_ij (delta_ri x_j - delta_rj x_i)
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = i + 1; j < d; ++j) {
                design(row0 + i, k) += x(j);
                design(row0 + j, k) -= x(i);
                ++k;
            }
        }
        // (Y - <x,Y> x)_r = sum_c Y_c (delta_rc - x_c x_r)
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) design(row0 + r, n_upper + c) = (r == c ? 1.0 : 0.0) - x(c) * x(r);
    }

    const Vec params = design.colPivHouseholderQr().solve(target);
    const Vec resid = design * params - target;

    DivergenceReport rep;
    rep.samples = samples;
    double sum_sq = 0.0;
    double field_sq = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Eigen::Index row0 = static_cast<Eigen::Index>(s) * d;
        const double e2 = resid.segment(row0, d).squaredNorm();
        sum_sq += e2;
        field_sq += target.segment(row0, d).squaredNorm();
        rep.residual_max = std::max(rep.residual_max, std::sqrt(e2));
    }
    rep.residual_rms = std::sqrt(sum_sq / static_cast<double>(samples));
    rep.field_rms = std::sqrt(field_sq / static_cast<double>(samples));
    rep.A_fit = AntisymmetricMatrix(d, params.head(n_upper)).matrix();
    rep.Y_fit = params.tail(d);
    return rep;
}

DivergenceReport real_complex_divergence_check(Eigen::Index m, std::uint64_t seed, std::size_t samples) {
    if (m < 1) throw InvalidInput("real_complex_divergence_check: m must be >= 1");
    Rng rng = make_rng(seed, 0x7a);
    const AntiHermitianMatrix A = AntiHermitianMatrix::random(m, 1.0, rng);
    const ComplexVector Z(random_sphere_point(2 * m, rng));
    return real_complex_divergence_check(A, Z, seed, samples);
}

}  // namespace ksphere
