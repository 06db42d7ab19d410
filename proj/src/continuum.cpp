#include "ksphere/continuum.hpp"

#include "ksphere/errors.hpp"
#include "ksphere/random.hpp"
#include "ksphere/rk4.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace ksphere {

namespace {

bool nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

constexpr long long kMaxTerms = 10'000'000;

double gauss_sum_at_one(double a, double b, double c) {
    // F(a,b;c;1) = G(c) G(c-a-b) / (G(c-a) G(c-b))
    return std::tgamma(c) * std::tgamma(c - a - b) / (std::tgamma(c - a) * std::tgamma(c - b));
}

// Euler integral
//   F = G(c) / (G(b) G(c-b)) int_0^1 s^(b-1) (1-s)^(c-b-1) (1-ts)^(-a) ds,
// valid for c > b > 0 and t < 1. Used close to |t| = 1, where the series
// needs on the order of 1/(1-|t|) terms.
std::optional<double> euler_integral(double a, double b, double c, double t) {
    if (!(c > b && b > 0.0)) {
        if (!(c > a && a > 0.0)) return std::nullopt;
        std::swap(a, b);
    }
    thread_local boost::math::quadrature::tanh_sinh<double> quad;
    const double one_minus_t = 1.0 - t;
    // xc is b - x near the right endpoint; 1 - s and 1 - ts keep full precision
    // there, which matters when the integrand peaks at s = 1.
    auto f = [&](double s, double xc) {
        const double sc = s > 0.5 ? xc : 1.0 - s;
        return std::pow(s, b - 1.0) * std::pow(sc, c - b - 1.0) * std::pow(one_minus_t + t * sc, -a);
    };
    const double integral = quad.integrate(f, 0.0, 1.0, 1e-15);
    return std::exp(std::lgamma(c) - std::lgamma(b) - std::lgamma(c - b)) * integral;
}

constexpr double kSeriesRadius = 0.9;

}  // namespace

double hypergeom_F(double a, double b, double c, double t) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(t)) {
        throw InvalidInput("hypergeom_F: non-finite argument");
    }
    const bool terminates = nonpositive_integer(a) || nonpositive_integer(b);
    long long last = -1;
    if (terminates) {
        const double m = std::max(nonpositive_integer(a) ? a : -1e300, nonpositive_integer(b) ? b : -1e300);
        last = static_cast<long long>(-m);
    }
    if (nonpositive_integer(c)) {
        // (c)_k vanishes from k = 1 - c on.
        const long long pole = static_cast<long long>(-c) + 1;
        if (!terminates || last >= pole) throw InvalidInput("hypergeom_F: c is a nonpositive integer");
    }

    if (terminates) {
        double term = 1.0;
        double sum = 1.0;
        for (long long k = 0; k < last; ++k) {
            const double kk = static_cast<double>(k);
            term *= (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * t;
            sum += term;
        }
        return sum;
    }

    if (std::abs(t) > 1.0) throw InvalidInput("hypergeom_F: |t| > 1 outside the disc of convergence");
    if (std::abs(t) == 1.0 && !(c - a - b > 0.0)) {
        throw InvalidInput("hypergeom_F: series diverges at |t| = 1 (c - a - b = " + std::to_string(c - a - b) + ")");
    }
    if (t == 1.0) return gauss_sum_at_one(a, b, c);
    if (std::abs(t) > kSeriesRadius) {
        if (auto v = euler_integral(a, b, c, t)) return *v;
    }

    double term = 1.0;
    double sum = 1.0;
    for (long long k = 0; k < kMaxTerms; ++k) {
        const double kk = static_cast<double>(k);
        const double ratio = (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * t;
        term *= ratio;
        sum += term;
        // The term ratio tends to t; bound the tail by a geometric series.
        const double r = std::max(std::abs(ratio), std::abs(t));
        if (r < 1.0 && std::abs(term) * r / (1.0 - r) <= 1e-15 * std::abs(sum)) return sum;
        if (term == 0.0) return sum;
    }
    throw ConvergenceFailure("hypergeom_F: series did not converge within 10^7 terms");
}

double Z_hyp_ratio(double r2, Eigen::Index d) {
    const double dd = static_cast<double>(d);
    const double a = 1.0;
    const double b = 1.0 - dd / 2.0;
    const double c = 1.0 + dd / 2.0;
    return hypergeom_F(a, b, c, r2) / hypergeom_F(a, b, c, 1.0);
}

Vec Z_hyp(const BallPoint& z, double K) {
    if (!std::isfinite(K)) throw InvalidInput("Z_hyp: coupling must be finite");
    return K * Z_hyp_ratio(z.vec().squaredNorm(), z.dim()) * z.vec();
}

double poisson_hyp(const BallPoint& z, const SpherePoint& x) {
    if (z.dim() != x.dim()) throw InvalidInput("poisson_hyp: dimension mismatch");
    const double base = (1.0 - z.vec().squaredNorm()) / (z.vec() - x.vec()).squaredNorm();
    return std::pow(base, static_cast<double>(z.dim() - 1));
}

double poisson_euc(const BallPoint& z, const SpherePoint& x) {
    if (z.dim() != x.dim()) throw InvalidInput("poisson_euc: dimension mismatch");
    return (1.0 - z.vec().squaredNorm()) / std::pow((z.vec() - x.vec()).norm(), static_cast<double>(z.dim()));
}

Mat sample_pushforward(const BallPoint& z, const SamplingSpec& s) {
    if (s.n_samples < 1) throw InvalidInput("sample_pushforward: need at least one sample");
    Rng rng = make_rng(s.seed, s.stream);
    const Eigen::Index d = z.dim();
    const Vec minus_z = -z.vec();
    Mat out(d, static_cast<Eigen::Index>(s.n_samples));
    for (Eigen::Index k = 0; k < out.cols(); ++k) out.col(k) = boost_apply_unchecked(minus_z, random_sphere_point(d, rng));
    return out;
}

McEstimate poisson_integral_mc(const SphereFunction& f, const BallPoint& z, const SamplingSpec& s) {
    if (s.n_samples < 1) throw InvalidInput("poisson_integral_mc: need at least one sample");
    Rng rng = make_rng(s.seed, s.stream);
    const Eigen::Index d = z.dim();
    const Vec minus_z = -z.vec();
    Vec sum;
    Vec sum_sq;
    for (std::size_t k = 0; k < s.n_samples; ++k) {
        const Vec y = f(boost_apply_unchecked(minus_z, random_sphere_point(d, rng)));
        if (k == 0) {
            sum = Vec::Zero(y.size());
            sum_sq = Vec::Zero(y.size());
        }
        sum += y;
        sum_sq += y.cwiseProduct(y);
    }
    const double n = static_cast<double>(s.n_samples);
    McEstimate est;
    est.n = s.n_samples;
    est.mean = sum / n;
    if (s.n_samples > 1) {
        const Vec var = ((sum_sq - n * est.mean.cwiseProduct(est.mean)) / (n - 1.0)).cwiseMax(0.0);
        est.standard_error = (var / n).cwiseSqrt();
    } else {
        est.standard_error = Vec::Constant(est.mean.size(), std::numeric_limits<double>::infinity());
    }
    return est;
}

McEstimate poisson_integral_mc(const ScalarSphereFunction& f, const BallPoint& z, const SamplingSpec& s) {
    return poisson_integral_mc(SphereFunction([&f](const Vec& x) { return Vec::Constant(1, f(x)); }), z, s);
}

Vec continuum_z_rhs(const ContinuumState& s) {
    if (s.A.dim() != s.z.dim()) throw InvalidInput("continuum_z_rhs: dimension mismatch");
    const Vec& z = s.z.vec();
    const Vec Z = Z_hyp(s.z, s.K);
    return s.A.matrix() * z + 0.5 * (1.0 + z.squaredNorm()) * Z - Z.dot(z) * z;
}

std::vector<ContinuumRecord> integrate_continuum(const ContinuumState& s0, const IntegrationOptions& opts) {
    const long long n_steps = step_count(opts.h, opts.t_end);
    if (opts.stride < 1) throw InvalidInput("integrate_continuum: stride must be >= 1");
    auto field = [&](const Vec& z) {
        if (!(z.norm() < 1.0)) throw IntegrationFailure("integrate_continuum: z left the unit ball");
        return continuum_z_rhs(ContinuumState{BallPoint(z), s0.K, s0.A});
    };
    std::vector<ContinuumRecord> out;
    Vec z = s0.z.vec();
    out.push_back({0.0, z, Z_hyp(s0.z, s0.K)});
    for (long long k = 1; k <= n_steps; ++k) {
        z = rk4_step(z, field, opts.h);
        if (!(z.norm() < 1.0 - 1e-12)) {
            throw IntegrationFailure("integrate_continuum: boundary breach at t = " +
                                     std::to_string(static_cast<double>(k) * opts.h));
        }
        if (k % opts.stride == 0 || k == n_steps) {
            out.push_back({static_cast<double>(k) * opts.h, z, Z_hyp(BallPoint(z), s0.K)});
        }
    }
    return out;
}

}  // namespace ksphere
