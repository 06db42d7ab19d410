#pragma once

// Continuum limit on the orbit of the uniform measure: hyperbolic Poisson
// measures parametrized by z in B^d, their centroid Z(z) and the z flow.

#include "ksphere/dynamics.hpp"
#include "ksphere/geometry.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ksphere {

/// Gauss hypergeometric series F(a, b; c; t) for |t| <= 1.
///
/// Terminating series (a or b a nonpositive integer) are summed exactly for
/// any t. Otherwise the series is summed until the geometric tail bound drops
/// below 1e-15 of the partial sum; at t = 1 Gauss's summation theorem is used
/// once the convergence condition c - a - b > 0 has been checked. For
/// 0.9 < |t| < 1 the Euler integral is used instead when c > b > 0 (or
/// c > a > 0), since the series needs about 1/(1 - |t|) terms there.
/// Throws InvalidInput for |t| > 1, c a pole or a divergent t = 1 series, and
/// ConvergenceFailure if the series has not settled after 10^7 terms.
double hypergeom_F(double a, double b, double c, double t);

/// K F(1, 1-d/2; 1+d/2; |z|^2) / F(1, 1-d/2; 1+d/2; 1) z; equals K z for d = 2.
Vec Z_hyp(const BallPoint& z, double K);

// Radial factor F(.., |z|^2) / F(.., 1) of Z_hyp.
double Z_hyp_ratio(double r2, Eigen::Index d);

/// ((1 - |z|^2) / |z - x|^2)^(d-1).
double poisson_hyp(const BallPoint& z, const SpherePoint& x);
/// (1 - |z|^2) / |z - x|^d.
double poisson_euc(const BallPoint& z, const SpherePoint& x);

struct SamplingSpec {
    std::size_t n_samples = 100000;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

struct McEstimate {
    Vec mean;
    Vec standard_error;
    std::size_t n = 0;
};

using SphereFunction = std::function<Vec(const Vec&)>;
using ScalarSphereFunction = std::function<double(const Vec&)>;

/// (1/n) sum f(M_{-z}(x_k)) over uniform x_k: the integral of f against the
/// pushforward of the uniform measure, with per-component standard errors.
McEstimate poisson_integral_mc(const SphereFunction& f, const BallPoint& z, const SamplingSpec& s);
McEstimate poisson_integral_mc(const ScalarSphereFunction& f, const BallPoint& z, const SamplingSpec& s);

/// Columns M_{-z}(x_k) for uniform x_k.
Mat sample_pushforward(const BallPoint& z, const SamplingSpec& s);

struct ContinuumState {
    BallPoint z;
    double K = 1.0;
    AntisymmetricMatrix A;
};

/// Az + (1 + |z|^2) Z(z) / 2 - <Z(z), z> z with Z = Z_hyp.
Vec continuum_z_rhs(const ContinuumState& s);

struct ContinuumRecord {
    double t = 0.0;
    Vec z;
    Vec Z;
};

std::vector<ContinuumRecord> integrate_continuum(const ContinuumState& s0, const IntegrationOptions& opts);

}  // namespace ksphere
