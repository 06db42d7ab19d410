#pragma once

// Generators and independent reference formulas shared by the unit tests.

#include "ksphere/geometry.hpp"
#include "ksphere/random.hpp"

#include <cmath>
#include <complex>

namespace ktest {

using ksphere::Mat;
using ksphere::Vec;

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline ksphere::BallPoint random_ball(Eigen::Index d, double r, ksphere::Rng& rng) {
    return ksphere::BallPoint(ksphere::random_ball_point(d, r, rng));
}

inline ksphere::MobiusMap random_map(Eigen::Index d, double r, ksphere::Rng& rng) {
    ksphere::Rotation z = ksphere::random_rotation(d, rng);
    return ksphere::MobiusMap::left(z, random_ball(d, r, rng));
}

// (1 - |a|^2)(x - a) - |x - a|^2 a over 1 - 2<a,x> + |a|^2 |x|^2.
inline Vec boost_ahlfors(const Vec& a, const Vec& x) {
    const double den = 1.0 - 2.0 * a.dot(x) + a.squaredNorm() * x.squaredNorm();
    return ((1.0 - a.squaredNorm()) * (x - a) - (x - a).squaredNorm() * a) / den;
}

// One-variable Möbius map (x - w) / (1 - conj(w) x).
inline std::complex<double> boost_complex(std::complex<double> w, std::complex<double> x) {
    return (x - w) / (1.0 - std::conj(w) * x);
}

inline Vec to_vec(std::complex<double> z) {
    Vec v(2);
    v << z.real(), z.imag();
    return v;
}

inline std::complex<double> to_complex(const Vec& v) { return {v(0), v(1)}; }

}  // namespace ktest
