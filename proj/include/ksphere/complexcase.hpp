#pragma once

// Complex-hyperbolic variant for d = 2m: vectors of C^m are stored as real
// vectors of R^{2m} laid out (Re x_1, Im x_1, Re x_2, Im x_2, ...).

#include "ksphere/dynamics.hpp"
#include "ksphere/geometry.hpp"
#include "ksphere/random.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ksphere {

struct ComplexScalar {
    double re = 0.0;
    double im = 0.0;
};

class ComplexVector {
public:
    explicit ComplexVector(Vec interleaved);
    static ComplexVector from_parts(const Vec& re, const Vec& im);
    static ComplexVector zero(Eigen::Index m) { return ComplexVector(Vec::Zero(2 * m)); }

    Eigen::Index m() const { return v_.size() / 2; }
    double re(Eigen::Index k) const { return v_(2 * k); }
    double im(Eigen::Index k) const { return v_(2 * k + 1); }
    // The same vector viewed in R^{2m}.
    const Vec& real_view() const { return v_; }
    double norm() const { return v_.norm(); }

private:
    Vec v_;
};

/// Hermitian product sum_k x_k conj(y_k), linear in the first argument.
ComplexScalar hermitian(const ComplexVector& x, const ComplexVector& y);
ComplexVector scale(ComplexScalar c, const ComplexVector& x);
ComplexVector operator+(const ComplexVector& x, const ComplexVector& y);
ComplexVector operator-(const ComplexVector& x, const ComplexVector& y);

/// m x m complex matrix P + iQ with P antisymmetric and Q symmetric (to 1e-12).
class AntiHermitianMatrix {
public:
    AntiHermitianMatrix(Mat re, Mat im);
    static AntiHermitianMatrix zero(Eigen::Index m);
    static AntiHermitianMatrix random(Eigen::Index m, double scale, Rng& rng);

    Eigen::Index m() const { return re_.rows(); }
    const Mat& re() const { return re_; }
    const Mat& im() const { return im_; }
    ComplexVector apply(const ComplexVector& x) const;
    // The 2m x 2m real (antisymmetric) matrix acting on real_view().
    Mat realified() const;

private:
    Mat re_;
    Mat im_;
};

/// Complex boost
///   M_w(x) = (x - w + (<x,w> w - |w|^2 x) / (1 + sqrt(1 - |w|^2))) / (1 - <x,w>).
ComplexVector cboost_apply(const ComplexVector& w, const ComplexVector& x);

/// Ax + Z - <x, Z> x.
ComplexVector cflow_rhs(const ComplexVector& x, const AntiHermitianMatrix& A, const ComplexVector& Z);

struct ComplexFlowRecord {
    double t = 0.0;
    ComplexVector x;
    double max_norm_drift = 0.0;  // running max of | |x| - 1 |
};

/// One point under the flow with a fixed coupling vector Z. Raw RK4, no
/// projection, so the recorded drift measures the integrator.
std::vector<ComplexFlowRecord> integrate_cflow(const ComplexVector& x0, const AntiHermitianMatrix& A,
                                               const ComplexVector& Z, const IntegrationOptions& opts);

struct ComplexEnsembleRecord {
    double t = 0.0;
    Mat positions;  // 2m x N, columns in real_view layout
    double max_norm_drift = 0.0;
};

/// N particles under the complex flow with mean field Z = (K/N) sum x_j.
/// Raw RK4, no projection.
std::vector<ComplexEnsembleRecord> integrate_complex_ensemble(const Mat& x0, const AntiHermitianMatrix& A, double K,
                                                              const IntegrationOptions& opts);

struct DivergenceReport {
    double residual_rms = 0.0;  // RMS over samples of |complex field - best real-form field|
    double residual_max = 0.0;
    double field_rms = 0.0;
    Mat A_fit;
    Vec Y_fit;
    std::size_t samples = 0;
};

/// Least-squares fit of a real-form field Ax + Y - <x,Y>x (A antisymmetric,
/// Y in R^{2m}) to the complex flow field at uniformly sampled sphere points.
DivergenceReport real_complex_divergence_check(const AntiHermitianMatrix& A, const ComplexVector& Z,
                                               std::uint64_t seed, std::size_t samples = 200);
// Random anti-Hermitian A and a random unit Z.
DivergenceReport real_complex_divergence_check(Eigen::Index m, std::uint64_t seed, std::size_t samples = 200);

}  // namespace ksphere
