#pragma once

// Möbius group of the unit ball B^d: boosts, rotations, their composition and
// the Poincaré-ball metric.

#include <Eigen/Dense>

namespace ksphere {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kSphereTol = 1e-12;
inline constexpr double kRotationTol = 1e-10;
inline constexpr double kDistinctTol = 1e-10;

/// Unit vector in R^d, d >= 2.
class SpherePoint {
public:
    explicit SpherePoint(Vec v);

    const Vec& vec() const { return v_; }
    Eigen::Index dim() const { return v_.size(); }

private:
    Vec v_;
};

/// Point of the open unit ball. Points with |v| >= 1 are rejected, never clamped.
class BallPoint {
public:
    explicit BallPoint(Vec v);
    static BallPoint origin(Eigen::Index d) { return BallPoint(Vec::Zero(d)); }

    const Vec& vec() const { return v_; }
    Eigen::Index dim() const { return v_.size(); }
    double norm() const { return v_.norm(); }

private:
    Vec v_;
};

/// Element of SO(d).
class Rotation {
public:
    explicit Rotation(Mat m);
    static Rotation identity(Eigen::Index d) { return Rotation(Mat::Identity(d, d)); }
    // Nearest rotation (polar factor) of a nearly orthogonal matrix.
    static Rotation project(const Mat& m);

    const Mat& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    Rotation transpose() const;

private:
    struct Unchecked {};
    Rotation(Mat m, Unchecked) : m_(std::move(m)) {}

    Mat m_;
};

/// Real antisymmetric d x d matrix, stored as its strictly upper triangle
/// in row-major order: (0,1), (0,2), ..., (0,d-1), (1,2), ...
class AntisymmetricMatrix {
public:
    AntisymmetricMatrix(Eigen::Index d, Vec upper);
    static AntisymmetricMatrix zero(Eigen::Index d);
    // Requires m^T == -m exactly.
    static AntisymmetricMatrix from_matrix(const Mat& m);

    Eigen::Index dim() const { return d_; }
    const Vec& upper() const { return upper_; }
    Mat matrix() const;

private:
    Eigen::Index d_;
    Vec upper_;
};

enum class MobiusForm { Left, Right };

/// Orientation-preserving isometry of B^d.
///   Left:  x -> rotation * M_boost(x)
///   Right: x -> M_{-boost}(rotation * x)
class MobiusMap {
public:
    MobiusMap(Rotation rotation, BallPoint boost, MobiusForm form);
    static MobiusMap left(Rotation zeta, BallPoint w) { return {std::move(zeta), std::move(w), MobiusForm::Left}; }
    static MobiusMap right(Rotation xi, BallPoint z) { return {std::move(xi), std::move(z), MobiusForm::Right}; }
    static MobiusMap identity(Eigen::Index d);
    static MobiusMap pure_boost(const BallPoint& w);

    const Rotation& rotation() const { return rotation_; }
    const BallPoint& boost() const { return boost_; }
    MobiusForm form() const { return form_; }
    Eigen::Index dim() const { return boost_.dim(); }

private:
    Rotation rotation_;
    BallPoint boost_;
    MobiusForm form_;
};

// Max-abs entry of m^T m - I.
double orthogonality_residual(const Mat& m);
// Nearest orthogonal matrix with det +1 in Frobenius norm.
Mat polar_project(const Mat& m);

/// Boost M_w(x) by the general ball formula
///   ((1-|w|^2) x - (1 - 2<w,x> + |x|^2) w) / (1 - 2<w,x> + |w|^2 |x|^2).
/// Works for |x| <= 1; sphere points map to sphere points.
Vec boost_apply(const BallPoint& w, const Vec& x);

// Same formula without argument validation; used on hot paths whose inputs
// are already known to be valid.
Vec boost_apply_unchecked(const Vec& w, const Vec& x);

Vec mobius_apply(const MobiusMap& g, const Vec& x);

// Left(zeta, w) <-> Right(zeta, -zeta w).
MobiusMap convert_form(const MobiusMap& g);
MobiusMap to_left(const MobiusMap& g);

// Left-form inverse: (zeta^T, -zeta w).
MobiusMap mobius_inverse(const MobiusMap& g);

/// Left-form parameters of g1 o g2, recovered from the action:
/// w = g2^{-1}(g1^{-1}(0)) and column j of zeta = (g1 o g2)(M_{-w}(e_j)).
MobiusMap mobius_compose(const MobiusMap& g1, const MobiusMap& g2);

// Curvature -1 Poincaré-ball distance.
double hyperbolic_distance(const BallPoint& x, const BallPoint& y);

/// |a-c||b-e| / (|a-e||b-c|). Rejects quadruples with two points closer than 1e-10.
double cross_ratio(const SpherePoint& a, const SpherePoint& b, const SpherePoint& c,
                   const SpherePoint& e);
double cross_ratio(const Vec& a, const Vec& b, const Vec& c, const Vec& e);

/// Ay - <Z,y> y + (1 + |y|^2) Z / 2.
Vec infinitesimal_generator(const AntisymmetricMatrix& A, const Vec& Z, const Vec& y);

}  // namespace ksphere
