#include "ksphere/geometry.hpp"

#include "ksphere/errors.hpp"

#include <cmath>
#include <string>

namespace ksphere {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                           " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

SpherePoint::SpherePoint(Vec v) : v_(std::move(v)) {
    if (v_.size() < 2) throw InvalidInput("SpherePoint: dimension must be >= 2");
    if (!all_finite(v_)) throw InvalidInput("SpherePoint: non-finite component");
    if (std::abs(v_.norm() - 1.0) > kSphereTol) {
        throw InvalidInput("SpherePoint: |v| = " + std::to_string(v_.norm()) + " is not 1");
    }
}

BallPoint::BallPoint(Vec v) : v_(std::move(v)) {
    if (v_.size() < 2) throw InvalidInput("BallPoint: dimension must be >= 2");
    if (!all_finite(v_)) throw InvalidInput("BallPoint: non-finite component");
    if (!(v_.squaredNorm() < 1.0)) {
        throw InvalidInput("BallPoint: |v| = " + std::to_string(v_.norm()) +
                           " is outside the open unit ball");
    }
}

double orthogonality_residual(const Mat& m) {
    const Mat r = m.transpose() * m - Mat::Identity(m.cols(), m.cols());
    return r.cwiseAbs().maxCoeff();
}

Mat polar_project(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat u = svd.matrixU();
    const Mat& v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) {
        // Flip the direction belonging to the smallest singular value.
        u.col(u.cols() - 1) *= -1.0;
    }
    return u * v.transpose();
}

Rotation::Rotation(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 2) throw InvalidInput("Rotation: matrix must be square, d >= 2");
    if (!m_.allFinite()) throw InvalidInput("Rotation: non-finite entry");
    const double res = orthogonality_residual(m_);
    if (res > kRotationTol) {
        throw InvalidInput("Rotation: orthogonality residual " + std::to_string(res) + " exceeds 1e-10");
    }
    if (std::abs(m_.determinant() - 1.0) > kRotationTol) {
        throw InvalidInput("Rotation: determinant is not +1");
    }
}

Rotation Rotation::project(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() < 2) throw InvalidInput("Rotation::project: matrix must be square, d >= 2");
    if (!m.allFinite()) throw InvalidInput("Rotation::project: non-finite entry");
    return Rotation(polar_project(m), Unchecked{});
}

Rotation Rotation::transpose() const { return Rotation(m_.transpose(), Unchecked{}); }

AntisymmetricMatrix::AntisymmetricMatrix(Eigen::Index d, Vec upper) : d_(d), upper_(std::move(upper)) {
    if (d_ < 2) throw InvalidInput("AntisymmetricMatrix: dimension must be >= 2");
    if (upper_.size() != d_ * (d_ - 1) / 2) {
        throw InvalidInput("AntisymmetricMatrix: expected " + std::to_string(d_ * (d_ - 1) / 2) +
                           " upper-triangle entries");
    }
    if (!upper_.allFinite()) throw InvalidInput("AntisymmetricMatrix: non-finite entry");
}

AntisymmetricMatrix AntisymmetricMatrix::zero(Eigen::Index d) {
    return AntisymmetricMatrix(d, Vec::Zero(d * (d - 1) / 2));
}

AntisymmetricMatrix AntisymmetricMatrix::from_matrix(const Mat& m) {
    if (m.rows() != m.cols()) throw InvalidInput("AntisymmetricMatrix: matrix must be square");
    if (m != -m.transpose()) throw InvalidInput("AntisymmetricMatrix: matrix is not antisymmetric");
    const Eigen::Index d = m.rows();
    Vec upper(d * (d - 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) upper(k++) = m(i, j);
    return AntisymmetricMatrix(d, std::move(upper));
}

Mat AntisymmetricMatrix::matrix() const {
    Mat m = Mat::Zero(d_, d_);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d_; ++i) {
        for (Eigen::Index j = i + 1; j < d_; ++j) {
            m(i, j) = upper_(k);
            m(j, i) = -upper_(k);
            ++k;
        }
    }
    return m;
}

MobiusMap::MobiusMap(Rotation rotation, BallPoint boost, MobiusForm form)
    : rotation_(std::move(rotation)), boost_(std::move(boost)), form_(form) {
    require_same_dim(rotation_.dim(), boost_.dim(), "MobiusMap");
}

MobiusMap MobiusMap::identity(Eigen::Index d) { return left(Rotation::identity(d), BallPoint::origin(d)); }

MobiusMap MobiusMap::pure_boost(const BallPoint& w) { return left(Rotation::identity(w.dim()), w); }

Vec boost_apply_unchecked(const Vec& w, const Vec& x) {
    const double w2 = w.squaredNorm();
    const double x2 = x.squaredNorm();
    const double wx = w.dot(x);
    const double den = 1.0 - 2.0 * wx + w2 * x2;
    if (!(den >= 1e-300)) {
        throw InvalidInput("boost_apply: degenerate denominator " + std::to_string(den));
    }
    return ((1.0 - w2) * x - (1.0 - 2.0 * wx + x2) * w) / den;
}

Vec boost_apply(const BallPoint& w, const Vec& x) {
    require_same_dim(w.dim(), x.size(), "boost_apply");
    if (!x.allFinite()) throw InvalidInput("boost_apply: non-finite point");
    if (x.norm() > 1.0 + kSphereTol) throw InvalidInput("boost_apply: point lies outside the closed unit ball");
    return boost_apply_unchecked(w.vec(), x);
}

Vec mobius_apply(const MobiusMap& g, const Vec& x) {
    if (g.form() == MobiusForm::Left) return g.rotation().matrix() * boost_apply(g.boost(), x);
    const Vec rotated = g.rotation().matrix() * x;
    return boost_apply(BallPoint(-g.boost().vec()), rotated);
}

MobiusMap convert_form(const MobiusMap& g) {
    const Mat& r = g.rotation().matrix();
    if (g.form() == MobiusForm::Left) return MobiusMap::right(g.rotation(), BallPoint(-(r * g.boost().vec())));
    return MobiusMap::left(g.rotation(), BallPoint(-(r.transpose() * g.boost().vec())));
}

MobiusMap to_left(const MobiusMap& g) { return g.form() == MobiusForm::Left ? g : convert_form(g); }

MobiusMap mobius_inverse(const MobiusMap& g) {
    const MobiusMap l = to_left(g);
    // (zeta M_w)^{-1} = M_{-w} zeta^T = zeta^T M_{-zeta w}
    return MobiusMap::left(l.rotation().transpose(), BallPoint(-(l.rotation().matrix() * l.boost().vec())));
}

MobiusMap mobius_compose(const MobiusMap& g1, const MobiusMap& g2) {
    require_same_dim(g1.dim(), g2.dim(), "mobius_compose");
    const Eigen::Index d = g1.dim();
    const MobiusMap g1_inv = mobius_inverse(g1);
    const MobiusMap g2_inv = mobius_inverse(g2);
    const BallPoint w(mobius_apply(g2_inv, mobius_apply(g1_inv, Vec::Zero(d))));
    const BallPoint minus_w(-w.vec());

    Mat zeta(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const Vec e = Vec::Unit(d, j);
        zeta.col(j) = mobius_apply(g1, mobius_apply(g2, boost_apply(minus_w, e)));
    }
    const double res = orthogonality_residual(zeta);
    if (res > 1e-8 || std::abs(zeta.determinant() - 1.0) > 1e-8) {
        throw InvalidInput("mobius_compose: recovered rotation degraded (residual " + std::to_string(res) + ")");
    }
    if (res > kRotationTol) return MobiusMap::left(Rotation::project(zeta), w);
    return MobiusMap::left(Rotation(std::move(zeta)), w);
}

double hyperbolic_distance(const BallPoint& x, const BallPoint& y) {
    require_same_dim(x.dim(), y.dim(), "hyperbolic_distance");
    // arcosh(1 + 2s^2) == 2 asinh(s); the asinh form keeps precision near x == y.
    const double s2 = (x.vec() - y.vec()).squaredNorm() /
                      ((1.0 - x.vec().squaredNorm()) * (1.0 - y.vec().squaredNorm()));
    return 2.0 * std::asinh(std::sqrt(s2));
}

double cross_ratio(const Vec& a, const Vec& b, const Vec& c, const Vec& e) {
    require_same_dim(a.size(), b.size(), "cross_ratio");
    require_same_dim(a.size(), c.size(), "cross_ratio");
    require_same_dim(a.size(), e.size(), "cross_ratio");
    const Vec* pts[4] = {&a, &b, &c, &e};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if ((*pts[i] - *pts[j]).norm() <= kDistinctTol) throw InvalidInput("cross_ratio: coincident points");
    return ((a - c).norm() * (b - e).norm()) / ((a - e).norm() * (b - c).norm());
}

double cross_ratio(const SpherePoint& a, const SpherePoint& b, const SpherePoint& c, const SpherePoint& e) {
    return cross_ratio(a.vec(), b.vec(), c.vec(), e.vec());
}

Vec infinitesimal_generator(const AntisymmetricMatrix& A, const Vec& Z, const Vec& y) {
    require_same_dim(A.dim(), y.size(), "infinitesimal_generator");
    require_same_dim(Z.size(), y.size(), "infinitesimal_generator");
    return A.matrix() * y - Z.dot(y) * y + 0.5 * (1.0 + y.squaredNorm()) * Z;
}

}  // namespace ksphere
