#include "ksphere/gradient.hpp"

#include "ksphere/errors.hpp"
#include "ksphere/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ksphere {

PotentialContext::PotentialContext(Configuration base, WeightSpec weights)
    : base_(std::move(base)), weights_(std::move(weights)) {
    if (weights_.count() != base_.count()) throw InvalidInput("PotentialContext: weight count does not match base points");
    if (base_.count() < 3) throw InvalidInput("PotentialContext: need N >= 3 base points");
    weights_.require_normalized();
    const Mat& p = base_.points();
    for (Eigen::Index i = 0; i < p.cols(); ++i)
        for (Eigen::Index j = i + 1; j < p.cols(); ++j)
            if ((p.col(i) - p.col(j)).norm() <= kDistinctTol) {
                throw InvalidInput("PotentialContext: base points " + std::to_string(i) + " and " +
                                   std::to_string(j) + " coincide");
            }
}

bool PotentialContext::theorem_hypotheses_hold() const {
    const Vec& a = weights_.weights();
    return (a.array() > 0.0).all() && (a.array() < 0.5).all();
}

void PotentialContext::require_theorem_hypotheses() const {
    const Vec& a = weights_.weights();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (!(a(i) > 0.0 && a(i) < 0.5)) {
            throw InvalidInput("PotentialContext: weight a_" + std::to_string(i) + " = " + std::to_string(a(i)) +
                               " violates 0 < a_i < 1/2");
        }
    }
}

Eigen::Index PotentialContext::dominant_index() const {
    Eigen::Index idx = 0;
    weights_.weights().maxCoeff(&idx);
    return idx;
}

namespace {

void require_dim(const PotentialContext& ctx, Eigen::Index d, const char* who) {
    if (ctx.dim() != d) throw InvalidInput(std::string(who) + ": dimension mismatch");
}

void require_away_from_base(const Vec& w, const PotentialContext& ctx, const char* who) {
    const Mat& p = ctx.base().points();
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
        if ((w - p.col(i)).norm() <= 1e-12) {
            throw InvalidInput(std::string(who) + ": w coincides with base point " + std::to_string(i));
        }
    }
}

Vec weighted_boost_sum(const Vec& w, const Mat& p, const Vec& a) {
    Vec s = Vec::Zero(w.size());
    for (Eigen::Index i = 0; i < p.cols(); ++i) s += a(i) * boost_apply_unchecked(w, p.col(i));
    return s;
}

}  // namespace

double potential_phi(const BallPoint& w, const PotentialContext& ctx) {
    require_dim(ctx, w.dim(), "potential_phi");
    require_away_from_base(w.vec(), ctx, "potential_phi");
    const Mat& p = ctx.base().points();
    const Vec& a = ctx.weights().weights();
    const double one_minus = 1.0 - w.vec().squaredNorm();
    double phi = 0.0;
    for (Eigen::Index i = 0; i < p.cols(); ++i) phi += a(i) * std::log(one_minus / (w.vec() - p.col(i)).squaredNorm());
    return phi;
}

double potential_phi_poisson(const BallPoint& w, const PotentialContext& ctx) {
    require_dim(ctx, w.dim(), "potential_phi_poisson");
    require_away_from_base(w.vec(), ctx, "potential_phi_poisson");
    const Mat& p = ctx.base().points();
    const Vec& a = ctx.weights().weights();
    const double one_minus = 1.0 - w.vec().squaredNorm();
    const double exponent = static_cast<double>(ctx.dim() - 1);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
        const double kernel = std::pow(one_minus / (w.vec() - p.col(i)).squaredNorm(), exponent);
        sum += a(i) * std::log(kernel);
    }
    return sum / exponent;
}

Vec euclid_grad_phi(const BallPoint& w, const PotentialContext& ctx) {
    require_dim(ctx, w.dim(), "euclid_grad_phi");
    require_away_from_base(w.vec(), ctx, "euclid_grad_phi");
    const Vec s = weighted_boost_sum(w.vec(), ctx.base().points(), ctx.weights().weights());
    return (2.0 / (1.0 - w.vec().squaredNorm())) * s;
}

Vec hyp_grad(const Vec& euclidean_gradient, const BallPoint& w) {
    if (euclidean_gradient.size() != w.dim()) throw InvalidInput("hyp_grad: dimension mismatch");
    const double f = 1.0 - w.vec().squaredNorm();
    return 0.25 * f * f * euclidean_gradient;
}

Mat linearization_T(const Configuration& base, const WeightSpec& weights) {
    if (weights.count() != base.count()) throw InvalidInput("linearization_T: weight count does not match base points");
    const Mat& p = base.points();
    const Vec& a = weights.weights();
    const Vec Z = p * a;
    if (Z.norm() > 1e-8) {
        throw InvalidInput("linearization_T: base is not centred, |Z(p)| = " + std::to_string(Z.norm()));
    }
    const Mat T = p * a.asDiagonal() * p.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> eig(T);
    const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (norm >= 1.0 - 1e-12) {
        throw InvalidInput("linearization_T: ||T|| = 1; base points lie on a single antipodal pair");
    }
    return T;
}

LinearizationReport find_fixed_point(const PotentialContext& ctx, const FixedPointOptions& opts) {
    if (opts.check_hypotheses) ctx.require_theorem_hypotheses();
    const Eigen::Index d = ctx.dim();
    const Mat& p = ctx.base().points();
    const Vec& a = ctx.weights().weights();
    const BallPoint w0 = opts.w0.value_or(BallPoint::origin(d));
    if (w0.dim() != d) throw InvalidInput("find_fixed_point: dimension mismatch");

    WFlowOptions flow;
    flow.integration.h = -std::abs(opts.h);
    flow.integration.t_end = -std::abs(opts.h) * std::ceil(opts.max_time / std::abs(opts.h));
    flow.integration.stride = std::numeric_limits<long long>::max();
    flow.integration.pair_metrics = false;
    flow.stationary_tol = opts.stationary_tol;
    const WFlowTrajectory traj = integrate_w(w0, ctx.base(), ctx.weights(), flow);
    if (traj.stop == WFlowStop::Radius) {
        throw ConvergenceFailure("find_fixed_point: backward flow reached the boundary (weight hypothesis violated?)");
    }
    if (traj.stop != WFlowStop::Stationary) {
        throw ConvergenceFailure("find_fixed_point: backward flow not stationary after t = " +
                                 std::to_string(opts.max_time));
    }

    Vec w = traj.records.back().w;
    Vec F = weighted_boost_sum(w, p, a);
    int iterations = 0;
    constexpr double fd_step = 1e-7;
    while (iterations < opts.max_newton && F.norm() > 1e-15) {
        Mat J(d, d);
        for (Eigen::Index k = 0; k < d; ++k) {
            const Vec e = fd_step * Vec::Unit(d, k);
            J.col(k) = (weighted_boost_sum(w + e, p, a) - weighted_boost_sum(w - e, p, a)) / (2.0 * fd_step);
        }
        const Vec candidate = w - J.fullPivLu().solve(F);
        if (!(candidate.norm() < 1.0)) break;
        const Vec F_candidate = weighted_boost_sum(candidate, p, a);
        ++iterations;
        if (!(F_candidate.norm() < F.norm())) break;
        w = candidate;
        F = F_candidate;
    }
    if (!(F.norm() <= opts.residual_tol)) {
        throw ConvergenceFailure("find_fixed_point: residual |Z(M_w(p))| = " + std::to_string(F.norm()) +
                                 " above tolerance");
    }

    LinearizationReport rep{BallPoint(w), Mat(), Vec(), Vec(), 0.0, F.norm(), traj.steps, iterations};
    Mat recentred(d, p.cols());
    for (Eigen::Index i = 0; i < p.cols(); ++i) recentred.col(i) = boost_apply_unchecked(w, p.col(i));
    recentred.colwise().normalize();
    rep.T = linearization_T(Configuration(std::move(recentred)), ctx.weights());
    Eigen::SelfAdjointEigenSolver<Mat> eig(rep.T);
    rep.mu = eig.eigenvalues();
    rep.lambda = Vec::Ones(d) - rep.mu;
    rep.T_norm = rep.mu.cwiseAbs().maxCoeff();
    return rep;
}

// ---------------------------------------------------------------------------
// Scaled and semi-scaled fields

Vec scaled_rhs(const Vec& w, const PotentialContext& ctx) {
    require_dim(ctx, w.size(), "scaled_rhs");
    require_away_from_base(w, ctx, "scaled_rhs");
    const Mat& p = ctx.base().points();
    const Vec& a = ctx.weights().weights();
    const double one_minus = 1.0 - w.squaredNorm();
    Vec out = w;
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
        const Vec diff = p.col(i) - w;
        out -= a(i) * one_minus / diff.squaredNorm() * diff;
    }
    return out;
}

double polar_epsilon(const PotentialContext& ctx, Eigen::Index anchor) {
    const Mat& p = ctx.base().points();
    if (anchor < 0 || anchor >= p.cols()) throw InvalidInput("polar_epsilon: anchor index out of range");
    double eps = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < p.cols(); ++j)
        if (j != anchor) eps = std::min(eps, (p.col(j) - p.col(anchor)).norm());
    return eps;
}

PolarRate semiscaled_polar_rhs(const PolarState& s, const PotentialContext& ctx) {
    require_dim(ctx, s.u.size(), "semiscaled_polar_rhs");
    const double eps = polar_epsilon(ctx, s.anchor);
    if (!(std::abs(s.r) < eps)) {
        throw InvalidInput("semiscaled_polar_rhs: |r| = " + std::to_string(std::abs(s.r)) + " must be below epsilon " +
                           std::to_string(eps));
    }
    if (std::abs(s.u.norm() - 1.0) > 1e-12) throw InvalidInput("semiscaled_polar_rhs: u must be a unit vector");

    const Mat& p = ctx.base().points();
    const Vec& a = ctx.weights().weights();
    const Vec anchor = p.col(s.anchor);
    const Vec w = anchor - s.r * s.u;
    const double one_minus = 1.0 - w.squaredNorm();

    Vec S = w - a(s.anchor) * (2.0 * anchor.dot(s.u) - s.r) * s.u;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        if (j == s.anchor) continue;
        const Vec diff = p.col(j) - w;
        S -= a(j) * one_minus / diff.squaredNorm() * diff;
    }
    const double us = s.u.dot(S);
    PolarRate rate;
    rate.r_dot = -s.r * us;
    rate.u_dot = us * s.u - S;
    rate.u_dot -= rate.u_dot.dot(s.u) * s.u;
    return rate;
}

Mat semiscaled_jacobian_at_anchor(const PotentialContext& ctx, Eigen::Index anchor, double step) {
    const Eigen::Index d = ctx.dim();
    const Vec p = ctx.base().point(anchor);
    // Orthonormal basis of the tangent space at p: the last d-1 columns of a
    // Householder QR of p.
    const Mat pm = p;
    Eigen::HouseholderQR<Mat> qr(pm);
    const Mat q = qr.householderQ();
    const Mat E = q.rightCols(d - 1);

    auto chart_field = [&](double r, const Vec& s) {
        Vec u = p + E * s;
        u.normalize();
        const PolarRate rate = semiscaled_polar_rhs(PolarState{r, u, anchor}, ctx);
        Vec out(d);
        out(0) = rate.r_dot;
        out.tail(d - 1) = E.transpose() * rate.u_dot;
        return out;
    };

    Mat J(d, d);
    const Vec s0 = Vec::Zero(d - 1);
    J.col(0) = (chart_field(step, s0) - chart_field(-step, s0)) / (2.0 * step);
    for (Eigen::Index k = 0; k < d - 1; ++k) {
        const Vec e = step * Vec::Unit(d - 1, k);
        J.col(k + 1) = (chart_field(0.0, e) - chart_field(0.0, -e)) / (2.0 * step);
    }
    return J;
}

// ---------------------------------------------------------------------------
// Limit classification

std::string to_string(LimitKind k) {
    switch (k) {
        case LimitKind::ForwardSync: return "ForwardSync";
        case LimitKind::BackwardIncoherent: return "BackwardIncoherent";
        case LimitKind::MajorityClusterAntipodal: return "MajorityClusterAntipodal";
        case LimitKind::Unclassified: return "Unclassified";
    }
    return "Unclassified";
}

namespace {

constexpr double kSyncRadius = 1.0 - 1e-3;
constexpr double kSyncDot = 0.999;
constexpr double kIncoherentZ = 1e-4;
constexpr double kAntipodalDot = -0.999;
constexpr double kFlowStopRadius = 1.0 - 1e-9;

LimitClass terminal_metrics(const PotentialContext& ctx, const WFlowTrajectory& traj) {
    const WFlowRecord& last = traj.records.back();
    LimitClass c;
    c.t_reached = last.t;
    c.w_terminal = last.w;
    c.w_norm = last.w.norm();
    const Mat x = boost_points(last.w, ctx.base().points());
    c.znorm = (x * ctx.weights().weights()).norm();
    c.min_pair_dot = min_pair_dot(x);
    c.dominant_index = ctx.dominant_index();
    double dom = 1.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (j != c.dominant_index) dom = std::min(dom, x.col(c.dominant_index).dot(x.col(j)));
    c.dominant_min_dot = dom;
    const Vec centroid = x.rowwise().mean();
    c.limit_point = centroid.norm() > 0.0 ? Vec(centroid / centroid.norm()) : centroid;
    return c;
}

WFlowTrajectory run_flow(const PotentialContext& ctx, const BallPoint& w0, double h, double horizon) {
    WFlowOptions flow;
    flow.integration.h = h;
    flow.integration.t_end = h * std::round(horizon / std::abs(h));
    flow.integration.stride = std::numeric_limits<long long>::max();
    flow.integration.pair_metrics = false;
    flow.stop_radius = kFlowStopRadius;
    return integrate_w(w0, ctx.base(), ctx.weights(), flow);
}

}  // namespace

LimitClassification classify_limits(const PotentialContext& ctx, const ClassifyOptions& opts) {
    const Eigen::Index d = ctx.dim();
    BallPoint w0 = BallPoint::origin(d);
    if (opts.seed) {
        Rng rng = make_rng(*opts.seed, 0x636c61737369ull);
        w0 = BallPoint(random_ball_point(d, 0.5, rng));
    }
    const double h = std::abs(opts.h);

    LimitClassification out;
    out.forward = terminal_metrics(ctx, run_flow(ctx, w0, h, opts.forward_horizon));
    if (out.forward.w_norm >= kSyncRadius && out.forward.min_pair_dot >= kSyncDot) {
        out.forward.kind = LimitKind::ForwardSync;
    }

    out.backward = terminal_metrics(ctx, run_flow(ctx, w0, -h, opts.backward_horizon));
    const bool majority = ctx.weights().weights()(ctx.dominant_index()) > 0.5;
    if (out.backward.znorm <= kIncoherentZ) {
        out.backward.kind = LimitKind::BackwardIncoherent;
    } else if (majority && out.backward.dominant_min_dot <= kAntipodalDot) {
        out.backward.kind = LimitKind::MajorityClusterAntipodal;
    }
    return out;
}

}  // namespace ksphere
