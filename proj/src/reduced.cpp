#include "ksphere/reduced.hpp"

#include "ksphere/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksphere {

Vec alpha_apply(const Vec& y1, const Vec& y2, const Vec& y) {
    if (y1.size() != y.size() || y2.size() != y.size()) throw InvalidInput("alpha_apply: dimension mismatch");
    return y1.dot(y) * y2 - y2.dot(y) * y1;
}

Mat alpha_matrix(const Vec& y1, const Vec& y2) { return y2 * y1.transpose() - y1 * y2.transpose(); }

// ---------------------------------------------------------------------------

namespace {

bool same_line(const Vec& a, const Vec& b) {
    return (a - b).norm() <= kDistinctTol || (a + b).norm() <= kDistinctTol;
}

void check_general_position(const Mat& p) {
    const Eigen::Index n = p.cols();
    if (n < 3) throw InvalidInput("base points: need at least 3 points in general position, got " + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if ((p.col(i) - p.col(j)).norm() <= kDistinctTol) {
                throw InvalidInput("base points: points " + std::to_string(i) + " and " + std::to_string(j) +
                                   " coincide");
            }
        }
    }
    // Look for three points spanning three distinct lines through the origin.
    std::vector<Eigen::Index> lines{0};
    for (Eigen::Index i = 1; i < n && lines.size() < 3; ++i) {
        const bool fresh = std::none_of(lines.begin(), lines.end(),
                                        [&](Eigen::Index j) { return same_line(p.col(i), p.col(j)); });
        if (fresh) lines.push_back(i);
    }
    if (lines.size() < 3) {
        throw InvalidInput("base points: all points lie on at most two antipodal pairs (not in general position)");
    }
}

Mat boost_columns(const Vec& w, const Mat& points) {
    Mat out(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.cols(); ++i) out.col(i) = boost_apply_unchecked(w, points.col(i));
    return out;
}

Mat reconstruct_wzeta(const Vec& w, const Mat& zeta, const Mat& p) { return zeta * boost_columns(w, p); }

Mat reconstruct_zzeta(const Vec& z, const Mat& zeta, const Mat& p) { return boost_columns(-z, zeta * p); }

void guard_radius(const Vec& v, const char* who) {
    if (!(v.norm() < kBoundaryGuard)) {
        throw IntegrationFailure(std::string(who) + ": |w| = " + std::to_string(v.norm()) +
                                 " breaches the boundary guard 1 - 1e-12");
    }
}

ReducedRate wzeta_rate(const Vec& w, const Mat& zeta, const Mat& p, const Mat& A, const OrderParameterSpec& spec) {
    guard_radius(w, "wzeta_rhs");
    const Vec Z = order_parameter(reconstruct_wzeta(w, zeta, p), spec);
    ReducedRate r;
    r.boost_dot = -0.5 * (1.0 - w.squaredNorm()) * (zeta.transpose() * Z);
    r.zeta_dot = (A - alpha_matrix(zeta * w, Z)) * zeta;
    return r;
}

ReducedRate zzeta_rate(const Vec& z, const Mat& zeta, const Mat& p, const Mat& A, const OrderParameterSpec& spec) {
    guard_radius(z, "zzeta_rhs");
    const Vec Z = order_parameter(reconstruct_zzeta(z, zeta, p), spec);
    ReducedRate r;
    r.boost_dot = A * z + 0.5 * (1.0 + z.squaredNorm()) * Z - Z.dot(z) * z;
    r.zeta_dot = (A + alpha_matrix(z, Z)) * zeta;
    return r;
}

Vec w_field(const Vec& w, const Mat& p, const Vec& a) {
    Vec sum = Vec::Zero(w.size());
    for (Eigen::Index i = 0; i < p.cols(); ++i) sum += a(i) * boost_apply_unchecked(w, p.col(i));
    return -0.5 * (1.0 - w.squaredNorm()) * sum;
}

}  // namespace

BasePoints::BasePoints(Configuration c) : config_(std::move(c)) { check_general_position(config_.points()); }

BasePtr make_base(Configuration c) { return std::make_shared<const BasePoints>(std::move(c)); }

ReducedStateWZeta initial_state(const Configuration& x0) {
    return {BallPoint::origin(x0.dim()), Rotation::identity(x0.dim()), make_base(x0)};
}

ReducedRate wzeta_rhs(const ReducedStateWZeta& s, const AntisymmetricMatrix& A, const OrderParameterSpec& spec) {
    if (A.dim() != s.w.dim() || s.base->dim() != s.w.dim()) throw InvalidInput("wzeta_rhs: dimension mismatch");
    return wzeta_rate(s.w.vec(), s.zeta.matrix(), s.base->points(), A.matrix(), spec);
}

ReducedRate zzeta_rhs(const ReducedStateZZeta& s, const AntisymmetricMatrix& A, const OrderParameterSpec& spec) {
    if (A.dim() != s.z.dim() || s.base->dim() != s.z.dim()) throw InvalidInput("zzeta_rhs: dimension mismatch");
    return zzeta_rate(s.z.vec(), s.zeta.matrix(), s.base->points(), A.matrix(), spec);
}

Vec w_rhs(const BallPoint& w, const Configuration& base, const WeightSpec& weights) {
    if (base.dim() != w.dim()) throw InvalidInput("w_rhs: dimension mismatch");
    if (weights.count() != base.count()) throw InvalidInput("w_rhs: weight count does not match base points");
    return w_field(w.vec(), base.points(), weights.weights());
}

Vec w_rhs(const BallPoint& w, const Configuration& base, const OrderParameterSpec& spec) {
    if (base.dim() != w.dim()) throw InvalidInput("w_rhs: dimension mismatch");
    return w_field(w.vec(), base.points(), spec.coefficients(base.count()));
}

Mat boost_points(const Vec& w, const Mat& points) {
    if (w.size() != points.rows()) throw InvalidInput("boost_points: dimension mismatch");
    (void)BallPoint(w);
    return boost_columns(w, points);
}

Configuration reconstruct(const ReducedStateWZeta& s) {
    return Configuration(reconstruct_wzeta(s.w.vec(), s.zeta.matrix(), s.base->points()));
}

Configuration reconstruct(const ReducedStateZZeta& s) {
    return Configuration(reconstruct_zzeta(s.z.vec(), s.zeta.matrix(), s.base->points()));
}

ReducedStateZZeta to_zzeta(const ReducedStateWZeta& s) {
    return {BallPoint(-(s.zeta.matrix() * s.w.vec())), s.zeta, s.base};
}

ReducedStateWZeta to_wzeta(const ReducedStateZZeta& s) {
    return {BallPoint(-(s.zeta.matrix().transpose() * s.z.vec())), s.zeta, s.base};
}

// ---------------------------------------------------------------------------

namespace {

enum class Coordinates { WZeta, ZZeta };

long long integrate_group(Coordinates coords, const Vec& b0, const Mat& zeta0, const BasePtr& base,
                          const AntisymmetricMatrix& A, const OrderParameterSpec& spec, const IntegrationOptions& opts,
                          const ReducedRecordSink& sink) {
    const long long n_steps = step_count(opts.h, opts.t_end);
    if (opts.stride < 1) throw InvalidInput("integrate_reduced: stride must be >= 1");
    const Eigen::Index d = b0.size();
    if (A.dim() != d || base->dim() != d) throw InvalidInput("integrate_reduced: dimension mismatch");
    (void)spec.coefficients(base->count());
    const Mat a = A.matrix();
    const Mat& p = base->points();

    auto rate = [&](const Vec& b, const Mat& zeta) {
        return coords == Coordinates::WZeta ? wzeta_rate(b, zeta, p, a, spec) : zzeta_rate(b, zeta, p, a, spec);
    };
    auto positions = [&](const Vec& b, const Mat& zeta) {
        return coords == Coordinates::WZeta ? reconstruct_wzeta(b, zeta, p) : reconstruct_zzeta(b, zeta, p);
    };
    auto field = [&](const Vec& flat) -> Vec {
        const Vec b = flat.head(d);
        const Eigen::Map<const Mat> zeta(flat.data() + d, d, d);
        const ReducedRate r = rate(b, Mat(zeta));
        Vec out(d + d * d);
        out.head(d) = r.boost_dot;
        out.tail(d * d) = Eigen::Map<const Vec>(r.zeta_dot.data(), d * d);
        return out;
    };
    auto emit = [&](double t, const Vec& b, const Mat& zeta, double orth) {
        ReducedRecord r;
        r.t = t;
        r.boost = b;
        r.zeta = zeta;
        r.positions = positions(b, zeta);
        const Vec Z = order_parameter(r.positions, spec);
        r.znorm = Z.norm();
        r.min_pair_dot = opts.pair_metrics ? min_pair_dot(r.positions) : std::nan("");
        r.max_orth_residual = orth;
        sink(r);
    };

    Vec state(d + d * d);
    state.head(d) = b0;
    state.tail(d * d) = Eigen::Map<const Vec>(zeta0.data(), d * d);
    double max_orth = 0.0;
    emit(0.0, b0, zeta0, max_orth);

    for (long long k = 1; k <= n_steps; ++k) {
        const Vec last = state;
        const double t_last = static_cast<double>(k - 1) * opts.h;
        auto breach = [&](const std::string& why) {
            const Mat last_zeta = Eigen::Map<const Mat>(last.data() + d, d, d);
            return BoundaryBreach(why, t_last, last.head(d), last_zeta);
        };
        try {
            state = rk4_step(state, field, opts.h);
        } catch (const BoundaryBreach&) {
            throw;
        } catch (const IntegrationFailure& e) {
            throw breach(std::string("integrate_reduced: ") + e.what());
        }
        if (!(state.head(d).norm() < kBoundaryGuard)) {
            throw breach("integrate_reduced: boundary breach at t = " + std::to_string(static_cast<double>(k) * opts.h));
        }
        Eigen::Map<Mat> zeta(state.data() + d, d, d);
        max_orth = std::max(max_orth, orthogonality_residual(zeta));
        zeta = polar_project(zeta);
        if (k % opts.stride == 0 || k == n_steps) emit(static_cast<double>(k) * opts.h, state.head(d), zeta, max_orth);
    }
    return n_steps;
}

}  // namespace

long long integrate_reduced(const ReducedStateWZeta& s0, const AntisymmetricMatrix& A, const OrderParameterSpec& spec,
                            const IntegrationOptions& opts, const ReducedRecordSink& sink) {
    return integrate_group(Coordinates::WZeta, s0.w.vec(), s0.zeta.matrix(), s0.base, A, spec, opts, sink);
}

ReducedTrajectory integrate_reduced(const ReducedStateWZeta& s0, const AntisymmetricMatrix& A,
                                    const OrderParameterSpec& spec, const IntegrationOptions& opts) {
    ReducedTrajectory traj;
    traj.steps = integrate_reduced(s0, A, spec, opts, [&](const ReducedRecord& r) { traj.records.push_back(r); });
    return traj;
}

long long integrate_reduced_zzeta(const ReducedStateZZeta& s0, const AntisymmetricMatrix& A,
                                  const OrderParameterSpec& spec, const IntegrationOptions& opts,
                                  const ReducedRecordSink& sink) {
    return integrate_group(Coordinates::ZZeta, s0.z.vec(), s0.zeta.matrix(), s0.base, A, spec, opts, sink);
}

WFlowTrajectory integrate_w(const BallPoint& w0, const Configuration& base, const WeightSpec& weights,
                            const WFlowOptions& opts) {
    const auto& io = opts.integration;
    const long long n_steps = step_count(io.h, io.t_end);
    if (io.stride < 1) throw InvalidInput("integrate_w: stride must be >= 1");
    if (weights.count() != base.count()) throw InvalidInput("integrate_w: weight count does not match base points");
    if (base.dim() != w0.dim()) throw InvalidInput("integrate_w: dimension mismatch");
    if (!(opts.stop_radius > 0.0 && opts.stop_radius <= kBoundaryGuard)) {
        throw InvalidInput("integrate_w: stop radius must lie in (0, 1 - 1e-12]");
    }
    const Mat& p = base.points();
    const Vec& a = weights.weights();
    auto field = [&](const Vec& w) { return w_field(w, p, a); };

    WFlowTrajectory traj;
    auto emit = [&](double t, const Vec& w) {
        WFlowRecord r;
        r.t = t;
        r.w = w;
        const Mat x = boost_columns(w, p);
        r.Z = x * a;
        r.min_pair_dot = io.pair_metrics ? min_pair_dot(x) : std::nan("");
        traj.records.push_back(std::move(r));
    };

    Vec w = w0.vec();
    double t_emitted = 0.0;
    emit(0.0, w);
    for (long long k = 1; k <= n_steps; ++k) {
        Vec next = rk4_step(w, field, io.h);
        const double t = static_cast<double>(k) * io.h;
        traj.steps = k;
        if (!(next.norm() < opts.stop_radius)) {
            // Keep the last interior state when the step overshoots the guard.
            double t_stop = t - io.h;
            if (next.norm() < kBoundaryGuard) {
                w = std::move(next);
                t_stop = t;
            }
            if (t_stop != t_emitted) emit(t_stop, w);
            traj.stop = WFlowStop::Radius;
            return traj;
        }
        w = std::move(next);
        const bool stationary = opts.stationary_tol > 0.0 && field(w).norm() < opts.stationary_tol;
        if (stationary || k % io.stride == 0 || k == n_steps) {
            emit(t, w);
            t_emitted = t;
        }
        if (stationary) {
            traj.stop = WFlowStop::Stationary;
            return traj;
        }
    }
    traj.steps = n_steps;
    traj.stop = WFlowStop::Horizon;
    return traj;
}

BallPoint basepoint_change(const BallPoint& w, const MobiusMap& M) {
    if (M.dim() != w.dim()) throw InvalidInput("basepoint_change: dimension mismatch");
    return BallPoint(mobius_apply(M, w.vec()));
}

ReducedStateWZeta change_base(const ReducedStateWZeta& s, const MobiusMap& M) {
    const Mat& p = s.base->points();
    Mat p_new(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.cols(); ++i) p_new.col(i) = mobius_apply(M, p.col(i));
    // Renormalize the image points; boosts keep the sphere only to rounding.
    p_new.colwise().normalize();
    BasePtr base_new = make_base(Configuration(std::move(p_new)));
    BallPoint w_new = basepoint_change(s.w, M);

    const Mat target = reconstruct_wzeta(s.w.vec(), s.zeta.matrix(), p);
    const Mat source = boost_columns(w_new.vec(), base_new->points());
    const Mat h = target * source.transpose();
    return {std::move(w_new), Rotation::project(h), std::move(base_new)};
}

}  // namespace ksphere
