#include "ksphere/dynamics.hpp"

#include "ksphere/errors.hpp"
#include "ksphere/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ksphere {

long long step_count(double h, double t_end) {
    if (t_end == 0.0) return 0;
    if (!std::isfinite(h) || !std::isfinite(t_end) || h == 0.0) {
        throw InvalidInput("step size must be finite and nonzero when t_end != 0");
    }
    if (t_end * h < 0.0) throw InvalidInput("t_end and h must have the same sign");
    const double ratio = t_end / h;
    const long long n = std::llround(ratio);
    if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, std::abs(ratio))) {
        throw InvalidInput("t_end is not an integer multiple of h");
    }
    return n;
}

Configuration::Configuration(Mat points, double tol) : points_(std::move(points)) {
    if (points_.rows() < 2) throw InvalidInput("Configuration: dimension must be >= 2");
    if (points_.cols() < 1) throw InvalidInput("Configuration: needs at least one point");
    if (!points_.allFinite()) throw InvalidInput("Configuration: non-finite coordinate");
    for (Eigen::Index i = 0; i < points_.cols(); ++i) {
        if (std::abs(points_.col(i).norm() - 1.0) > tol) {
            throw InvalidInput("Configuration: point " + std::to_string(i) + " is off the unit sphere");
        }
    }
}

Configuration Configuration::from_points(std::span<const SpherePoint> points) {
    if (points.empty()) throw InvalidInput("Configuration: needs at least one point");
    Mat m(points.front().dim(), static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].dim() != m.rows()) throw InvalidInput("Configuration: mixed dimensions");
        m.col(static_cast<Eigen::Index>(i)) = points[i].vec();
    }
    return Configuration(std::move(m));
}

Configuration random_configuration(Eigen::Index d, Eigen::Index n, Rng& rng) {
    return Configuration(random_sphere_points(d, n, rng));
}

// ---------------------------------------------------------------------------
// Weights

WeightSpec::WeightSpec(Vec w, WeightMode mode) : weights_(std::move(w)), mode_(mode) {
    if (weights_.size() < 1) throw InvalidInput("WeightSpec: empty weight vector");
    if (!weights_.allFinite()) throw InvalidInput("WeightSpec: non-finite weight");
}

WeightSpec WeightSpec::equal(Eigen::Index n) {
    if (n < 1) throw InvalidInput("WeightSpec::equal: n must be >= 1");
    return WeightSpec(Vec::Constant(n, 1.0 / static_cast<double>(n)), WeightMode::Equal);
}

WeightSpec WeightSpec::explicit_weights(Vec weights) {
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights(i) < 0.0) throw InvalidInput("WeightSpec: weight " + std::to_string(i) + " is negative");
    }
    return WeightSpec(std::move(weights), WeightMode::Explicit);
}

WeightSpec WeightSpec::gaussian_riemann(Eigen::Index n) {
    if (n < 1) throw InvalidInput("WeightSpec::gaussian_riemann: n must be >= 1");
    const double width = 6.0 / static_cast<double>(n);
    Vec w(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double mid = -3.0 + (static_cast<double>(k) + 0.5) * width;
        w(k) = std::exp(-0.5 * mid * mid) / std::sqrt(2.0 * std::numbers::pi) * width;
    }
    w /= w.sum();
    return WeightSpec(std::move(w), WeightMode::GaussianRiemann);
}

WeightSpec WeightSpec::majority(Eigen::Index n, double dominant) {
    if (n < 2) throw InvalidInput("WeightSpec::majority: n must be >= 2");
    if (!(dominant > 0.0 && dominant < 1.0)) throw InvalidInput("WeightSpec::majority: dominant weight must lie in (0, 1)");
    Vec w = Vec::Constant(n, (1.0 - dominant) / static_cast<double>(n - 1));
    w(0) = dominant;
    return WeightSpec(std::move(w), WeightMode::Majority);
}

bool WeightSpec::is_normalized() const { return std::abs(sum() - 1.0) <= 1e-12; }

void WeightSpec::require_normalized() const {
    if (!is_normalized()) {
        throw InvalidInput("WeightSpec: weights sum to " + std::to_string(sum()) + ", expected 1");
    }
}

// ---------------------------------------------------------------------------
// Rotation terms and order parameter

RotationTerms::RotationTerms(std::vector<AntisymmetricMatrix> a) : terms_(std::move(a)) {
    if (terms_.empty()) throw InvalidInput("RotationTerms: no matrices");
    for (const auto& t : terms_) {
        if (t.dim() != terms_.front().dim()) throw InvalidInput("RotationTerms: mixed dimensions");
        dense_.push_back(t.matrix());
    }
}

RotationTerms RotationTerms::shared(AntisymmetricMatrix a) { return RotationTerms({std::move(a)}); }

RotationTerms RotationTerms::per_particle(std::vector<AntisymmetricMatrix> a) { return RotationTerms(std::move(a)); }

const AntisymmetricMatrix& RotationTerms::shared_term() const {
    if (!identical()) throw InvalidInput("RotationTerms: rotation terms differ between particles");
    return terms_.front();
}

OrderParameterSpec OrderParameterSpec::mean_field(double K) {
    if (!std::isfinite(K)) throw InvalidInput("OrderParameterSpec: coupling K must be finite");
    return OrderParameterSpec(MeanField{K});
}

Vec OrderParameterSpec::coefficients(Eigen::Index n) const {
    if (const auto* lw = std::get_if<LinearWeighted>(&kind_)) {
        if (lw->weights.count() != n) {
            throw InvalidInput("order parameter: " + std::to_string(lw->weights.count()) + " weights for " +
                               std::to_string(n) + " particles");
        }
        return lw->weights.weights();
    }
    return Vec::Constant(n, std::get<MeanField>(kind_).K / static_cast<double>(n));
}

double OrderParameterSpec::magnitude_bound(Eigen::Index n) const {
    return coefficients(n).cwiseAbs().sum();
}

const Vec* OrderParameterSpec::linear_weights() const {
    if (const auto* lw = std::get_if<LinearWeighted>(&kind_)) return &lw->weights.weights();
    return nullptr;
}

Vec order_parameter(const Mat& points, const OrderParameterSpec& spec) {
    if (const Vec* w = spec.linear_weights()) {
        if (w->size() != points.cols()) {
            throw InvalidInput("order parameter: " + std::to_string(w->size()) + " weights for " +
                               std::to_string(points.cols()) + " particles");
        }
        return points * (*w);
    }
    const double K = std::get<MeanField>(spec.kind()).K;
    return (K / static_cast<double>(points.cols())) * points.rowwise().sum();
}

Vec order_parameter(const Configuration& c, const OrderParameterSpec& spec) { return order_parameter(c.points(), spec); }

Mat full_rhs(const Mat& points, const RotationTerms& A, const OrderParameterSpec& spec) {
    if (A.dim() != points.rows()) throw InvalidInput("full_rhs: rotation term dimension mismatch");
    if (!A.identical() && static_cast<Eigen::Index>(A.size()) != points.cols()) {
        throw InvalidInput("full_rhs: need one rotation term per particle");
    }
    const Vec Z = order_parameter(points, spec);
    Mat v(points.rows(), points.cols());
    if (A.identical()) {
        v.noalias() = A.dense(0) * points;
    } else {
        for (Eigen::Index i = 0; i < points.cols(); ++i) v.col(i).noalias() = A.dense(static_cast<std::size_t>(i)) * points.col(i);
    }
    const Eigen::RowVectorXd zx = Z.transpose() * points;
    for (Eigen::Index i = 0; i < points.cols(); ++i) v.col(i) += Z - zx(i) * points.col(i);
    return v;
}

Mat full_rhs(const Configuration& c, const RotationTerms& A, const OrderParameterSpec& spec) {
    return full_rhs(c.points(), A, spec);
}

// ---------------------------------------------------------------------------
// Diagnostics

double min_pair_dot(const Mat& points) {
    double best = 1.0;
    const Eigen::Index n = points.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) best = std::min(best, points.col(i).dot(points.col(j)));
    }
    return best;
}

double max_norm_drift(const Mat& points) {
    return (points.colwise().norm().array() - 1.0).abs().maxCoeff();
}

SyncMetrics sync_metrics(const Configuration& c, const OrderParameterSpec& spec) {
    SyncMetrics m;
    const Vec Z = order_parameter(c, spec);
    m.znorm = Z.norm();
    m.z_residual = m.znorm;
    m.min_pair_dot = min_pair_dot(c.points());
    const Vec centroid = c.points().rowwise().mean();
    if (centroid.norm() < 1e-12) {
        // No preferred diagonal point.
        m.dist_to_diagonal = std::nan("");
        return m;
    }
    const Vec dir = centroid / centroid.norm();
    m.dist_to_diagonal = (c.points().colwise() - dir).colwise().norm().maxCoeff();
    return m;
}

// ---------------------------------------------------------------------------
// Integration

namespace {

FullRecord make_record(double t, const Mat& x, const OrderParameterSpec& spec, double drift, bool pair_metrics) {
    FullRecord r;
    r.t = t;
    r.positions = x;
    r.Z = order_parameter(x, spec);
    r.znorm = r.Z.norm();
    r.min_pair_dot = pair_metrics ? min_pair_dot(x) : std::nan("");
    r.max_norm_drift = drift;
    return r;
}

}  // namespace

long long integrate_full(const Configuration& c0, const RotationTerms& A, const OrderParameterSpec& spec,
                         const IntegrationOptions& opts, const FullRecordSink& sink) {
    const long long n_steps = step_count(opts.h, opts.t_end);
    if (opts.stride < 1) throw InvalidInput("integrate_full: stride must be >= 1");
    // Validate shapes before the first step.
    (void)full_rhs(c0.points(), A, spec);

    const Eigen::Index d = c0.dim();
    const Eigen::Index n = c0.count();
    auto field = [&](const Vec& flat) -> Vec {
        const Eigen::Map<const Mat> x(flat.data(), d, n);
        const Mat v = full_rhs(Mat(x), A, spec);
        return Eigen::Map<const Vec>(v.data(), v.size());
    };

    Vec state = Eigen::Map<const Vec>(c0.points().data(), c0.points().size());
    double running_drift = max_norm_drift(c0.points());
    sink(make_record(0.0, c0.points(), spec, running_drift, opts.pair_metrics));

    for (long long k = 1; k <= n_steps; ++k) {
        state = rk4_step(state, field, opts.h);
        Eigen::Map<Mat> x(state.data(), d, n);
        const double drift = max_norm_drift(x);
        running_drift = std::max(running_drift, drift);
        if (opts.projection) {
            x.colwise().normalize();
        } else if (drift > 1e-3) {
            throw IntegrationFailure("integrate_full: norm drift " + std::to_string(drift) + " at step " +
                                     std::to_string(k) + " exceeds 1e-3");
        }
        if (k % opts.stride == 0 || k == n_steps) {
            sink(make_record(static_cast<double>(k) * opts.h, x, spec, running_drift, opts.pair_metrics));
        }
    }
    return n_steps;
}

FullTrajectory integrate_full(const Configuration& c0, const RotationTerms& A, const OrderParameterSpec& spec,
                              const IntegrationOptions& opts) {
    FullTrajectory traj;
    traj.steps = integrate_full(c0, A, spec, opts, [&](const FullRecord& r) { traj.records.push_back(r); });
    return traj;
}

}  // namespace ksphere
