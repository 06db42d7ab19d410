#pragma once

// Dynamics on a Möbius group orbit for identical rotation terms: the (w, zeta)
// and (z, zeta) coordinate systems, the zeta-free w flow, reconstruction of
// the configuration and base-point change.

#include "ksphere/dynamics.hpp"
#include "ksphere/errors.hpp"
#include "ksphere/geometry.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace ksphere {

/// alpha(y1, y2) y = <y1, y> y2 - <y2, y> y1.
Vec alpha_apply(const Vec& y1, const Vec& y2, const Vec& y);
Mat alpha_matrix(const Vec& y1, const Vec& y2);

/// Base configuration of a group orbit. Points must be pairwise distinct and
/// include three points no two of which are equal or antipodal.
class BasePoints {
public:
    explicit BasePoints(Configuration c);

    const Configuration& config() const { return config_; }
    const Mat& points() const { return config_.points(); }
    Eigen::Index dim() const { return config_.dim(); }
    Eigen::Index count() const { return config_.count(); }

private:
    Configuration config_;
};

using BasePtr = std::shared_ptr<const BasePoints>;
BasePtr make_base(Configuration c);

struct ReducedStateWZeta {
    BallPoint w;
    Rotation zeta;
    BasePtr base;
};

struct ReducedStateZZeta {
    BallPoint z;
    Rotation zeta;
    BasePtr base;
};

// g_0 = identity with base p = x(0): reconstruction is exact at t = 0.
ReducedStateWZeta initial_state(const Configuration& x0);

struct ReducedRate {
    Vec boost_dot;  // w' or z'
    Mat zeta_dot;
};

inline constexpr double kBoundaryGuard = 1.0 - 1e-12;

/// w' = -(1 - |w|^2) zeta^{-1} Z / 2,  zeta' = (A - alpha(zeta w, Z)) zeta,
/// with Z evaluated at zeta M_w(p).
ReducedRate wzeta_rhs(const ReducedStateWZeta& s, const AntisymmetricMatrix& A, const OrderParameterSpec& spec);

/// z' = Az + (1 + |z|^2) Z / 2 - <Z, z> z,  zeta' = (A + alpha(z, Z)) zeta,
/// with Z evaluated at M_{-z}(zeta p).
ReducedRate zzeta_rhs(const ReducedStateZZeta& s, const AntisymmetricMatrix& A, const OrderParameterSpec& spec);

/// w' = -(1 - |w|^2) sum a_i M_w(p_i) / 2.
Vec w_rhs(const BallPoint& w, const Configuration& base, const WeightSpec& weights);
// Same field for any order parameter that is linear in the positions.
Vec w_rhs(const BallPoint& w, const Configuration& base, const OrderParameterSpec& spec);

// Columns M_w(p_i).
Mat boost_points(const Vec& w, const Mat& points);

Configuration reconstruct(const ReducedStateWZeta& s);
Configuration reconstruct(const ReducedStateZZeta& s);

ReducedStateZZeta to_zzeta(const ReducedStateWZeta& s);
ReducedStateWZeta to_wzeta(const ReducedStateZZeta& s);

/// Raised when w (or z) leaves the region |w| < 1 - 1e-12; carries the last
/// state that was still inside.
class BoundaryBreach : public IntegrationFailure {
public:
    BoundaryBreach(const std::string& what, double t, Vec last_boost, Mat last_zeta)
        : IntegrationFailure(what), t_(t), last_boost_(std::move(last_boost)), last_zeta_(std::move(last_zeta)) {}
    double time() const { return t_; }
    const Vec& last_boost() const { return last_boost_; }
    const Mat& last_zeta() const { return last_zeta_; }

private:
    double t_;
    Vec last_boost_;
    Mat last_zeta_;
};

struct ReducedRecord {
    double t = 0.0;
    Vec boost;  // w or z, depending on the coordinate system
    Mat zeta;
    Mat positions;
    double znorm = 0.0;
    double min_pair_dot = 1.0;
    // Largest orthogonality residual of zeta before re-projection so far.
    double max_orth_residual = 0.0;
};

struct ReducedTrajectory {
    std::vector<ReducedRecord> records;
    long long steps = 0;
};

using ReducedRecordSink = std::function<void(const ReducedRecord&)>;

/// RK4 on (w, zeta); zeta is re-orthonormalized by polar projection after
/// every step. `opts.projection` is ignored.
ReducedTrajectory integrate_reduced(const ReducedStateWZeta& s0, const AntisymmetricMatrix& A,
                                    const OrderParameterSpec& spec, const IntegrationOptions& opts);
long long integrate_reduced(const ReducedStateWZeta& s0, const AntisymmetricMatrix& A, const OrderParameterSpec& spec,
                            const IntegrationOptions& opts, const ReducedRecordSink& sink);

// Same for the (z, zeta) system.
long long integrate_reduced_zzeta(const ReducedStateZZeta& s0, const AntisymmetricMatrix& A,
                                  const OrderParameterSpec& spec, const IntegrationOptions& opts,
                                  const ReducedRecordSink& sink);

struct WFlowRecord {
    double t = 0.0;
    Vec w;
    Vec Z;  // Z(M_w(p))
    double min_pair_dot = 1.0;
};

enum class WFlowStop { Horizon, Radius, Stationary };

struct WFlowOptions {
    IntegrationOptions integration;
    // Stop early once |w| reaches this radius.
    double stop_radius = kBoundaryGuard;
    // Stop early once |w'| drops below this (0 disables).
    double stationary_tol = 0.0;
};

struct WFlowTrajectory {
    std::vector<WFlowRecord> records;
    long long steps = 0;
    WFlowStop stop = WFlowStop::Horizon;
};

/// Integrates the zeta-free w flow from w0.
WFlowTrajectory integrate_w(const BallPoint& w0, const Configuration& base, const WeightSpec& weights,
                            const WFlowOptions& opts);

/// Base change p' = M(p): the same configuration has w' = M(w).
BallPoint basepoint_change(const BallPoint& w, const MobiusMap& M);

/// Full coordinate change to base M(p); zeta' is the orthogonal Procrustes fit
/// between the two reconstructions.
ReducedStateWZeta change_base(const ReducedStateWZeta& s, const MobiusMap& M);

}  // namespace ksphere
