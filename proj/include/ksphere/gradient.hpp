#pragma once

// Hyperbolic gradient structure of the w flow for linear weighted order
// parameters: potential, fixed point and its linearization, the scaled and
// semi-scaled polar fields, and forward/backward limit classification.

#include "ksphere/dynamics.hpp"
#include "ksphere/geometry.hpp"
#include "ksphere/reduced.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ksphere {

/// Base configuration plus weights. Construction checks shapes, distinct
/// points, N >= 3 and sum a_i = 1; `require_theorem_hypotheses` additionally
/// checks 0 < a_i < 1/2.
class PotentialContext {
public:
    PotentialContext(Configuration base, WeightSpec weights);

    const Configuration& base() const { return base_; }
    const WeightSpec& weights() const { return weights_; }
    Eigen::Index dim() const { return base_.dim(); }
    Eigen::Index count() const { return base_.count(); }

    bool theorem_hypotheses_hold() const;
    void require_theorem_hypotheses() const;
    // Index of the largest weight.
    Eigen::Index dominant_index() const;

private:
    Configuration base_;
    WeightSpec weights_;
};

/// sum a_i log((1 - |w|^2) / |w - p_i|^2).
double potential_phi(const BallPoint& w, const PotentialContext& ctx);
/// Same potential written as (1/(d-1)) sum a_i log P_hyp(w, p_i).
double potential_phi_poisson(const BallPoint& w, const PotentialContext& ctx);

/// (2 / (1 - |w|^2)) sum a_i M_w(p_i).
Vec euclid_grad_phi(const BallPoint& w, const PotentialContext& ctx);
/// (1 - |w|^2)^2 g / 4.
Vec hyp_grad(const Vec& euclidean_gradient, const BallPoint& w);

struct LinearizationReport {
    BallPoint w_star;
    Mat T;        // sum a_i p'_i p'_i^T with p' = M_{w*}(p)
    Vec mu;       // eigenvalues of T, ascending
    Vec lambda;   // 1 - mu: eigenvalues of the w flow Jacobian at w*
    double T_norm = 0.0;
    double residual = 0.0;  // |Z(M_{w*}(p))|
    long long backward_steps = 0;
    int newton_iterations = 0;
};

struct FixedPointOptions {
    std::optional<BallPoint> w0;  // backward-flow start; origin by default
    double h = 0.01;
    double max_time = 2000.0;
    double stationary_tol = 1e-8;
    double residual_tol = 1e-10;
    int max_newton = 20;
    bool check_hypotheses = true;
};

/// Unique repelling fixed point of the w flow: backward integration until
/// |w'| < 1e-8, Newton polish on Z(M_w(p)) = 0, then linearization at the
/// recentred base M_{w*}(p).
LinearizationReport find_fixed_point(const PotentialContext& ctx, const FixedPointOptions& opts = {});

/// T = sum a_i p_i p_i^T for a base with Z(p) = 0 (checked to 1e-8). Rejects
/// ||T|| >= 1, which happens when the points lie on one antipodal pair.
Mat linearization_T(const Configuration& base, const WeightSpec& weights);

/// w - sum a_i (1 - |w|^2)(p_i - w) / |p_i - w|^2 on R^d minus the p_i.
Vec scaled_rhs(const Vec& w, const PotentialContext& ctx);

/// Polar coordinates w = p_anchor - r u around a base point.
struct PolarState {
    double r = 0.0;
    Vec u;
    Eigen::Index anchor = 0;
};

struct PolarRate {
    double r_dot = 0.0;
    Vec u_dot;
};

// min_{j != anchor} |p_j - p_anchor|.
double polar_epsilon(const PotentialContext& ctx, Eigen::Index anchor);

/// Semi-scaled polar field r' = -r <u, S>, u' = <u, S> u - S (tangent part),
/// with the anchor term of S replaced by (2 <p, u> - r) u so the field is
/// smooth through r = 0. Accepts |r| < epsilon.
PolarRate semiscaled_polar_rhs(const PolarState& s, const PotentialContext& ctx);

/// Central-difference Jacobian of the semi-scaled field at (0, p_anchor) in
/// coordinates (r, tangent basis of the sphere at p_anchor).
Mat semiscaled_jacobian_at_anchor(const PotentialContext& ctx, Eigen::Index anchor, double step = 1e-5);

enum class LimitKind { ForwardSync, BackwardIncoherent, MajorityClusterAntipodal, Unclassified };

std::string to_string(LimitKind k);

struct LimitClass {
    LimitKind kind = LimitKind::Unclassified;
    double t_reached = 0.0;
    Vec w_terminal;
    double w_norm = 0.0;
    double znorm = 0.0;          // |Z(M_w(p))| at the terminal state
    double min_pair_dot = 1.0;   // of the terminal reconstruction
    double dominant_min_dot = 1.0;  // min_j <x_dom, x_j> at the terminal state
    Eigen::Index dominant_index = 0;
    Vec limit_point;  // normalized centroid for ForwardSync
};

struct LimitClassification {
    LimitClass forward;
    LimitClass backward;
};

struct ClassifyOptions {
    // Draws the starting w uniformly from the ball of radius 0.5 when set;
    // otherwise the flow starts at the origin.
    std::optional<std::uint64_t> seed;
    double forward_horizon = 40.0;
    double backward_horizon = 40.0;
    double h = 0.01;
};

/// Runs the w flow forward and backward and assigns one class per direction.
LimitClassification classify_limits(const PotentialContext& ctx, const ClassifyOptions& opts = {});

}  // namespace ksphere
