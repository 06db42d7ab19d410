#pragma once

// Full N-body system on S^{d-1}:
//   x_i' = A_i x_i + Z - <Z, x_i> x_i.

#include "ksphere/geometry.hpp"
#include "ksphere/random.hpp"

#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace ksphere {

/// N points on S^{d-1}, stored as the columns of a d x N matrix.
class Configuration {
public:
    // Every column must have unit norm within `tol`. Integrator output with
    // projection disabled is admitted with a looser tolerance.
    explicit Configuration(Mat points, double tol = kSphereTol);
    static Configuration from_points(std::span<const SpherePoint> points);

    const Mat& points() const { return points_; }
    Eigen::Index dim() const { return points_.rows(); }
    Eigen::Index count() const { return points_.cols(); }
    Vec point(Eigen::Index i) const { return points_.col(i); }

private:
    Mat points_;
};

Configuration random_configuration(Eigen::Index d, Eigen::Index n, Rng& rng);

enum class WeightMode { Equal, Explicit, GaussianRiemann, Majority };

class WeightSpec {
public:
    static WeightSpec equal(Eigen::Index n);
    static WeightSpec explicit_weights(Vec weights);
    // Midpoint Riemann sum of the standard normal density over n equal
    // subintervals of [-3, 3], normalized to total 1.
    static WeightSpec gaussian_riemann(Eigen::Index n);
    // First particle carries `dominant`, the other n-1 share the rest equally.
    static WeightSpec majority(Eigen::Index n, double dominant = 0.6);

    const Vec& weights() const { return weights_; }
    WeightMode mode() const { return mode_; }
    Eigen::Index count() const { return weights_.size(); }
    double sum() const { return weights_.sum(); }
    bool is_normalized() const;
    void require_normalized() const;

private:
    WeightSpec(Vec w, WeightMode mode);
    Vec weights_;
    WeightMode mode_;
};

/// Rotation terms A_i: one shared matrix, or one per particle.
class RotationTerms {
public:
    static RotationTerms shared(AntisymmetricMatrix a);
    static RotationTerms per_particle(std::vector<AntisymmetricMatrix> a);

    bool identical() const { return terms_.size() == 1; }
    Eigen::Index dim() const { return terms_.front().dim(); }
    std::size_t size() const { return terms_.size(); }
    const AntisymmetricMatrix& shared_term() const;
    const AntisymmetricMatrix& term(std::size_t i) const { return terms_[identical() ? 0 : i]; }
    const Mat& dense(std::size_t i) const { return dense_[identical() ? 0 : i]; }

private:
    explicit RotationTerms(std::vector<AntisymmetricMatrix> a);
    std::vector<AntisymmetricMatrix> terms_;
    std::vector<Mat> dense_;
};

struct LinearWeighted {
    WeightSpec weights;
};
struct MeanField {
    double K;
};

/// Z = sum a_i x_i, or Z = (K/N) sum x_i.
class OrderParameterSpec {
public:
    static OrderParameterSpec linear(WeightSpec w) { return OrderParameterSpec(LinearWeighted{std::move(w)}); }
    static OrderParameterSpec mean_field(double K);

    bool is_linear_weighted() const { return std::holds_alternative<LinearWeighted>(kind_); }
    const std::variant<LinearWeighted, MeanField>& kind() const { return kind_; }
    // Coefficients c_i with Z = sum c_i x_i for an n-particle system.
    Vec coefficients(Eigen::Index n) const;
    // Bound on |Z|: sum |a_i| or |K|.
    double magnitude_bound(Eigen::Index n) const;
    // Weights of a linear weighted spec, nullptr for mean field.
    const Vec* linear_weights() const;

private:
    explicit OrderParameterSpec(std::variant<LinearWeighted, MeanField> k) : kind_(std::move(k)) {}
    std::variant<LinearWeighted, MeanField> kind_;
};

Vec order_parameter(const Mat& points, const OrderParameterSpec& spec);
Vec order_parameter(const Configuration& c, const OrderParameterSpec& spec);

/// Velocities of all particles as the columns of a d x N matrix; each column
/// is tangent to the sphere at its particle.
Mat full_rhs(const Mat& points, const RotationTerms& A, const OrderParameterSpec& spec);
Mat full_rhs(const Configuration& c, const RotationTerms& A, const OrderParameterSpec& spec);

struct IntegrationOptions {
    double h = 0.01;
    double t_end = 0.0;
    bool projection = true;
    long long stride = 1;
    // Pairwise dot products cost O(N^2); switch off for very large ensembles.
    bool pair_metrics = true;
};

struct FullRecord {
    double t = 0.0;
    Mat positions;
    Vec Z;
    double znorm = 0.0;
    double min_pair_dot = 1.0;
    // Largest | |x_i| - 1 | seen before projection so far in the run.
    double max_norm_drift = 0.0;
};

struct FullTrajectory {
    std::vector<FullRecord> records;
    long long steps = 0;
};

using FullRecordSink = std::function<void(const FullRecord&)>;

/// Fixed-step RK4. Records are emitted every `stride` steps and at the final
/// step. With projection off, norm drift beyond 1e-3 aborts the run.
FullTrajectory integrate_full(const Configuration& c0, const RotationTerms& A, const OrderParameterSpec& spec,
                              const IntegrationOptions& opts);
long long integrate_full(const Configuration& c0, const RotationTerms& A, const OrderParameterSpec& spec,
                         const IntegrationOptions& opts, const FullRecordSink& sink);

struct SyncMetrics {
    double znorm = 0.0;
    double min_pair_dot = 1.0;
    // NaN when the centroid vanishes.
    double dist_to_diagonal = 0.0;
    double z_residual = 0.0;
};

SyncMetrics sync_metrics(const Configuration& c, const OrderParameterSpec& spec);

// min_{i<j} <x_i, x_j>; 1 for a single point.
double min_pair_dot(const Mat& points);
// max_i | |x_i| - 1 |.
double max_norm_drift(const Mat& points);

}  // namespace ksphere
