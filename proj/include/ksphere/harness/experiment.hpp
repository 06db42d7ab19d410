#pragma once

#include "ksphere/gradient.hpp"
#include "ksphere/harness/config.hpp"
#include "ksphere/harness/trajectory_io.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace ksphere::harness {

struct RunSummary {
    Mode mode = Mode::Full;
    long long steps = 0;
    std::size_t records = 0;
    double t_final = 0.0;
    double final_znorm = 0.0;
    std::optional<double> final_min_pair_dot;
    std::optional<double> final_phi;
    std::optional<Mat> final_positions;
    std::optional<Vec> final_boost;  // w or z
    std::string stop_reason = "horizon";
    double wall_seconds = 0.0;
    // Set when an integrator aborted; the trajectory ends with an abort line.
    bool partial = false;
    std::string error;
};

/// Runs the configured mode and streams the trajectory to `out`.
RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream& out);
/// Same, writing to cfg.output (or nowhere when it is empty).
RunSummary run_experiment(const ExperimentConfig& cfg);
std::string format_summary(const RunSummary& s);

struct ComparisonReport {
    long long steps = 0;
    std::size_t compared_records = 0;
    double max_deviation = 0.0;  // sup over records and coordinates
    // max |cr(t) - cr(0)| over a few quadruples; NaN for N < 4.
    double cross_ratio_drift_full = 0.0;
    double cross_ratio_drift_reduced = 0.0;
    double full_seconds = 0.0;
    double reduced_seconds = 0.0;
    double wall_time_ratio = 0.0;  // full / reduced
    Eigen::Index full_dim = 0;     // N(d-1)
    Eigen::Index reduced_dim = 0;  // d(d+1)/2
};

/// Full and (w, zeta) integrations from the same initial configuration.
/// Requires identical rotation terms.
ComparisonReport compare_full_reduced(const ExperimentConfig& cfg);
std::string format_report(const ComparisonReport& r);

/// Fixed point of the w flow for the config's base configuration and weights.
LinearizationReport fixedpoint_experiment(const ExperimentConfig& cfg);

struct PotentialCheckReport {
    std::size_t samples = 0;
    double max_closed_form = 0.0;  // max |hyp grad + w'| with the closed-form gradient
    double max_finite_diff = 0.0;  // same with a central-difference gradient
};

/// Random w with |w| <= 0.9 drawn from stream 4 of the config seed.
PotentialCheckReport potential_check(const ExperimentConfig& cfg, std::size_t samples = 100, double fd_step = 1e-5);

struct ContinuumCheckReport {
    Vec z;
    Vec formula;
    Vec monte_carlo;
    Vec standard_error;
    double relative_error = 0.0;
};

/// Closed-form centroid against a Monte Carlo Poisson integral at a random z
/// of norm `radius`.
ContinuumCheckReport continuum_check(Eigen::Index d, double radius, double K, std::size_t n_samples,
                                     std::uint64_t seed);

}  // namespace ksphere::harness
