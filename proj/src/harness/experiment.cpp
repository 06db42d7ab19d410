#include "ksphere/harness/experiment.hpp"

#include "ksphere/continuum.hpp"
#include "ksphere/reduced.hpp"
#include "ksphere/rk4.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace ksphere::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

IntegrationOptions integration_options(const ExperimentConfig& cfg) {
    IntegrationOptions o;
    o.h = cfg.h;
    o.t_end = cfg.t_end;
    o.projection = cfg.projection;
    o.stride = cfg.stride;
    o.pair_metrics = cfg.pair_metrics;
    return o;
}

std::optional<double> finite_or_none(double x) {
    if (std::isnan(x)) return std::nullopt;
    return x;
}

// Potential context when the weights admit one.
std::optional<PotentialContext> try_context(const ExperimentConfig& cfg, const Configuration& base) {
    if (cfg.weights.kind == "mean_field") return std::nullopt;
    try {
        return PotentialContext(base, build_weights(cfg));
    } catch (const InvalidInput&) {
        return std::nullopt;
    }
}

std::optional<double> try_phi(const std::optional<PotentialContext>& ctx, const Vec& w) {
    if (!ctx) return std::nullopt;
    try {
        return potential_phi(BallPoint(w), *ctx);
    } catch (const InvalidInput&) {
        return std::nullopt;
    }
}

struct Tracker {
    TrajectoryWriter& writer;
    RunSummary& summary;

    void operator()(TrajectoryRecord r) {
        summary.t_final = r.t;
        summary.final_znorm = r.znorm;
        summary.final_min_pair_dot = r.min_pair_dot;
        summary.final_phi = r.phi;
        summary.final_positions = r.positions;
        summary.final_boost = r.w ? r.w : r.z;
        writer.write(r);
    }
};

void run_full(const ExperimentConfig& cfg, Tracker& track) {
    const Configuration c0 = initial_configuration(cfg);
    const RotationTerms A = build_rotation(cfg);
    const OrderParameterSpec spec = build_order_parameter(cfg);
    track.summary.steps = integrate_full(c0, A, spec, integration_options(cfg), [&](const FullRecord& f) {
        TrajectoryRecord r;
        r.t = f.t;
        r.positions = f.positions;
        r.znorm = f.znorm;
        r.min_pair_dot = finite_or_none(f.min_pair_dot);
        r.drift = f.max_norm_drift;
        track(std::move(r));
    });
}

void run_reduced(const ExperimentConfig& cfg, Tracker& track) {
    const Configuration c0 = initial_configuration(cfg);
    const AntisymmetricMatrix A = build_rotation(cfg).shared_term();
    const OrderParameterSpec spec = build_order_parameter(cfg);
    const auto ctx = try_context(cfg, c0);
    const bool wzeta = cfg.mode == Mode::ReducedWZeta;
    auto sink = [&](const ReducedRecord& rr) {
        TrajectoryRecord r;
        r.t = rr.t;
        if (wzeta) {
            r.w = rr.boost;
            r.phi = try_phi(ctx, rr.boost);
        } else {
            r.z = rr.boost;
        }
        r.zeta = rr.zeta;
        r.positions = rr.positions;
        r.znorm = rr.znorm;
        r.min_pair_dot = finite_or_none(rr.min_pair_dot);
        r.drift = rr.max_orth_residual;
        track(std::move(r));
    };
    const ReducedStateWZeta s0 = initial_state(c0);
    if (wzeta) {
        track.summary.steps = integrate_reduced(s0, A, spec, integration_options(cfg), sink);
    } else {
        track.summary.steps = integrate_reduced_zzeta(to_zzeta(s0), A, spec, integration_options(cfg), sink);
    }
}

void run_w(const ExperimentConfig& cfg, Tracker& track) {
    const Configuration c0 = initial_configuration(cfg);
    const WeightSpec weights = build_weights(cfg);
    const auto ctx = try_context(cfg, c0);
    WFlowOptions wo;
    wo.integration = integration_options(cfg);
    // |w| approaches 1 exponentially; stop well inside the guard.
    wo.stop_radius = 1.0 - 1e-9;
    const WFlowTrajectory traj = integrate_w(BallPoint::origin(cfg.d), c0, weights, wo);
    for (const auto& wr : traj.records) {
        TrajectoryRecord r;
        r.t = wr.t;
        r.w = wr.w;
        r.znorm = wr.Z.norm();
        r.min_pair_dot = finite_or_none(wr.min_pair_dot);
        r.phi = try_phi(ctx, wr.w);
        track(std::move(r));
    }
    track.summary.steps = traj.steps;
    track.summary.stop_reason = traj.stop == WFlowStop::Radius ? "radius" : "horizon";
}

void run_continuum(const ExperimentConfig& cfg, Tracker& track) {
    const ContinuumState s0{initial_continuum_state(cfg), cfg.K, build_rotation(cfg).shared_term()};
    const auto recs = integrate_continuum(s0, integration_options(cfg));
    for (const auto& cr : recs) {
        TrajectoryRecord r;
        r.t = cr.t;
        r.z = cr.z;
        r.znorm = cr.Z.norm();
        track(std::move(r));
    }
    track.summary.steps = step_count(cfg.h, cfg.t_end);
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream& out) {
    validate(cfg);
    RunSummary summary;
    summary.mode = cfg.mode;
    TrajectoryWriter writer(out, cfg);
    Tracker track{writer, summary};
    const auto t0 = Clock::now();
    try {
        switch (cfg.mode) {
            case Mode::Full: run_full(cfg, track); break;
            case Mode::ReducedW: run_w(cfg, track); break;
            case Mode::ReducedWZeta:
            case Mode::ReducedZZeta: run_reduced(cfg, track); break;
            case Mode::Continuum: run_continuum(cfg, track); break;
        }
    } catch (const IntegrationFailure& e) {
        summary.partial = true;
        summary.error = e.what();
        summary.stop_reason = "abort";
        if (cfg.h != 0.0) summary.steps = std::llround(summary.t_final / cfg.h);
        writer.write_abort(e.what(), summary.t_final);
    }
    summary.records = writer.records_written();
    summary.wall_seconds = seconds_since(t0);
    out.flush();
    return summary;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
    if (cfg.output.empty()) {
        std::ostream sink(nullptr);
        return run_experiment(cfg, sink);
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw ConfigError("output", "cannot open '" + cfg.output + "' for writing");
    return run_experiment(cfg, out);
}

std::string format_summary(const RunSummary& s) {
    char buf[512];
    std::string out;
    std::snprintf(buf, sizeof buf, "mode=%s steps=%lld records=%zu t_final=%.6g Znorm=%.10g", to_string(s.mode).c_str(),
                  s.steps, s.records, s.t_final, s.final_znorm);
    out += buf;
    if (s.final_min_pair_dot) {
        std::snprintf(buf, sizeof buf, " min_pair_dot=%.10g", *s.final_min_pair_dot);
        out += buf;
    }
    if (s.final_phi) {
        std::snprintf(buf, sizeof buf, " phi=%.10g", *s.final_phi);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, " stop=%s wall=%.3fs", s.stop_reason.c_str(), s.wall_seconds);
    out += buf;
    if (s.partial) out += " partial=1 error=\"" + s.error + "\"";
    return out;
}

namespace {

constexpr std::array<std::array<int, 4>, 5> kQuadruples{{{0, 1, 2, 3}, {1, 2, 3, 4}, {0, 2, 4, 6}, {0, 3, 5, 7}, {2, 5, 7, 9}}};

// Largest cross-ratio change relative to the first frame.
template <class Frames>
double cross_ratio_drift(const Frames& frames, Eigen::Index n) {
    if (n < 4) return std::nan("");
    double drift = 0.0;
    for (const auto& q : kQuadruples) {
        if (q[3] >= n) continue;
        auto cr = [&](const Mat& x) { return cross_ratio(Vec(x.col(q[0])), Vec(x.col(q[1])), Vec(x.col(q[2])), Vec(x.col(q[3]))); };
        const double c0 = cr(frames.front().positions);
        for (const auto& f : frames) drift = std::max(drift, std::abs(cr(f.positions) - c0));
    }
    return drift;
}

}  // namespace

ComparisonReport compare_full_reduced(const ExperimentConfig& cfg) {
    validate(cfg);
    const RotationTerms A = build_rotation(cfg);
    if (!A.identical()) throw ConfigError("A", "comparison requires identical rotation terms");
    const Configuration c0 = initial_configuration(cfg);
    const OrderParameterSpec spec = build_order_parameter(cfg);
    const IntegrationOptions opts = integration_options(cfg);

    ComparisonReport rep;
    auto t0 = Clock::now();
    const FullTrajectory full = integrate_full(c0, A, spec, opts);
    rep.full_seconds = seconds_since(t0);
    t0 = Clock::now();
    const ReducedTrajectory red = integrate_reduced(initial_state(c0), A.shared_term(), spec, opts);
    rep.reduced_seconds = seconds_since(t0);

    if (full.records.size() != red.records.size()) throw IntegrationFailure("compare: record counts differ");
    rep.steps = full.steps;
    rep.compared_records = full.records.size();
    for (std::size_t k = 0; k < full.records.size(); ++k) {
        const double dev = (full.records[k].positions - red.records[k].positions).cwiseAbs().maxCoeff();
        rep.max_deviation = std::max(rep.max_deviation, dev);
    }
    rep.cross_ratio_drift_full = cross_ratio_drift(full.records, c0.count());
    rep.cross_ratio_drift_reduced = cross_ratio_drift(red.records, c0.count());
    rep.wall_time_ratio = rep.reduced_seconds > 0.0 ? rep.full_seconds / rep.reduced_seconds : std::nan("");
    rep.full_dim = c0.count() * (c0.dim() - 1);
    rep.reduced_dim = c0.dim() * (c0.dim() + 1) / 2;
    return rep;
}

std::string format_report(const ComparisonReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "steps=%lld records=%zu max_deviation=%.3e cross_ratio_drift_full=%.3e "
                  "cross_ratio_drift_reduced=%.3e full=%.3fs reduced=%.3fs ratio=%.2f dims=%ld/%ld",
                  r.steps, r.compared_records, r.max_deviation, r.cross_ratio_drift_full, r.cross_ratio_drift_reduced,
                  r.full_seconds, r.reduced_seconds, r.wall_time_ratio, static_cast<long>(r.full_dim),
                  static_cast<long>(r.reduced_dim));
    return buf;
}

LinearizationReport fixedpoint_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const PotentialContext ctx(initial_configuration(cfg), build_weights(cfg));
    return find_fixed_point(ctx);
}

PotentialCheckReport potential_check(const ExperimentConfig& cfg, std::size_t samples, double fd_step) {
    validate(cfg);
    const PotentialContext ctx(initial_configuration(cfg), build_weights(cfg));
    Rng rng = make_rng(cfg.seed, 4);
    PotentialCheckReport rep;
    rep.samples = samples;
    const Eigen::Index d = ctx.dim();
    for (std::size_t s = 0; s < samples; ++s) {
        const BallPoint w(random_ball_point(d, 0.9, rng));
        const Vec v = w_rhs(w, ctx.base(), ctx.weights());
        rep.max_closed_form = std::max(rep.max_closed_form, (hyp_grad(euclid_grad_phi(w, ctx), w) + v).norm());
        Vec g(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            Vec a = w.vec();
            Vec b = w.vec();
            a(k) += fd_step;
            b(k) -= fd_step;
            g(k) = (potential_phi(BallPoint(a), ctx) - potential_phi(BallPoint(b), ctx)) / (2.0 * fd_step);
        }
        rep.max_finite_diff = std::max(rep.max_finite_diff, (hyp_grad(g, w) + v).norm());
    }
    return rep;
}

ContinuumCheckReport continuum_check(Eigen::Index d, double radius, double K, std::size_t n_samples,
                                     std::uint64_t seed) {
    if (!(radius >= 0.0 && radius < 1.0)) throw InvalidInput("continuum_check: radius must lie in [0, 1)");
    Rng rng = make_rng(seed, 5);
    ContinuumCheckReport rep;
    rep.z = radius * random_sphere_point(d, rng);
    const BallPoint z(rep.z);
    rep.formula = Z_hyp(z, K);
    const McEstimate mc = poisson_integral_mc(SphereFunction([](const Vec& x) { return x; }), z,
                                              SamplingSpec{n_samples, seed, 6});
    rep.monte_carlo = K * mc.mean;
    rep.standard_error = std::abs(K) * mc.standard_error;
    const double scale = rep.formula.norm();
    rep.relative_error = (rep.formula - rep.monte_carlo).norm() / (scale > 0.0 ? scale : 1.0);
    return rep;
}

}  // namespace ksphere::harness
