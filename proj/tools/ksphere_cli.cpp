// ksphere: run sphere Kuramoto experiments from JSON configs or presets.
//
// Exit codes: 0 success, 2 invalid input, 3 integrator abort.

#include "ksphere/errors.hpp"
#include "ksphere/harness/config.hpp"
#include "ksphere/harness/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

namespace {

using namespace ksphere;
using namespace ksphere::harness;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
};

void apply_globals(ExperimentConfig& cfg, const Globals& g) {
    if (g.seed) cfg.seed = *g.seed;
    if (!g.out.empty()) cfg.output = g.out;
}

std::string vec_str(const Vec& v) {
    std::string s = "[";
    char buf[32];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.12g", i ? ", " : "", v(i));
        s += buf;
    }
    return s + "]";
}

int simulate(ExperimentConfig cfg, const Globals& g) {
    apply_globals(cfg, g);
    const RunSummary s = run_experiment(cfg);
    if (!g.quiet || s.partial) std::printf("%s\n", format_summary(s).c_str());
    return s.partial ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto dynamics on spheres"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Override the experiment seed");
    app.add_option("--out", g.out, "Trajectory output path");
    app.add_flag("--quiet", g.quiet, "Suppress the summary line");

    std::string config_path;
    std::string preset_name = "fig1";
    std::size_t samples = 100;
    int cc_d = 3;
    double cc_radius = 0.5;
    double cc_K = 1.0;
    std::size_t cc_samples = 1000000;

    auto* sim = app.add_subcommand("simulate", "Run an experiment and write its trajectory");
    sim->add_option("config", config_path, "JSON config file")->required();
    auto* cmp = app.add_subcommand("compare", "Full versus reduced integration from the same start");
    cmp->add_option("config", config_path, "JSON config file")->required();
    auto* fp = app.add_subcommand("fixedpoint", "Fixed point of the w flow and its linearization");
    fp->add_option("config", config_path, "JSON config file")->required();
    auto* pc = app.add_subcommand("potential-check", "Hyperbolic gradient of the potential against the w flow");
    pc->add_option("config", config_path, "JSON config file")->required();
    pc->add_option("--samples", samples, "Number of random w");
    auto* cc = app.add_subcommand("continuum-check", "Continuum order parameter against a Monte Carlo integral");
    cc->add_option("--d", cc_d, "Dimension")->check(CLI::Range(2, 64));
    cc->add_option("--radius", cc_radius, "|z|");
    cc->add_option("--K", cc_K, "Coupling");
    cc->add_option("--samples", cc_samples, "Monte Carlo samples");
    auto* pr = app.add_subcommand("preset", "Run a built-in experiment");
    pr->add_option("name", preset_name, "fig1, fig2 or fig3")->required()->check(CLI::IsMember(preset_names()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sim) return simulate(load_config(config_path), g);
        if (*pr) return simulate(preset(preset_name), g);
        if (*cmp) {
            ExperimentConfig cfg = load_config(config_path);
            apply_globals(cfg, g);
            std::printf("%s\n", format_report(compare_full_reduced(cfg)).c_str());
            return 0;
        }
        if (*fp) {
            ExperimentConfig cfg = load_config(config_path);
            apply_globals(cfg, g);
            const LinearizationReport r = fixedpoint_experiment(cfg);
            std::printf("w* = %s\nresidual = %.3e\nmu = %s\nlambda = %s\n||T|| = %.12g\n", vec_str(r.w_star.vec()).c_str(),
                        r.residual, vec_str(r.mu).c_str(), vec_str(r.lambda).c_str(), r.T_norm);
            return 0;
        }
        if (*pc) {
            ExperimentConfig cfg = load_config(config_path);
            apply_globals(cfg, g);
            const PotentialCheckReport r = potential_check(cfg, samples);
            std::printf("samples=%zu closed_form=%.3e finite_diff=%.3e\n", r.samples, r.max_closed_form,
                        r.max_finite_diff);
            return 0;
        }
        if (*cc) {
            const ContinuumCheckReport r = continuum_check(cc_d, cc_radius, cc_K, cc_samples, g.seed.value_or(0));
            std::printf("z = %s\nformula = %s\nmonte_carlo = %s\nstderr = %s\nrelative_error = %.3e\n",
                        vec_str(r.z).c_str(), vec_str(r.formula).c_str(), vec_str(r.monte_carlo).c_str(),
                        vec_str(r.standard_error).c_str(), r.relative_error);
            return 0;
        }
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "integrator failure: %s\n", e.what());
        return 3;
    }
    return 2;
}
