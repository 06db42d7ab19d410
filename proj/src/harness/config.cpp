#include "ksphere/harness/config.hpp"

#include "ksphere/rk4.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ksphere::harness {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Full: return "full";
        case Mode::ReducedW: return "reduced_w";
        case Mode::ReducedWZeta: return "reduced_wzeta";
        case Mode::ReducedZZeta: return "reduced_zzeta";
        case Mode::Continuum: return "continuum";
    }
    return "unknown";
}

Mode parse_mode(std::string_view s) {
    for (Mode m : {Mode::Full, Mode::ReducedW, Mode::ReducedWZeta, Mode::ReducedZZeta, Mode::Continuum})
        if (to_string(m) == s) return m;
    throw ConfigError("mode", "unknown mode '" + std::string(s) + "'");
}

namespace {

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.contains(key)) throw ConfigError(prefix + key, "unknown field '" + key + "'");
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    return v.get<double>();
}

long long get_integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
    return v.get<long long>();
}

std::uint64_t get_unsigned(const json& v, const std::string& field) {
    if (!v.is_number_unsigned()) throw ConfigError(field, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

bool get_bool(const json& v, const std::string& field) {
    if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& v, const std::string& field) {
    if (!v.is_string()) throw ConfigError(field, "expected a string");
    return v.get<std::string>();
}

std::vector<double> get_number_array(const json& v, const std::string& field) {
    if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

int get_int(const json& v, const std::string& field) {
    const long long x = get_integer(v, field);
    if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(field, "integer out of range");
    return static_cast<int>(x);
}

WeightsConfig parse_weights(const json& v) {
    if (!v.is_object()) throw ConfigError("weights", "expected an object");
    reject_unknown(v, "weights.", {"kind", "values", "dominant", "K"});
    WeightsConfig w;
    if (auto p = find(v, "kind")) w.kind = get_string(*p, "weights.kind");
    if (auto p = find(v, "values")) w.values = get_number_array(*p, "weights.values");
    if (auto p = find(v, "dominant")) w.dominant = get_number(*p, "weights.dominant");
    if (auto p = find(v, "K")) w.K = get_number(*p, "weights.K");
    return w;
}

RotationConfig parse_rotation(const json& v) {
    if (!v.is_object()) throw ConfigError("A", "expected an object");
    reject_unknown(v, "A.", {"kind", "scale", "seed", "upper"});
    RotationConfig a;
    if (auto p = find(v, "kind")) a.kind = get_string(*p, "A.kind");
    if (auto p = find(v, "scale")) a.scale = get_number(*p, "A.scale");
    if (auto p = find(v, "seed")) a.seed = get_unsigned(*p, "A.seed");
    if (auto p = find(v, "upper")) a.upper = get_number_array(*p, "A.upper");
    return a;
}

bool is_reduced(Mode m) { return m == Mode::ReducedW || m == Mode::ReducedWZeta || m == Mode::ReducedZZeta; }

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("<document>", "top level must be an object");
    reject_unknown(doc, "", {"name", "d", "N", "mode", "weights", "A", "h", "t_end", "stride", "seed", "projection",
                             "pair_metrics", "theorem_mode", "K", "z0", "output"});

    ExperimentConfig cfg;
    if (auto p = find(doc, "mode")) {
        cfg.mode = parse_mode(get_string(*p, "mode"));
    } else {
        throw ConfigError("mode", "required field missing");
    }
    if (auto p = find(doc, "d")) {
        cfg.d = get_int(*p, "d");
    } else {
        throw ConfigError("d", "required field missing");
    }
    if (auto p = find(doc, "N")) {
        cfg.N = get_int(*p, "N");
    } else if (cfg.mode != Mode::Continuum) {
        throw ConfigError("N", "required field missing");
    }
    if (auto p = find(doc, "name")) cfg.name = get_string(*p, "name");
    if (auto p = find(doc, "weights")) cfg.weights = parse_weights(*p);
    if (auto p = find(doc, "A")) cfg.A = parse_rotation(*p);
    if (auto p = find(doc, "h")) cfg.h = get_number(*p, "h");
    if (auto p = find(doc, "t_end")) cfg.t_end = get_number(*p, "t_end");
    if (auto p = find(doc, "stride")) cfg.stride = get_integer(*p, "stride");
    if (auto p = find(doc, "seed")) cfg.seed = get_unsigned(*p, "seed");
    if (auto p = find(doc, "projection")) cfg.projection = get_bool(*p, "projection");
    if (auto p = find(doc, "pair_metrics")) cfg.pair_metrics = get_bool(*p, "pair_metrics");
    if (auto p = find(doc, "theorem_mode")) cfg.theorem_mode = get_bool(*p, "theorem_mode");
    if (auto p = find(doc, "K")) cfg.K = get_number(*p, "K");
    if (auto p = find(doc, "z0")) cfg.z0 = get_number_array(*p, "z0");
    if (auto p = find(doc, "output")) cfg.output = get_string(*p, "output");
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<path>", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.d < 2) throw ConfigError("d", "dimension must be >= 2");
    if (cfg.mode != Mode::Continuum && cfg.N < 1) throw ConfigError("N", "need at least one particle");
    if (is_reduced(cfg.mode) && cfg.N < 3) throw ConfigError("N", "reduced modes need at least three base points");
    if (!std::isfinite(cfg.h)) throw ConfigError("h", "must be finite");
    if (!std::isfinite(cfg.t_end)) throw ConfigError("t_end", "must be finite");
    if (cfg.h == 0.0 && cfg.t_end != 0.0) throw ConfigError("h", "step must be nonzero unless t_end = 0");
    if (cfg.h != 0.0) {
        try {
            (void)step_count(cfg.h, cfg.t_end);
        } catch (const InvalidInput& e) {
            throw ConfigError("t_end", e.what());
        }
    }
    if (cfg.stride < 1) throw ConfigError("stride", "must be >= 1");

    const auto& w = cfg.weights;
    if (w.kind == "explicit") {
        if (w.values.size() != static_cast<std::size_t>(cfg.N))
            throw ConfigError("weights.values", "expected " + std::to_string(cfg.N) + " values");
        for (double a : w.values)
            if (!std::isfinite(a) || a < 0.0) throw ConfigError("weights.values", "weights must be finite and >= 0");
    } else if (w.kind == "majority") {
        if (!(w.dominant > 0.0 && w.dominant < 1.0)) throw ConfigError("weights.dominant", "must lie in (0, 1)");
        if (cfg.N < 2) throw ConfigError("N", "majority weights need at least two particles");
    } else if (w.kind == "mean_field") {
        if (!std::isfinite(w.K)) throw ConfigError("weights.K", "must be finite");
    } else if (w.kind != "equal" && w.kind != "gaussian_riemann") {
        throw ConfigError("weights.kind", "unknown weight kind '" + w.kind + "'");
    }
    if (w.kind != "explicit" && !w.values.empty()) throw ConfigError("weights.values", "only valid for explicit weights");

    if (cfg.theorem_mode) {
        if (w.kind == "mean_field") throw ConfigError("weights", "theorem mode requires linear weights");
        if (w.kind == "explicit") {
            double s = 0.0;
            for (double a : w.values) s += a;
            if (std::abs(s - 1.0) > 1e-12)
                throw ConfigError("weights", "theorem mode requires weights summing to 1, got " + std::to_string(s));
        }
    }

    const auto& a = cfg.A;
    if (a.kind == "explicit") {
        const std::size_t need = static_cast<std::size_t>(cfg.d) * (cfg.d - 1) / 2;
        if (a.upper.size() != need) throw ConfigError("A.upper", "expected " + std::to_string(need) + " entries");
    } else if (a.kind == "random" || a.kind == "random_per_particle") {
        if (!std::isfinite(a.scale) || a.scale < 0.0) throw ConfigError("A.scale", "must be finite and >= 0");
    } else if (a.kind != "zero") {
        throw ConfigError("A.kind", "unknown rotation kind '" + a.kind + "'");
    }
    if (a.kind != "explicit" && !a.upper.empty()) throw ConfigError("A.upper", "only valid for explicit A");

    if ((is_reduced(cfg.mode) || cfg.mode == Mode::Continuum) && a.kind == "random_per_particle")
        throw ConfigError("A", "mode " + to_string(cfg.mode) + " requires identical rotation terms");
    if (cfg.mode == Mode::ReducedW && w.kind == "mean_field")
        throw ConfigError("weights", "reduced_w requires linear weights");

    if (cfg.mode == Mode::Continuum) {
        if (!std::isfinite(cfg.K)) throw ConfigError("K", "must be finite");
        if (!cfg.z0.empty()) {
            if (cfg.z0.size() != static_cast<std::size_t>(cfg.d))
                throw ConfigError("z0", "expected " + std::to_string(cfg.d) + " entries");
            double r2 = 0.0;
            for (double x : cfg.z0) r2 += x * x;
            if (!(r2 < 1.0)) throw ConfigError("z0", "must lie in the open unit ball");
        }
    } else if (!cfg.z0.empty()) {
        throw ConfigError("z0", "only valid in continuum mode");
    }
}

std::string to_json(const ExperimentConfig& cfg, int indent) {
    ordered_json j;
    j["name"] = cfg.name;
    j["d"] = cfg.d;
    if (cfg.mode != Mode::Continuum || cfg.N > 0) j["N"] = cfg.N;
    j["mode"] = to_string(cfg.mode);
    ordered_json w;
    w["kind"] = cfg.weights.kind;
    if (cfg.weights.kind == "explicit") w["values"] = cfg.weights.values;
    if (cfg.weights.kind == "majority") w["dominant"] = cfg.weights.dominant;
    if (cfg.weights.kind == "mean_field") w["K"] = cfg.weights.K;
    j["weights"] = w;
    ordered_json a;
    a["kind"] = cfg.A.kind;
    if (cfg.A.kind == "random" || cfg.A.kind == "random_per_particle") {
        a["scale"] = cfg.A.scale;
        a["seed"] = cfg.A.seed.value_or(cfg.seed);
    }
    if (cfg.A.kind == "explicit") a["upper"] = cfg.A.upper;
    j["A"] = a;
    j["h"] = cfg.h;
    j["t_end"] = cfg.t_end;
    j["stride"] = cfg.stride;
    j["seed"] = cfg.seed;
    j["projection"] = cfg.projection;
    j["pair_metrics"] = cfg.pair_metrics;
    j["theorem_mode"] = cfg.theorem_mode;
    if (cfg.mode == Mode::Continuum) {
        j["K"] = cfg.K;
        if (!cfg.z0.empty()) j["z0"] = cfg.z0;
    }
    if (!cfg.output.empty()) j["output"] = cfg.output;
    return j.dump(indent);
}

WeightSpec build_weights(const ExperimentConfig& cfg) {
    const auto& w = cfg.weights;
    if (w.kind == "equal") return WeightSpec::equal(cfg.N);
    if (w.kind == "gaussian_riemann") return WeightSpec::gaussian_riemann(cfg.N);
    if (w.kind == "majority") return WeightSpec::majority(cfg.N, w.dominant);
    if (w.kind == "explicit") return WeightSpec::explicit_weights(Eigen::Map<const Vec>(w.values.data(), cfg.N));
    throw ConfigError("weights", "not a linear weighting");
}

OrderParameterSpec build_order_parameter(const ExperimentConfig& cfg) {
    if (cfg.weights.kind == "mean_field") return OrderParameterSpec::mean_field(cfg.weights.K);
    return OrderParameterSpec::linear(build_weights(cfg));
}

RotationTerms build_rotation(const ExperimentConfig& cfg) {
    const auto& a = cfg.A;
    const std::uint64_t seed = a.seed.value_or(cfg.seed);
    if (a.kind == "zero") return RotationTerms::shared(AntisymmetricMatrix::zero(cfg.d));
    if (a.kind == "explicit")
        return RotationTerms::shared(AntisymmetricMatrix(cfg.d, Eigen::Map<const Vec>(a.upper.data(), a.upper.size())));
    if (a.kind == "random") {
        Rng rng = make_rng(seed, 2);
        return RotationTerms::shared(random_antisymmetric(cfg.d, a.scale, rng));
    }
    // One stream per particle index, so the draw does not depend on order.
    std::vector<AntisymmetricMatrix> terms;
    for (int i = 0; i < cfg.N; ++i) {
        Rng rng = make_rng(seed, 1000 + static_cast<std::uint64_t>(i));
        terms.push_back(random_antisymmetric(cfg.d, a.scale, rng));
    }
    return RotationTerms::per_particle(std::move(terms));
}

Configuration initial_configuration(const ExperimentConfig& cfg) {
    Rng rng = make_rng(cfg.seed, 1);
    return random_configuration(cfg.d, cfg.N, rng);
}

BallPoint initial_continuum_state(const ExperimentConfig& cfg) {
    if (!cfg.z0.empty()) return BallPoint(Eigen::Map<const Vec>(cfg.z0.data(), cfg.d));
    Rng rng = make_rng(cfg.seed, 3);
    return BallPoint(random_ball_point(cfg.d, 0.5, rng));
}

ExperimentConfig preset(std::string_view name) {
    ExperimentConfig cfg;
    cfg.name = std::string(name);
    cfg.d = 3;
    cfg.N = 100;
    cfg.mode = Mode::Full;
    cfg.h = 0.01;
    cfg.t_end = 40.0;
    cfg.stride = 100;
    cfg.seed = 1;
    cfg.theorem_mode = true;
    if (name == "fig1") {
        cfg.weights.kind = "equal";
    } else if (name == "fig2") {
        cfg.weights.kind = "gaussian_riemann";
    } else if (name == "fig3") {
        cfg.weights.kind = "majority";
        cfg.weights.dominant = 0.6;
        cfg.h = -0.01;
        cfg.t_end = -40.0;
    } else {
        throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
    }
    return cfg;
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3"}; }

}  // namespace ksphere::harness
