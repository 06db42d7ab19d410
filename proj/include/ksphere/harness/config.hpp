#pragma once

#include "ksphere/dynamics.hpp"
#include "ksphere/errors.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ksphere::harness {

inline constexpr const char* kVersion = "0.1.0";

enum class Mode { Full, ReducedW, ReducedWZeta, ReducedZZeta, Continuum };

std::string to_string(Mode m);
Mode parse_mode(std::string_view s);

/// Configuration error naming the offending field (dotted path).
class ConfigError : public InvalidInput {
public:
    ConfigError(std::string field, const std::string& message)
        : InvalidInput(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct WeightsConfig {
    // equal | explicit | gaussian_riemann | majority | mean_field
    std::string kind = "equal";
    std::vector<double> values;
    double dominant = 0.6;
    double K = 1.0;
};

struct RotationConfig {
    // zero | random | random_per_particle | explicit
    std::string kind = "zero";
    double scale = 1.0;
    std::optional<std::uint64_t> seed;  // defaults to the experiment seed
    std::vector<double> upper;          // explicit: row-major upper triangle
};

struct ExperimentConfig {
    std::string name;
    int d = 3;
    int N = 0;
    Mode mode = Mode::Full;
    WeightsConfig weights;
    RotationConfig A;
    double h = 0.01;
    double t_end = 0.0;
    long long stride = 1;
    std::uint64_t seed = 0;
    bool projection = true;
    bool pair_metrics = true;
    // Weights must be a normalized linear weighting.
    bool theorem_mode = false;
    // Continuum mode only.
    double K = 1.0;
    std::vector<double> z0;
    std::string output;
};

/// Parses a JSON document; unknown keys, wrong types and invariant violations
/// raise ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

/// Config as JSON with every default filled in, including the rotation seed.
std::string to_json(const ExperimentConfig& cfg, int indent = -1);

OrderParameterSpec build_order_parameter(const ExperimentConfig& cfg);
// Linear weights; throws ConfigError for a mean-field spec.
WeightSpec build_weights(const ExperimentConfig& cfg);
RotationTerms build_rotation(const ExperimentConfig& cfg);
// Random points from stream 1 of the experiment seed.
Configuration initial_configuration(const ExperimentConfig& cfg);
// Continuum start: z0 if given, otherwise a random point of radius <= 0.5.
BallPoint initial_continuum_state(const ExperimentConfig& cfg);

/// Built-in presets fig1, fig2, fig3.
ExperimentConfig preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace ksphere::harness
