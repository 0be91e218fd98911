#pragma once

// Run configuration: plain-text sections with `key = value` lines.
//
//   [grid]        length, nodes, eigenvalue
//   [time]        dt, blowup_ceiling, max_retries, horizon
//   [family]      scenario, eta_schedule, mu | mu_fraction, forcing_amplitude, perturbation_scale
//   [experiment]  kind, target_time, tolerance, condition_tolerance, cloud_size, n_modes,
//                 seed, pullback_count, threshold_ratio, output_dir
//
// '#' starts a comment. Keys that are absent take the scenario defaults.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlrd/grid.hpp"

namespace nlrd {

enum class ExperimentKind {
    energy_audit,
    gronwall,
    absorbing,
    conditions,
    attractor,
    robustness,
    finite_time,
    noncommutation,
    refinement,
};

const char* to_string(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> parse_experiment_kind(std::string_view text);

struct GridConfig {
    double length = 1.0;
    std::size_t nodes = 128;
    EigenvalueMode eigenvalue = EigenvalueMode::discrete;
    bool operator==(const GridConfig&) const = default;
};

struct TimeConfig {
    double dt = 1e-3;
    double blowup_ceiling = 1e8;
    int max_retries = 6;
    double horizon = 2.0;  // integration length for trajectory experiments
    bool operator==(const TimeConfig&) const = default;
};

struct FamilyConfig {
    std::string scenario;
    std::vector<double> eta_schedule;
    std::optional<double> mu;   // fixed mu_eta; otherwise mu_fraction * m * lambda_1
    double mu_fraction = 1.0;
    double forcing_amplitude = 10.0;
    double perturbation_scale = 1.0;
    bool operator==(const FamilyConfig&) const = default;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::conditions;
    double target_time = 0.0;
    double tolerance = 1e-6;            // attractor stabilization
    double condition_tolerance = 0.2;   // limit tests of the condition audits
    std::size_t cloud_size = 33;
    int n_modes = 8;
    std::uint64_t seed = 1;
    std::size_t pullback_count = 10;
    double threshold_ratio = 0.05;
    std::string output_dir = "out";
    bool operator==(const ExperimentConfig&) const = default;
};

struct RunConfig {
    GridConfig grid;
    TimeConfig time;
    FamilyConfig family;
    ExperimentConfig experiment;
    bool operator==(const RunConfig&) const = default;

    Grid make_grid() const { return Grid(grid.length, grid.nodes); }
};

struct ConfigIssue {
    int line = 0;  // 0 when the issue is not tied to a line
    std::string key;
    std::string reason;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& kind, std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

class ParseError : public ConfigError {
public:
    explicit ParseError(std::vector<ConfigIssue> issues) : ConfigError("parse error", std::move(issues)) {}
};

class ValidationError : public ConfigError {
public:
    explicit ValidationError(std::vector<ConfigIssue> issues) : ConfigError("validation error", std::move(issues)) {}
};

// Parses and validates. Missing keys are filled from the scenario's defaults.
RunConfig parse_config(std::string_view text);
// Every key, fixed order, doubles with 17 significant digits.
std::string emit_config(const RunConfig& config);
// Throws ValidationError listing every problem found.
void validate(const RunConfig& config);

}  // namespace nlrd
