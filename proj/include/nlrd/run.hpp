#pragma once

// Experiment orchestration behind `nlrd run`.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlrd/config.hpp"
#include "nlrd/model.hpp"
#include "nlrd/solver.hpp"

namespace nlrd {

// Overrides the root that relative output directories resolve against.
inline constexpr const char* output_root_env = "NLRD_OUTPUT_ROOT";

std::filesystem::path resolve_output_dir(const RunConfig& config);

struct Gate {
    std::string name;
    bool passed;
};

struct RunOutcome {
    int exit_code = 0;  // 0 all gates passed, 1 some gate failed
    std::vector<Gate> gates;
    std::vector<std::filesystem::path> artifacts;
};

// Runs the configured experiment and writes CSV and text artifacts. Module errors propagate.
RunOutcome run_scenario(const RunConfig& config, std::ostream& log);

// max over steps of |r_k| / max(1, |u^k|^2, |u^{k+1}|^2)
struct EnergyAudit {
    double worst_ratio = 0.0;
    std::size_t steps = 0;
};

EnergyAudit energy_audit(const ProblemSpec& spec, const FieldD& u_tau, double tau, double t_end, double dt,
                         const IntegrationOptions& options = {});

struct GronwallAudit {
    std::vector<double> times;
    std::vector<double> norm_squared;
    std::vector<double> bounds;
    double worst_excess = 0.0;  // max of |u|^2 - bound - 1e-8 (1 + bound); <= 0 when dominated
    bool dominated() const noexcept { return worst_excess <= 0.0; }
};

GronwallAudit gronwall_audit(const ProblemSpec& spec, const Grid& grid, double mu, const FieldD& u_tau, double tau,
                             double t_end, double dt, const IntegrationOptions& options = {});

// Heat equation a = 1, f = 0, h = 0, u_0 = sin(pi x) on (0, 1): maximum over the
// time steps of the discrete L2 error against e^{-pi^2 t} sin(pi x). With
// `richardson` the time error is removed by combining steps dt and dt/2.
double heat_error(std::size_t nodes, double dt, double t_end, bool richardson);

struct RefinementStudy {
    std::vector<std::size_t> nodes;
    double spatial_dt = 0.0;
    std::vector<double> spatial_errors;
    std::vector<double> spatial_orders;
    std::size_t temporal_nodes = 0;
    std::vector<double> dts;
    std::vector<double> temporal_errors;
    std::vector<double> temporal_orders;
};

RefinementStudy heat_refinement_study(std::size_t base_nodes = 127, double t_end = 0.1);

}  // namespace nlrd
