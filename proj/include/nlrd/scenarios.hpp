#pragma once

// Built-in scenario library.

#include <functional>
#include <string>
#include <vector>

#include "nlrd/config.hpp"
#include "nlrd/grid.hpp"
#include "nlrd/model.hpp"

namespace nlrd {

struct Scenario {
    std::string name;
    std::string description;
    std::function<RunConfig()> defaults;
    std::function<PerturbedFamily(const RunConfig&)> build;
    std::function<FieldD(const Grid&)> initial_datum;
};

// Stable order.
const std::vector<Scenario>& scenarios();
// Throws std::out_of_range for unknown names.
const Scenario& find_scenario(const std::string& name);

RunConfig default_config(const std::string& scenario);
PerturbedFamily build_family(const RunConfig& config);

// mu rule used when the config gives no fixed mu: mu_fraction * m * lambda_1 with
// m the smallest viscosity floor over the schedule and the limit.
double resolve_mu(const RunConfig& config, double m);

// Linear reaction f(u) = -u, a = 1, h_eta = h_0 + eta g with h_0 = amplitude sin(pi x)
// and g = 5 sin(2 pi x), both constant in time. Not part of the registry.
PerturbedFamily linear_forced_family(const Grid& grid, std::vector<double> eta_schedule, double amplitude = 10.0);

// Problem of the heat benchmark: a = 1, f = 0 (certificate valid on |s| <= 10), h = 0.
ProblemSpec heat_spec(double length);

}  // namespace nlrd
