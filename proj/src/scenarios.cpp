#include "nlrd/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlrd {

namespace {

std::vector<double> dyadic(int first, int last) {
    std::vector<double> out;
    for (int k = first; k <= last; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

WeightDesc unit_weight() { return WeightDesc{SpatialProfile::constant(1.0)}; }

FieldD mixed_datum(const Grid& grid) {
    const Vector<double> v =
        2.0 * sine_mode(grid, 1).values() + sine_mode(grid, 2).values() + 0.5 * sine_mode(grid, 5).values();
    return FieldD(grid, v);
}

// Builds the family twice: first to learn m, then with the resolved mu rule.
PerturbedFamily assemble(const RunConfig& config, PerturbedFamily::SpecRule rule, ProblemSpec limit) {
    const PerturbedFamily probe(config.family.eta_schedule, rule, [](double) { return 1.0; }, limit, 1.0);
    const double mu = resolve_mu(config, probe.viscosity_floor());
    return PerturbedFamily(config.family.eta_schedule, std::move(rule), [mu](double) { return mu; }, std::move(limit),
                           mu);
}

RunConfig base_defaults(const std::string& name, ExperimentKind kind, std::vector<double> schedule) {
    RunConfig c;
    c.family.scenario = name;
    c.family.eta_schedule = std::move(schedule);
    c.experiment.kind = kind;
    c.experiment.output_dir = "out/" + name;
    return c;
}

// ---------------------------------------------------------------------------

PerturbedFamily build_heat(const RunConfig& config) {
    const ProblemSpec spec = heat_spec(config.grid.length);
    return assemble(config, [spec](double) { return spec; }, spec);
}

PerturbedFamily build_linear_decay(const RunConfig& config) {
    const ProblemSpec spec(ViscosityDesc::constant(1.0), ReactionDesc::odd_power(1.0, 2.0), ForcingDesc::none(),
                           unit_weight(), config.grid.length);
    return assemble(config, [spec](double) { return spec; }, spec);
}

PerturbedFamily build_nd16(const RunConfig& config) {
    const double L = config.grid.length;
    const double A = config.family.forcing_amplitude;
    const double scale = config.family.perturbation_scale;
    const ViscosityDesc a = ViscosityDesc::rational_bump(1.0, 0.5, 0.0, 1.0);
    const ReactionDesc f = ReactionDesc::odd_power(1.0, 4.0);
    const ProblemSpec limit(a, f, ForcingDesc::none(), unit_weight(), L);
    auto rule = [=](double eta) {
        ForcingDesc h({ForcingTerm{SpatialProfile::sine(1, A),
                                   TemporalProfile::scaled(TemporalProfile::constant(1.0), scale * eta)}},
                      L);
        return ProblemSpec(a, f, std::move(h), unit_weight(), L);
    };
    return assemble(config, rule, limit);
}

PerturbedFamily build_nonautonomous(const RunConfig& config) {
    const double L = config.grid.length;
    const double A = config.family.forcing_amplitude;
    const double scale = config.family.perturbation_scale;
    const ForcingTerm base{SpatialProfile::sine(1, A), TemporalProfile::exponential(1.0, 0.5)};
    const ProblemSpec limit(ViscosityDesc::constant(1.0), ReactionDesc::odd_power(1.0, 4.0), ForcingDesc({base}, L),
                            unit_weight(), L);
    // One certificate covers every member: |b| <= 2 scale eta <= 1 for eta <= 1/2.
    const double b_max = 2.0 * scale * 0.5;
    const ReactionCertificate uniform{std::max(2.0, b_max), 1.0, std::max(1.5, 1.5 * b_max), 0.5, 4.0};
    auto rule = [=](double eta) {
        const ViscosityDesc a = ViscosityDesc::rational_bump(1.0, 0.8 * scale * eta, 0.1, 0.5);
        const double b = 2.0 * scale * eta;
        const ReactionDesc f(OddPowerPlusBounded{1.0, 4.0, b},
                             b <= b_max ? uniform : ReactionDesc::canonical_certificate(OddPowerPlusBounded{1.0, 4.0, b}));
        const ForcingTerm extra{SpatialProfile::sine(2, 5.0 * scale),
                                TemporalProfile::scaled(TemporalProfile::exponential(1.0, 0.5), eta)};
        return ProblemSpec(a, f, ForcingDesc({base, extra}, L), unit_weight(), L);
    };
    return assemble(config, rule, limit);
}

PerturbedFamily build_moving_bump(const RunConfig& config) {
    const double L = config.grid.length;
    const Grid grid = config.make_grid();
    const ProblemSpec limit(ViscosityDesc::constant(1.0), ReactionDesc::odd_power(1.0, 4.0), ForcingDesc::none(),
                            unit_weight(), L);
    const PerturbedFamily probe(config.family.eta_schedule, [limit](double) { return limit; },
                                [](double) { return 1.0; }, limit, 1.0);
    const double mu = resolve_mu(config, probe.viscosity_floor());
    // e^{mu s} ||h_eta(s)||_*^2 = 1 on the support [-1/eta - 1, -1/eta].
    const double norm = dual_norm(SpatialProfile::sine(1, 1.0).sample(grid));
    auto rule = [=](double eta) {
        ForcingDesc h({ForcingTerm{SpatialProfile::sine(1, 1.0 / norm),
                                   TemporalProfile::bump(1.0, -1.0 / eta - 1.0, 1.0, -0.5 * mu)}},
                      L);
        return ProblemSpec(limit.viscosity(), limit.reaction(), std::move(h), limit.weight(), L);
    };
    return PerturbedFamily(config.family.eta_schedule, rule, [mu](double) { return mu; }, limit, mu);
}

std::vector<Scenario> make_registry() {
    std::vector<Scenario> out;
    out.push_back({"nd16_autonomous",
                   "h_eta = eta h with fixed bump viscosity and cubic reaction; autonomous limit h_0 = 0",
                   [] {
                       RunConfig c = base_defaults("nd16_autonomous", ExperimentKind::robustness, dyadic(1, 6));
                       c.experiment.pullback_count = 10;
                       return c;
                   },
                   build_nd16, mixed_datum});
    out.push_back({"nonautonomous_limit",
                   "exponential-in-time limit forcing with perturbed viscosity, reaction and forcing",
                   [] { return base_defaults("nonautonomous_limit", ExperimentKind::robustness, dyadic(1, 6)); },
                   build_nonautonomous, mixed_datum});
    out.push_back({"moving_bump_counterexample",
                   "unit-mass forcing pulse sliding to -inf as eta -> 0; limits in t and eta do not commute",
                   [] {
                       RunConfig c = base_defaults("moving_bump_counterexample", ExperimentKind::noncommutation,
                                                   dyadic(1, 8));
                       c.family.mu = 1.0;
                       c.experiment.condition_tolerance = 1e-6;
                       return c;
                   },
                   build_moving_bump, mixed_datum});
    out.push_back({"heat_benchmark", "linear heat equation with sin(pi x) datum; convergence-order study",
                   [] {
                       RunConfig c = base_defaults("heat_benchmark", ExperimentKind::refinement, {1.0});
                       c.grid.nodes = 127;
                       c.time.horizon = 0.1;
                       return c;
                   },
                   build_heat,
                   [](const Grid& g) { return sine_mode(g, 1); }});
    out.push_back({"linear_decay", "a = 1, f(u) = -u, h = 0: exponential decay to the trivial attractor",
                   [] { return base_defaults("linear_decay", ExperimentKind::gronwall, dyadic(1, 8)); },
                   build_linear_decay, mixed_datum});
    return out;
}

}  // namespace

const std::vector<Scenario>& scenarios() {
    static const std::vector<Scenario> registry = make_registry();
    return registry;
}

const Scenario& find_scenario(const std::string& name) {
    for (const auto& s : scenarios())
        if (s.name == name) return s;
    throw std::out_of_range("unknown scenario '" + name + "'");
}

RunConfig default_config(const std::string& scenario) { return find_scenario(scenario).defaults(); }

PerturbedFamily build_family(const RunConfig& config) { return find_scenario(config.family.scenario).build(config); }

double resolve_mu(const RunConfig& config, double m) {
    if (config.family.mu) return *config.family.mu;
    return config.family.mu_fraction * m * first_eigenvalue(config.make_grid(), config.grid.eigenvalue);
}

ProblemSpec heat_spec(double length) {
    // f = 0 admits no alpha2 > 0 globally; this certificate holds for |s| <= 10.
    const ReactionDesc zero(OddPower{0.0, 2.0}, ReactionCertificate{0.0, 1.0, 1.0, 1e-2, 2.0});
    return ProblemSpec(ViscosityDesc::constant(1.0), zero, ForcingDesc::none(), unit_weight(), length);
}

PerturbedFamily linear_forced_family(const Grid& grid, std::vector<double> eta_schedule, double amplitude) {
    const double L = grid.length();
    const ViscosityDesc a = ViscosityDesc::constant(1.0);
    const ReactionDesc f = ReactionDesc::odd_power(1.0, 2.0);
    const ForcingTerm base{SpatialProfile::sine(1, amplitude), TemporalProfile::constant(1.0)};
    const ProblemSpec limit(a, f, ForcingDesc({base}, L), unit_weight(), L);
    auto rule = [=](double eta) {
        const ForcingTerm g{SpatialProfile::sine(2, 5.0), TemporalProfile::scaled(TemporalProfile::constant(1.0), eta)};
        return ProblemSpec(a, f, ForcingDesc({base, g}, L), unit_weight(), L);
    };
    const double mu = first_eigenvalue(grid, EigenvalueMode::discrete);
    return PerturbedFamily(std::move(eta_schedule), rule, [mu](double) { return mu; }, limit, mu);
}

}  // namespace nlrd
