#include "nlrd/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nlrd/attractor.hpp"
#include "nlrd/conditions.hpp"
#include "nlrd/csv.hpp"
#include "nlrd/errors.hpp"
#include "nlrd/estimates.hpp"
#include "nlrd/scenarios.hpp"

namespace nlrd {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

IntegrationOptions integration_options(const RunConfig& c, bool store_fields = false) {
    return IntegrationOptions{c.time.blowup_ceiling, c.time.max_retries, store_fields};
}

class Session {
public:
    Session(const RunConfig& config, std::ostream& log)
        : config_(config), log_(log), dir_(resolve_output_dir(config)) {
        std::filesystem::create_directories(dir_);
    }

    std::ofstream open(const std::string& name) {
        const auto path = dir_ / name;
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        outcome_.artifacts.push_back(path);
        return os;
    }

    void gate(const std::string& name, bool passed) {
        outcome_.gates.push_back({name, passed});
        log_ << "gate " << name << ": " << (passed ? "pass" : "FAIL") << '\n';
    }

    RunOutcome finish() {
        const bool all = std::all_of(outcome_.gates.begin(), outcome_.gates.end(), [](const Gate& g) { return g.passed; });
        outcome_.exit_code = all ? 0 : 1;
        for (const auto& a : outcome_.artifacts) log_ << "wrote " << a.string() << '\n';
        return outcome_;
    }

    const RunConfig& config() const { return config_; }
    std::ostream& log() { return log_; }

private:
    const RunConfig& config_;
    std::ostream& log_;
    std::filesystem::path dir_;
    RunOutcome outcome_;
};

std::vector<double> t_sequence(double start, double step, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(start - step * k);
    return out;
}

// Members first (schedule order), then the limit as eta = 0.
std::vector<std::pair<double, ProblemSpec>> all_members(const PerturbedFamily& family) {
    std::vector<std::pair<double, ProblemSpec>> out;
    for (double eta : family.schedule()) out.emplace_back(eta, family.spec_at(eta));
    out.emplace_back(0.0, family.limit_spec());
    return out;
}

ConditionVerdict check_A1_family(const PerturbedFamily& family) {
    ConditionVerdict v;
    v.assumption = "A1";
    std::vector<Verdict> parts;
    for (const auto& [eta, spec] : all_members(family)) {
        const ConditionVerdict one = check_A1(spec, 10.0, 2001);
        parts.push_back(one.verdict);
        v.add("A1_member_pass", eta, one.passed() ? 1.0 : 0.0);
        if (!one.passed()) v.note += "eta = " + format_real(eta) + ": " + one.note + "; ";
    }
    v.thresholds = {{"range", 10.0}, {"samples", 2001.0}};
    v.verdict = combine(parts);
    return v;
}

std::vector<ConditionVerdict> precondition_suite(const PerturbedFamily& family, const Grid& grid,
                                                 const RunConfig& c) {
    const double tol = c.experiment.condition_tolerance;
    const auto& probes = family.schedule();
    const Dictionary dictionary = default_dictionary(grid, c.experiment.seed);
    const auto times = t_sequence(c.experiment.target_time, 1.0, 21);
    std::vector<ConditionVerdict> out;
    out.push_back(check_A1_family(family));
    out.push_back(check_A2(family, grid, probes, tol, c.grid.eigenvalue));
    if (probes.size() >= 4) out.push_back(check_A3(family, grid, 10.0, dictionary, probes, tol));
    out.push_back(check_A4(family, grid, A4Mode::strong_dual, {-10.0, 0.0}, dictionary, probes, tol));
    out.push_back(check_A5(family, grid, family.mu_zero(), times, probes, tol, {4, c.grid.eigenvalue}));
    return out;
}

// ---------------------------------------------------------------------------

void run_energy_audit(Session& s, const PerturbedFamily& family, const FieldD& datum) {
    const auto& c = s.config();
    const double tau = c.experiment.target_time - c.time.horizon;
    auto report = s.open("report.txt");
    report << "energy audit on [" << format_real(tau) << ", " << format_real(c.experiment.target_time)
           << "], dt = " << format_real(c.time.dt) << '\n';
    double worst = 0.0;
    std::size_t index = 0;
    for (const auto& [eta, spec] : all_members(family)) {
        const Trajectory traj = integrate(spec, datum, tau, c.experiment.target_time, c.time.dt,
                                          integration_options(c));
        auto csv = s.open("trajectory_" + std::to_string(index++) + ".csv");
        csv << "# eta = " << format_real(eta) << '\n';
        write_csv(csv, traj);
        double member = 0.0;
        for (std::size_t k = 1; k < traj.times.size(); ++k) {
            const double scale = std::max({1.0, traj.l2[k - 1] * traj.l2[k - 1], traj.l2[k] * traj.l2[k]});
            member = std::max(member, std::abs(traj.residual[k]) / scale);
        }
        report << "  eta = " << format_real(eta) << ": max |r| / max(1, |u|^2) = " << format_real(member) << '\n';
        worst = std::max(worst, member);
    }
    s.gate("energy-residual", worst < 1e-10);
}

void run_gronwall(Session& s, const PerturbedFamily& family, const Grid& grid, const FieldD& datum) {
    const auto& c = s.config();
    const double tau = c.experiment.target_time - c.time.horizon;
    auto csv = s.open("gronwall.csv");
    auto report = s.open("report.txt");
    csv << "eta,t,normsq,bound\n";
    bool ok = true;
    for (const auto& [eta, spec] : all_members(family)) {
        const double mu = eta == 0.0 ? family.mu_zero() : family.mu_at(eta);
        const GronwallAudit audit =
            gronwall_audit(spec, grid, mu, datum, tau, c.experiment.target_time, c.time.dt, integration_options(c));
        for (std::size_t k = 0; k < audit.times.size(); ++k)
            write_csv_row(csv, {eta, audit.times[k], audit.norm_squared[k], audit.bounds[k]});
        report << "eta = " << format_real(eta) << ": mu = " << format_real(mu)
               << ", worst excess = " << format_real(audit.worst_excess) << '\n';
        ok = ok && audit.dominated();
    }
    s.gate("gronwall-domination", ok);
}

void run_absorbing(Session& s, const PerturbedFamily& family, const Grid& grid) {
    const auto& c = s.config();
    const double t = c.experiment.target_time;
    const double tol = c.experiment.condition_tolerance;
    const double step = 5.0 / (family.viscosity_floor() * first_eigenvalue(grid, c.grid.eigenvalue));
    // Geometric spacing reaches far past any compactly supported forcing pulse.
    std::vector<double> taus;
    for (int k = 0; k < 20; ++k) taus.push_back(t - step * std::ldexp(1.0, k));
    auto report = s.open("report.txt");
    bool ok = true;
    for (double eta : family.schedule()) {
        const ProblemSpec spec = instantiate(family, eta);
        const AbsorbingRadius radius(spec, grid, family.mu_at(eta), eta, c.grid.eigenvalue);
        const double floor = 1.0 + 2.0 * spec.kappa() * spec.measure() / family.mu_at(eta);
        const ConditionVerdict v =
            tempered_membership([&](double x) { return radius.squared(x); }, family.mu_at(eta), taus, tol);
        bool above = true;
        for (double x : taus) above = above && radius.squared(x) >= floor;
        report << "eta = " << format_real(eta) << '\n';
        write_report(report, v);
        ok = ok && v.passed() && above;
    }
    s.gate("tempered-radii", ok);

    const double eta = family.schedule().back();
    const AbsorbingRadius radius(instantiate(family, eta), grid, family.mu_at(eta), eta, c.grid.eigenvalue);
    std::vector<double> times, r2, psi2;
    const bool with_psi = family.schedule().size() >= 4;
    double mu_lower = inf;
    const auto& sched = family.schedule();
    for (std::size_t i = sched.size() / 2; i < sched.size(); ++i) mu_lower = std::min(mu_lower, family.mu_at(sched[i]));
    const double c0 = 2.0 + 2.0 * family.kappa() * family.domain_length() / mu_lower;
    for (int k = 0; k <= 200; ++k) {
        const double x = t - 5.0 * c.time.horizon + 5.0 * c.time.horizon * k / 200.0;
        times.push_back(x);
        r2.push_back(radius.squared(x));
        psi2.push_back(with_psi ? psi_envelope_squared(family, grid, c0, x, sched, {4, c.grid.eigenvalue})
                                : std::numeric_limits<double>::quiet_NaN());
    }
    auto csv = s.open("radius.csv");
    csv << "# eta = " << format_real(eta) << ", c0 = " << format_real(c0) << '\n';
    write_radius_csv(csv, times, r2, psi2);
}

void run_conditions(Session& s, const PerturbedFamily& family, const Grid& grid) {
    const auto& c = s.config();
    const double tol = c.experiment.condition_tolerance;
    const auto& probes = family.schedule();
    std::vector<ConditionVerdict> all = precondition_suite(family, grid, c);
    const Dictionary dictionary = default_dictionary(grid, c.experiment.seed);
    all.push_back(check_A4(family, grid, A4Mode::weak_l2, {-1.0, 0.0}, dictionary, probes, tol));
    std::optional<SufficientConditionReport> sufficient;
    if (probes.size() >= 8) {
        all.push_back(mu_limits(family, probes, tol).verdict);
        sufficient = sufficient_condition_report(family, grid, probes, t_sequence(c.experiment.target_time, 1.0, 21), tol,
                                                 {{-10.0, 0.0}, 4, c.grid.eigenvalue});
    }
    if (probes.size() >= 4) all.push_back(check_uniform_tail(family, grid, probes));

    auto report = s.open("conditions_report.txt");
    for (const auto& v : all) write_report(report, v);
    if (sufficient) write_report(report, *sufficient);
    auto csv = s.open("conditions_evidence.csv");
    write_evidence_csv(csv, all);
    for (const auto& v : all) {
        const std::string& a = v.assumption;
        if (a == "A1" || a == "A2" || a == "A3" || a == "A4-strong" || a == "A5") s.gate(a, v.passed());
    }
    if (probes.size() < 4) report << "A3 not audited: needs at least 4 probes\n";
}

void run_attractor(Session& s, const PerturbedFamily& family, const Grid& grid) {
    const auto& c = s.config();
    const double eta = family.schedule().back();
    const ProblemSpec spec = instantiate(family, eta);
    const AbsorbingRadius radius(spec, grid, family.mu_at(eta), eta, c.grid.eigenvalue);
    OmegaLimitOptions opt{c.time.dt, c.experiment.cloud_size, c.experiment.n_modes, c.experiment.seed,
                          c.experiment.tolerance, integration_options(c)};
    const auto schedule = default_pullback_schedule(spec, grid, c.experiment.target_time, c.experiment.pullback_count);
    auto report = s.open("report.txt");
    try {
        const AttractorCloud cloud = omega_limit(spec, grid, radius, c.experiment.target_time, schedule, opt);
        auto csv = s.open("cloud.csv");
        write_csv(csv, cloud);
        const double r = radius(c.experiment.target_time);
        report << "eta = " << format_real(eta) << ", stabilization metric = " << format_real(cloud.stabilization_metric)
               << ", max |u| = " << format_real(cloud.max_norm()) << ", R_eta(t) = " << format_real(r) << '\n';
        s.gate("stabilized", true);
        s.gate("absorbing-inclusion", cloud.max_norm() <= r + 1e-9);
    } catch (const NoStabilization& e) {
        report << e.what() << '\n';
        s.gate("stabilized", false);
    }
}

void run_robustness(Session& s, const PerturbedFamily& family, const Grid& grid) {
    const auto& c = s.config();
    const auto pre = precondition_suite(family, grid, c);
    RobustnessOptions opt;
    opt.t = c.experiment.target_time;
    opt.omega = {c.time.dt, c.experiment.cloud_size, c.experiment.n_modes, c.experiment.seed, c.experiment.tolerance,
                 integration_options(c)};
    opt.pullback_count = c.experiment.pullback_count;
    opt.threshold_ratio = c.experiment.threshold_ratio;
    opt.envelope = {4, c.grid.eigenvalue};
    const RobustnessReport r = robustness_experiment(family, grid, family.schedule(), opt, pre);

    auto report = s.open("report.txt");
    for (const auto& v : pre) write_report(report, v);
    write_report(report, r);
    auto csv = s.open("robustness.csv");
    write_csv(csv, r);
    auto evidence = s.open("conditions_evidence.csv");
    write_evidence_csv(evidence, pre);
    if (!r.limit_cloud.points.empty()) {
        auto cloud = s.open("limit_cloud.csv");
        write_csv(cloud, r.limit_cloud);
    }
    s.gate("preconditions", r.preconditions_passed);
    s.gate("robustness", r.verdict.passed());
    s.gate("absorbing-inclusion", r.inclusion_holds);
}

void run_finite_time(Session& s, const PerturbedFamily& family, const Grid& grid, const FieldD& datum) {
    const auto& c = s.config();
    const double tau = c.experiment.target_time - c.time.horizon;
    std::vector<double> checkpoints;
    for (int k = 1; k <= 4; ++k) checkpoints.push_back(tau + c.time.horizon * k / 4.0);
    const FiniteTimeReport r = finite_time_convergence_experiment(family, grid, tau, datum, checkpoints,
                                                                  family.schedule(), c.time.dt, integration_options(c));
    auto csv = s.open("finite_time.csv");
    write_csv(csv, r);
    auto report = s.open("report.txt");
    write_report(report, r.verdict);
    report << "observed order " << format_real(r.observed_order) << ", dt error " << format_real(r.dt_error) << '\n';
    s.gate("error-decreasing", r.verdict.passed());
    s.gate("norm-convergence", r.norm_gaps_decreasing);
}

void run_noncommutation(Session& s, const PerturbedFamily& family, const Grid& grid) {
    const auto& c = s.config();
    const auto times = t_sequence(0.0, 1.0, 11);
    const NoncommutationTable table = noncommutation_demo(family.mu_zero(), family.schedule(), times);
    auto csv = s.open("noncommutation.csv");
    write_csv(csv, table);
    auto report = s.open("report.txt");
    write_report(report, table.verdict);
    if (family.schedule().size() >= 8) {
        const SufficientConditionReport r = sufficient_condition_report(
            family, grid, family.schedule(), times, c.experiment.condition_tolerance, {{-10.0, 0.0}, 4, c.grid.eigenvalue});
        write_report(report, r);
        report << "noncommutation flagged: " << (r.noncommutation ? "yes" : "no") << '\n';
    }
    s.gate("iterated-limits", table.verdict.passed());
}

void run_refinement(Session& s) {
    const auto& c = s.config();
    const RefinementStudy study = heat_refinement_study(c.grid.nodes, c.time.horizon);
    auto csv = s.open("refinement.csv");
    csv << "kind,nodes,dt,error\n";
    for (std::size_t i = 0; i < study.nodes.size(); ++i)
        csv << "space," << study.nodes[i] << ',' << format_real(study.spatial_dt) << ','
            << format_real(study.spatial_errors[i]) << '\n';
    for (std::size_t i = 0; i < study.dts.size(); ++i)
        csv << "time," << study.temporal_nodes << ',' << format_real(study.dts[i]) << ','
            << format_real(study.temporal_errors[i]) << '\n';
    auto report = s.open("report.txt");
    double space = inf, time = inf;
    for (double o : study.spatial_orders) {
        report << "spatial order " << format_real(o) << '\n';
        space = std::min(space, o);
    }
    for (double o : study.temporal_orders) {
        report << "temporal order " << format_real(o) << '\n';
        time = std::min(time, o);
    }
    s.gate("spatial-order", space >= 1.9);
    s.gate("temporal-order", time >= 0.9);
}

}  // namespace

std::filesystem::path resolve_output_dir(const RunConfig& config) {
    std::filesystem::path dir(config.experiment.output_dir);
    if (dir.is_absolute()) return dir;
    if (const char* root = std::getenv(output_root_env); root && *root) return std::filesystem::path(root) / dir;
    return dir;
}

RunOutcome run_scenario(const RunConfig& config, std::ostream& log) {
    validate(config);
    Session s(config, log);
    const Grid grid = config.make_grid();
    const PerturbedFamily family = build_family(config);
    const FieldD datum = find_scenario(config.family.scenario).initial_datum(grid);
    {
        auto cfg = s.open("config.ini");
        cfg << emit_config(config);
    }
    log << "scenario " << config.family.scenario << ", experiment " << to_string(config.experiment.kind) << '\n';
    switch (config.experiment.kind) {
        case ExperimentKind::energy_audit: run_energy_audit(s, family, datum); break;
        case ExperimentKind::gronwall: run_gronwall(s, family, grid, datum); break;
        case ExperimentKind::absorbing: run_absorbing(s, family, grid); break;
        case ExperimentKind::conditions: run_conditions(s, family, grid); break;
        case ExperimentKind::attractor: run_attractor(s, family, grid); break;
        case ExperimentKind::robustness: run_robustness(s, family, grid); break;
        case ExperimentKind::finite_time: run_finite_time(s, family, grid, datum); break;
        case ExperimentKind::noncommutation: run_noncommutation(s, family, grid); break;
        case ExperimentKind::refinement: run_refinement(s); break;
    }
    return s.finish();
}

// ---------------------------------------------------------------------------

EnergyAudit energy_audit(const ProblemSpec& spec, const FieldD& u_tau, double tau, double t_end, double dt,
                         const IntegrationOptions& options) {
    IntegrationOptions opt = options;
    opt.store_fields = false;
    const Trajectory traj = integrate(spec, u_tau, tau, t_end, dt, opt);
    EnergyAudit out;
    out.steps = traj.steps();
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
        const double scale = std::max({1.0, traj.l2[k - 1] * traj.l2[k - 1], traj.l2[k] * traj.l2[k]});
        out.worst_ratio = std::max(out.worst_ratio, std::abs(traj.residual[k]) / scale);
    }
    return out;
}

GronwallAudit gronwall_audit(const ProblemSpec& spec, const Grid& grid, double mu, const FieldD& u_tau, double tau,
                             double t_end, double dt, const IntegrationOptions& options) {
    IntegrationOptions opt = options;
    opt.store_fields = false;
    const Trajectory traj = integrate(spec, u_tau, tau, t_end, dt, opt);
    GronwallAudit out;
    out.worst_excess = -inf;
    const double u0 = l2_norm_squared(u_tau);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double bound = gronwall_bound(spec, grid, mu, u0, tau, traj.times[k]);
        const double normsq = traj.l2[k] * traj.l2[k];
        out.times.push_back(traj.times[k]);
        out.norm_squared.push_back(normsq);
        out.bounds.push_back(bound);
        out.worst_excess = std::max(out.worst_excess, normsq - bound - 1e-8 * (1.0 + bound));
    }
    return out;
}

double heat_error(std::size_t nodes, double dt, double t_end, bool richardson) {
    const Grid grid(1.0, nodes);
    const DiscreteProblem problem(heat_spec(1.0), grid);
    const Vector<double> profile = sine_mode(grid, 1).values();
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    if (steps == 0 || std::abs(static_cast<double>(steps) * dt - t_end) > 1e-9 * t_end)
        throw std::invalid_argument("heat_error: t_end must be a multiple of dt");
    FieldD coarse = sine_mode(grid, 1);
    FieldD fine = coarse;
    double worst = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        coarse = imex_step(problem, coarse, t, dt, inf);
        Vector<double> approx = coarse.values();
        if (richardson) {
            fine = imex_step(problem, fine, t, 0.5 * dt, inf);
            fine = imex_step(problem, fine, t + 0.5 * dt, 0.5 * dt, inf);
            approx = 2.0 * fine.values() - coarse.values();
        }
        const double exact = std::exp(-std::numbers::pi * std::numbers::pi * (t + dt));
        const double err = std::sqrt(grid.spacing()) * (approx - exact * profile).norm();
        worst = std::max(worst, err);
    }
    return worst;
}

RefinementStudy heat_refinement_study(std::size_t base_nodes, double t_end) {
    RefinementStudy s;
    s.spatial_dt = 1e-5;
    for (std::size_t n = base_nodes, i = 0; i < 3; ++i, n = 2 * (n + 1) - 1) {
        s.nodes.push_back(n);
        s.spatial_errors.push_back(heat_error(n, s.spatial_dt, t_end, true));
    }
    s.temporal_nodes = s.nodes.back();
    s.dts = {t_end / 25.0, t_end / 50.0, t_end / 100.0};
    for (double dt : s.dts) s.temporal_errors.push_back(heat_error(s.temporal_nodes, dt, t_end, false));
    for (std::size_t i = 1; i < 3; ++i) {
        s.spatial_orders.push_back(std::log2(s.spatial_errors[i - 1] / s.spatial_errors[i]));
        s.temporal_orders.push_back(std::log2(s.temporal_errors[i - 1] / s.temporal_errors[i]));
    }
    return s;
}

}  // namespace nlrd
