// Acceptance suite: one line per criterion, "criterion N <name>: PASS|FAIL (details)".
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nlrd/attractor.hpp"
#include "nlrd/conditions.hpp"
#include "nlrd/csv.hpp"
#include "nlrd/estimates.hpp"
#include "nlrd/run.hpp"
#include "nlrd/scenarios.hpp"

using namespace nlrd;
namespace fs = std::filesystem;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::vector<double> dyadic(int first, int last) {
    std::vector<double> out;
    for (int k = first; k <= last; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

std::vector<double> times(int count) {
    std::vector<double> t;
    for (int k = 0; k < count; ++k) t.push_back(-static_cast<double>(k));
    return t;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

IntegrationOptions integration(const RunConfig& c) { return {c.time.blowup_ceiling, c.time.max_retries, false}; }

// ---------------------------------------------------------------------------

Outcome heat_benchmark() {
    const auto start = std::chrono::steady_clock::now();
    const RefinementStudy s = heat_refinement_study(127, 0.1);
    const double elapsed = seconds_since(start);
    const double space = *std::min_element(s.spatial_orders.begin(), s.spatial_orders.end());
    const double time = *std::min_element(s.temporal_orders.begin(), s.temporal_orders.end());
    return {space >= 1.9 && time >= 0.9 && elapsed < 60.0,
            "min spatial order " + num(space) + ", min temporal order " + num(time) + ", " + num(elapsed) + " s"};
}

Outcome energy_identity() {
    double worst = 0.0;
    std::size_t steps = 0, runs = 0;
    for (const auto& s : scenarios()) {
        const RunConfig c = s.defaults();
        const Grid g = c.make_grid();
        const PerturbedFamily fam = s.build(c);
        const FieldD u0 = s.initial_datum(g);
        std::vector<ProblemSpec> members{fam.limit_spec()};
        for (double eta : fam.schedule()) members.push_back(fam.spec_at(eta));
        for (const auto& spec : members) {
            const EnergyAudit a = energy_audit(spec, u0, c.experiment.target_time - c.time.horizon,
                                               c.experiment.target_time, c.time.dt, integration(c));
            worst = std::max(worst, a.worst_ratio);
            steps += a.steps;
            ++runs;
        }
    }
    return {worst < 1e-10, "max |r| / max(1, |u|^2) = " + num(worst) + " over " + std::to_string(steps) + " steps in " +
                               std::to_string(runs) + " runs"};
}

Outcome gronwall_domination() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    double worst = -inf;
    for (const char* name : {"linear_decay", "nonautonomous_limit"}) {
        const RunConfig c = default_config(name);
        const Grid g = c.make_grid();
        const PerturbedFamily fam = build_family(c);
        const double mu = fam.viscosity_floor() * first_eigenvalue(g);
        const FieldD u0 = find_scenario(name).initial_datum(g);
        std::vector<ProblemSpec> members{fam.limit_spec()};
        for (double eta : fam.schedule()) members.push_back(fam.spec_at(eta));
        for (const auto& spec : members) {
            const GronwallAudit a = gronwall_audit(spec, g, mu, u0, c.experiment.target_time - c.time.horizon,
                                                   c.experiment.target_time, c.time.dt, integration(c));
            ok = ok && a.dominated();
            worst = std::max(worst, a.worst_excess);
        }
    }
    const double elapsed = seconds_since(start);
    return {ok && elapsed < 120.0, "worst excess over bound + 1e-8 (1 + bound) = " + num(worst) + ", " + num(elapsed) + " s"};
}

struct RobustnessRun {
    std::string scenario;
    RobustnessReport report;
    double seconds = 0.0;
    std::string csv;
};

RobustnessRun robustness_run(const std::string& name) {
    const RunConfig c = default_config(name);
    const Grid g = c.make_grid();
    const PerturbedFamily fam = build_family(c);
    RobustnessOptions opt;
    opt.t = c.experiment.target_time;
    opt.omega = {c.time.dt, c.experiment.cloud_size, c.experiment.n_modes, c.experiment.seed, c.experiment.tolerance,
                 integration(c)};
    opt.pullback_count = c.experiment.pullback_count;
    opt.threshold_ratio = c.experiment.threshold_ratio;
    opt.envelope = {4, c.grid.eigenvalue};
    const auto start = std::chrono::steady_clock::now();
    RobustnessRun r{name, robustness_experiment(fam, g, fam.schedule(), opt), 0.0, {}};
    r.seconds = seconds_since(start);
    std::ostringstream os;
    write_csv(os, r.report);
    r.csv = os.str();
    return r;
}

Outcome absorbing_inclusion(const std::vector<RobustnessRun>& runs) {
    std::size_t points = 0, clouds = 0;
    double worst = -inf;
    bool ok = true;
    for (const auto& run : runs) {
        const RunConfig c = default_config(run.scenario);
        const Grid g = c.make_grid();
        const PerturbedFamily fam = build_family(c);
        const auto& r = run.report;
        for (std::size_t i = 0; i < r.clouds.size(); ++i) {
            const double eta = r.etas[i];
            const double radius = AbsorbingRadius(fam.spec_at(eta), g, fam.mu_at(eta), eta)(r.t);
            for (const auto& u : r.clouds[i].points) {
                worst = std::max(worst, l2_norm(u) - radius);
                ok = ok && l2_norm(u) <= radius + 1e-9;
                ++points;
            }
            ++clouds;
        }
        // The limit cloud against the limit problem's own ball and the envelope it was seeded from.
        const double r0 = AbsorbingRadius(fam.limit_spec(), g, fam.mu_zero())(r.t);
        for (const auto& u : r.limit_cloud.points) {
            worst = std::max(worst, l2_norm(u) - std::min(r0, std::sqrt(r.psi_c0)));
            ok = ok && l2_norm(u) <= r0 + 1e-9 && l2_norm(u) * l2_norm(u) <= r.psi_c0 + 1e-9;
            ++points;
        }
        ++clouds;
    }
    return {ok && points > 0, std::to_string(points) + " points in " + std::to_string(clouds) +
                                  " clouds, max(|u| - R) = " + num(worst)};
}

Outcome robustness(const std::vector<RobustnessRun>& runs) {
    bool ok = true;
    std::string detail;
    for (const auto& run : runs) {
        const RunConfig c = default_config(run.scenario);
        const auto& d = run.report.distances;
        const double threshold = 0.05 * std::max(d.front(), c.experiment.tolerance);
        const bool member = c.grid.nodes == 128 && c.experiment.cloud_size <= 65 &&
                            run.report.etas == dyadic(1, 6) && run.report.verdict.passed() &&
                            tail_nonincreasing(d, 1e-9) && d.back() <= threshold && run.seconds < 900.0;
        ok = ok && member;
        if (!detail.empty()) detail += "; ";
        detail += run.scenario + ": d(2^-1) = " + num(d.front()) + ", d(2^-6) = " + num(d.back()) + " vs " +
                  num(threshold) + ", " + num(run.seconds) + " s";
    }
    return {ok, detail};
}

Outcome finite_time() {
    const Grid g(1.0, 128);
    const PerturbedFamily fam = linear_forced_family(g, dyadic(1, 5));
    const FieldD u0(g, sine_mode(g, 1).values() + 0.5 * sine_mode(g, 3).values());
    const std::vector<double> checkpoints{-0.75, -0.5, -0.25, 0.0};
    const FiniteTimeReport r = finite_time_convergence_experiment(fam, g, -1.0, u0, checkpoints, fam.schedule(), 1e-3);
    const bool slope = std::abs(r.observed_order - 1.0) <= 0.2;
    const bool dt_small = r.dt_error <= 1e-2 * r.errors.front();
    return {slope && dt_small && r.norm_gaps_decreasing,
            "slope " + num(r.observed_order) + ", dt error " + num(r.dt_error) + " vs e(2^-1) = " +
                num(r.errors.front()) + ", norm gaps decreasing " + (r.norm_gaps_decreasing ? "yes" : "no")};
}

Outcome noncommutation() {
    const NoncommutationTable t = noncommutation_demo(1.0, dyadic(1, 8), times(11));
    const bool ok = std::abs(t.limit_then_limsup - 1.0) <= 1e-6 && std::abs(t.limsup_then_limit) <= 1e-6;
    return {ok, "lim_t limsup_eta = " + format_real(t.limit_then_limsup) +
                    ", limsup_eta lim_t = " + format_real(t.limsup_then_limit)};
}

Outcome dual_norm_oracle() {
    bool ok = true;
    std::string detail;
    for (int k = 1; k <= 3; ++k) {
        const double target = 1.0 / (2.0 * k * k * std::numbers::pi * std::numbers::pi);
        const auto err = [&](Eigen::Index n) {
            const FieldD s = sine_mode(Grid(1.0, n), k);
            return std::abs(dual_norm(s) * dual_norm(s) - target);
        };
        const double coarse = err(511), fine = err(1023);
        ok = ok && fine < 1e-6 && fine < coarse;
        detail += (k > 1 ? ", " : "") + std::string("k = ") + std::to_string(k) + ": " + num(coarse) + " -> " + num(fine);
    }
    return {ok, detail};
}

// ---------------------------------------------------------------------------
// Conditions matrix

const WeightDesc unit_weight{SpatialProfile::constant(1.0)};

ProblemSpec make_spec(ViscosityDesc a, ReactionDesc f, ForcingDesc h) {
    return ProblemSpec(std::move(a), std::move(f), std::move(h), unit_weight, 1.0);
}

ForcingDesc sine_forcing(double amplitude, TemporalProfile phi) {
    return ForcingDesc({ForcingTerm{SpatialProfile::sine(1, amplitude), std::move(phi)}}, 1.0);
}

PerturbedFamily constant_mu_family(std::vector<double> schedule, PerturbedFamily::SpecRule rule, ProblemSpec limit,
                                   double mu) {
    return PerturbedFamily(std::move(schedule), std::move(rule), [mu](double) { return mu; }, std::move(limit), mu);
}

struct MatrixCase {
    std::string label;
    Verdict expected;
    std::function<Verdict()> evaluate;
};

Outcome conditions_matrix() {
    const Grid g(1.0, 128);
    const double lambda = first_eigenvalue(g);
    const double tol = 0.05;
    const Dictionary dict = default_dictionary(g);
    const ReactionDesc cubic = ReactionDesc::odd_power(1.0, 4.0);
    const ViscosityDesc one = ViscosityDesc::constant(1.0);

    // h_eta = eta sin(pi x) with constant amplitude: the autonomous-limit prototype.
    const auto nd16 = [&](std::vector<double> schedule) {
        const ProblemSpec limit = make_spec(one, cubic, ForcingDesc::none());
        auto rule = [=](double eta) { return make_spec(one, cubic, sine_forcing(10.0 * eta, TemporalProfile::constant(1.0))); };
        return constant_mu_family(std::move(schedule), rule, limit, lambda);
    };

    std::vector<MatrixCase> cases;
    cases.push_back({"A1 / odd power reaction", Verdict::pass, [&] {
                         return check_A1(make_spec(one, cubic, ForcingDesc::none()), 10.0, 2001).verdict;
                     }});
    cases.push_back({"A1 / f(s) = s with a dissipative certificate", Verdict::fail, [&] {
                         const ReactionDesc anti(OddPower{-1.0, 2.0}, ReactionCertificate{0.0, 1.0, 0.0, 1.0, 2.0});
                         return check_A1(make_spec(one, anti, ForcingDesc::none()), 10.0, 2001).verdict;
                     }});
    cases.push_back({"A2 / eta-scaled constant forcing", Verdict::pass, [&] {
                         const auto fam = nd16(dyadic(1, 6));
                         return check_A2(fam, g, fam.schedule(), tol).verdict;
                     }});
    cases.push_back({"A2 / forcing growing like e^{-6 s} at mu = lambda_1", Verdict::fail, [&] {
                         // ||h(s)||_*^2 ~ e^{-12 s}: the tail diverges since 2 (-6) + lambda_1 < 0.
                         const ProblemSpec limit = make_spec(one, cubic, ForcingDesc::none());
                         auto rule = [=](double eta) {
                             return make_spec(one, cubic, sine_forcing(eta, TemporalProfile::exponential(1.0, -6.0)));
                         };
                         const auto fam = constant_mu_family(dyadic(1, 6), rule, limit, lambda);
                         return check_A2(fam, g, fam.schedule(), tol).verdict;
                     }});
    cases.push_back({"A3 / oscillating viscosity 1 + eta sin(3 s)", Verdict::pass, [&] {
                         const ProblemSpec limit = make_spec(one, cubic, ForcingDesc::none());
                         auto rule = [=](double eta) {
                             return make_spec(ViscosityDesc::oscillating(0.5, 1.0, eta, 3.0), cubic, ForcingDesc::none());
                         };
                         const auto fam = constant_mu_family(dyadic(1, 8), rule, limit, 0.5 * lambda);
                         return check_A3(fam, g, 10.0, dict, fam.schedule(), tol).verdict;
                     }});
    cases.push_back({"A3 / reaction offset that does not shrink with eta", Verdict::fail, [&] {
                         const ProblemSpec limit = make_spec(one, cubic, ForcingDesc::none());
                         auto rule = [=](double) {
                             return make_spec(one, ReactionDesc::odd_power_plus_bounded(1.0, 4.0, 0.5), ForcingDesc::none());
                         };
                         const auto fam = constant_mu_family(dyadic(1, 8), rule, limit, lambda);
                         return check_A3(fam, g, 10.0, dict, fam.schedule(), tol).verdict;
                     }});
    cases.push_back({"A4 / exponential limit forcing plus eta perturbation", Verdict::pass, [&] {
                         const auto fam = build_family(default_config("nonautonomous_limit"));
                         return check_A4(fam, g, A4Mode::strong_dual, {-10.0, 0.0}, dict, fam.schedule(), tol).verdict;
                     }});
    cases.push_back({"A5 / eta-scaled constant forcing", Verdict::pass, [&] {
                         const auto fam = nd16(dyadic(1, 6));
                         return check_A5(fam, g, fam.mu_zero(), times(21), fam.schedule(), tol).verdict;
                     }});
    cases.push_back({"A5 / moving unit-mass pulse", Verdict::fail, [&] {
                         const auto fam = build_family(default_config("moving_bump_counterexample"));
                         return check_A5(fam, g, fam.mu_zero(), times(21), fam.schedule(), tol).verdict;
                     }});
    cases.push_back({"uniform tail / forcing h / eta", Verdict::fail, [&] {
                         const ProblemSpec limit = make_spec(one, cubic, ForcingDesc::none());
                         auto rule = [=](double eta) {
                             return make_spec(one, cubic, sine_forcing(1.0 / eta, TemporalProfile::constant(1.0)));
                         };
                         const auto fam = constant_mu_family(dyadic(1, 6), rule, limit, lambda);
                         return check_uniform_tail(fam, g, fam.schedule()).verdict;
                     }});
    cases.push_back({"vanishing tail / eta-scaled constant forcing", Verdict::pass, [&] {
                         const auto fam = nd16(dyadic(1, 6));
                         return check_vanishing_tail(fam, g, times(21), fam.schedule(), tol).verdict;
                     }});
    cases.push_back({"mu liminf / mu_eta = eta", Verdict::fail, [&] {
                         const ProblemSpec limit = make_spec(one, cubic, ForcingDesc::none());
                         auto rule = [=](double eta) {
                             return make_spec(one, cubic, sine_forcing(eta, TemporalProfile::constant(1.0)));
                         };
                         const PerturbedFamily fam(dyadic(1, 10), rule, [](double eta) { return eta; }, limit, lambda);
                         return mu_limits(fam, fam.schedule(), 1e-2).verdict.verdict;
                     }});

    std::size_t matched = 0;
    std::string misses;
    for (const auto& c : cases) {
        Verdict got = Verdict::inconclusive;
        try {
            got = c.evaluate();
        } catch (const std::exception& e) {
            misses += " [" + c.label + " threw: " + e.what() + "]";
            continue;
        }
        std::cout << "    " << (got == c.expected ? "ok  " : "MISS") << "  " << c.label << ": expected "
                  << to_string(c.expected) << ", got " << to_string(got) << '\n';
        if (got == c.expected)
            ++matched;
        else
            misses += " [" + c.label + "]";
    }
    return {matched == cases.size() && cases.size() == 12,
            std::to_string(matched) + "/" + std::to_string(cases.size()) + " verdicts match" + misses};
}

// Two complete runs of each robustness scenario through the run driver; every CSV
// must match byte for byte, and the in-process report must match the written file.
Outcome determinism(const std::vector<RobustnessRun>& runs) {
    const fs::path root = fs::temp_directory_path() / "nlrd_acceptance_determinism";
    fs::remove_all(root);
    std::size_t compared = 0;
    bool ok = true;
    std::string detail;
    for (const auto& run : runs) {
        std::vector<fs::path> dirs;
        for (int rep = 0; rep < 2; ++rep) {
            RunConfig c = default_config(run.scenario);
            c.experiment.output_dir = (root / (run.scenario + "_" + std::to_string(rep))).string();
            std::ostringstream log;
            const RunOutcome o = run_scenario(c, log);
            ok = ok && o.exit_code == 0;
            dirs.push_back(c.experiment.output_dir);
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            if (entry.path().extension() != ".csv") continue;
            const auto read = [](const fs::path& p) {
                std::ifstream in(p, std::ios::binary);
                std::ostringstream s;
                s << in.rdbuf();
                return s.str();
            };
            const std::string a = read(entry.path());
            const std::string b = read(dirs[1] / entry.path().filename());
            if (a != b) {
                ok = false;
                detail += " differs: " + run.scenario + "/" + entry.path().filename().string();
            }
            if (entry.path().filename() == "robustness.csv" && a != run.csv) {
                ok = false;
                detail += " in-process report differs: " + run.scenario;
            }
            ++compared;
        }
    }
    fs::remove_all(root);
    return {ok && compared >= 4, std::to_string(compared) + " CSV files compared" + detail};
}

}  // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.passed) ++failures;
        std::cout << "criterion " << id << " " << name << ": " << (o.passed ? "PASS" : "FAIL") << " (" << o.detail
                  << "; " << num(seconds_since(start)) << " s)" << std::endl;
    };

    report(1, "heat-benchmark", heat_benchmark);
    report(2, "energy-identity", energy_identity);
    report(3, "gronwall-domination", gronwall_domination);

    std::vector<RobustnessRun> runs;
    try {
        runs.push_back(robustness_run("nd16_autonomous"));
        runs.push_back(robustness_run("nonautonomous_limit"));
    } catch (const std::exception& e) {
        std::cout << "robustness runs aborted: " << e.what() << std::endl;
        runs.clear();
    }
    const auto need_runs = [&](std::function<Outcome(const std::vector<RobustnessRun>&)> f) {
        return [&runs, f]() { return runs.size() == 2 ? f(runs) : Outcome{false, "robustness runs unavailable"}; };
    };
    report(4, "absorbing-inclusion", need_runs(absorbing_inclusion));
    report(5, "robustness", need_runs(robustness));
    report(6, "finite-time-convergence", finite_time);
    report(7, "noncommutation", noncommutation);
    report(8, "dual-norm-oracle", dual_norm_oracle);
    report(9, "conditions-matrix", conditions_matrix);
    report(10, "determinism", need_runs(determinism));

    std::cout << (10 - failures) << "/10 criteria passed" << std::endl;
    return failures;
}
