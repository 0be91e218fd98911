#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nlrd/conditions.hpp"
#include "nlrd/scenarios.hpp"

using namespace nlrd;

namespace {

std::vector<double> times(int count) {
    std::vector<double> t;
    for (int k = 0; k < count; ++k) t.push_back(-static_cast<double>(k));
    return t;
}

}  // namespace

TEST_CASE("trend-plus-threshold limit test") {
    const std::vector<double> settles{1.0, 0.5, 0.25, 0.125, 0.01};
    const std::vector<double> stuck{1.0, 0.9, 0.8, 0.7, 0.6};
    const std::vector<double> wobbles{1.0, 0.5, 0.001, 0.002, 0.0015};
    CHECK(decreasing_below(settles, 0.05) == Verdict::pass);
    CHECK(decreasing_below(stuck, 0.05) == Verdict::fail);
    CHECK(decreasing_below(wobbles, 0.05) == Verdict::inconclusive);
    CHECK(tail_nonincreasing(settles));
    CHECK_FALSE(tail_nonincreasing(wobbles));
    const std::vector<Verdict> mixed{Verdict::pass, Verdict::inconclusive};
    const std::vector<Verdict> failed{Verdict::pass, Verdict::fail, Verdict::inconclusive};
    CHECK(combine(mixed) == Verdict::inconclusive);
    CHECK(combine(failed) == Verdict::fail);
}

TEST_CASE("temporal integrals agree with adaptive quadrature") {
    const TemporalProfile phi = TemporalProfile::sum(
        {TemporalProfile::exponential(2.0, 0.7), TemporalProfile::bump(1.0, -3.0, 0.5, 0.3), TemporalProfile::constant(-1.0)});
    for (auto [lo, hi] : {std::pair{-5.0, 0.0}, std::pair{-3.2, -2.6}, std::pair{-1.0, 2.0}}) {
        double quad = 0.0;
        // Split at the bump edges so Simpson sees smooth pieces.
        std::vector<double> cuts{lo};
        for (double b : phi.breakpoints())
            if (b > lo && b < hi) cuts.push_back(b);
        cuts.push_back(hi);
        for (std::size_t i = 1; i < cuts.size(); ++i)
            quad += adaptive_simpson([&](double s) { return phi(s); }, cuts[i - 1], cuts[i], 1e-12);
        CHECK(temporal_integral(phi, lo, hi) == doctest::Approx(quad).epsilon(1e-9));
    }
}

TEST_CASE("dictionary and probe handling") {
    const Grid g(1.0, 63);
    const Dictionary d = default_dictionary(g);
    REQUIRE(d.size() == 12);
    for (const auto& v : d) CHECK(l2_norm(v) == doctest::Approx(1.0));
    CHECK(default_dictionary(g, 5)[10] == default_dictionary(g, 5)[10]);
    CHECK_FALSE(default_dictionary(g, 5)[10] == default_dictionary(g, 6)[10]);

    const auto fam = build_family(default_config("nd16_autonomous"));
    const std::vector<double> probes{0.03125, 0.5, 0.125};
    CHECK(sorted_probes(fam, probes) == std::vector<double>{0.5, 0.125, 0.03125});
    const std::vector<double> off{0.3};
    CHECK_THROWS_AS(sorted_probes(fam, off), UnknownEta);
}

TEST_CASE("scenario families pass A2-A5 where expected") {
    const Grid g(1.0, 128);
    const Dictionary d = default_dictionary(g);
    for (const std::string name : {"nd16_autonomous", "nonautonomous_limit"}) {
        const RunConfig c = default_config(name);
        const auto fam = build_family(c);
        const auto& p = fam.schedule();
        const double tol = c.experiment.condition_tolerance;
        CHECK_MESSAGE(check_A2(fam, g, p, tol).passed(), name);
        CHECK_MESSAGE(check_A3(fam, g, 10.0, d, p, tol).passed(), name);
        CHECK_MESSAGE(check_A4(fam, g, A4Mode::strong_dual, {-10.0, 0.0}, d, p, tol).passed(), name);
        CHECK_MESSAGE(check_A4(fam, g, A4Mode::weak_l2, {-1.0, 0.0}, d, p, tol).passed(), name);
        CHECK_MESSAGE(check_A5(fam, g, fam.mu_zero(), times(21), p, tol).passed(), name);
        CHECK_MESSAGE(check_uniform_tail(fam, g, p).passed(), name);
    }
    const auto bump = build_family(default_config("moving_bump_counterexample"));
    CHECK(check_A5(bump, g, bump.mu_zero(), times(21), bump.schedule(), 1e-6).verdict == Verdict::fail);
    CHECK_THROWS_AS(check_A5(bump, g, 100.0, times(21), bump.schedule(), 1e-6), InvalidMu);
}

TEST_CASE("mu limits and sufficient-condition branches") {
    const Grid g(1.0, 128);
    RunConfig c = default_config("linear_decay");
    const auto fam = build_family(c);
    const MuLimits lim = mu_limits(fam, fam.schedule(), 1e-3);
    CHECK(lim.lower == doctest::Approx(first_eigenvalue(g)));
    CHECK(lim.upper == doctest::Approx(lim.lower));
    CHECK(lim.verdict.passed());
    CHECK_THROWS_AS(mu_limits(fam, fam.smallest(4), 1e-3), std::invalid_argument);

    // h_eta = eta h on nd16 with eight probes: strong branch, A5 at mu0 = limit mu.
    c = default_config("nd16_autonomous");
    c.family.eta_schedule = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    const auto nd16 = build_family(c);
    const auto r = sufficient_condition_report(nd16, g, nd16.schedule(), times(21), c.experiment.condition_tolerance);
    CHECK(r.strong_branch);
    CHECK_FALSE(r.noncommutation);
    CHECK(r.recommended_mu0 == doctest::Approx(nd16.mu_zero()));
    CHECK(r.summary.passed());
    CHECK(check_A5(nd16, g, r.recommended_mu0, times(21), nd16.schedule(), c.experiment.condition_tolerance).passed());

    // Moving pulse: every member's tail vanishes, the uniform limit does not.
    const RunConfig bc = default_config("moving_bump_counterexample");
    const auto bump = build_family(bc);
    const auto rb = sufficient_condition_report(bump, g, bump.schedule(), times(21), bc.experiment.condition_tolerance);
    CHECK(rb.uniform_tail.passed());
    CHECK(rb.vanishing_tail.verdict == Verdict::fail);
    CHECK(rb.noncommutation);
    std::ostringstream os;
    write_report(os, rb);
    CHECK(os.str().find("vanishing-tail") != std::string::npos);
}

TEST_CASE("iterated limits of the moving pulse") {
    std::vector<double> etas;
    for (int k = 1; k <= 8; ++k) etas.push_back(std::ldexp(1.0, -k));
    const NoncommutationTable t = noncommutation_demo(1.0, etas, times(11));
    CHECK(t.limit_then_limsup == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(t.limsup_then_limit) <= 1e-6);
    CHECK(t.verdict.passed());
    CHECK(t.integrals.rows() == 8);
    CHECK(t.integrals.cols() == 11);
    // Each integral is 0 before the pulse, 1 after it.
    for (Eigen::Index i = 0; i < t.integrals.rows(); ++i)
        for (Eigen::Index j = 0; j < t.integrals.cols(); ++j) {
            const double v = t.integrals(i, j);
            CHECK((std::abs(v) < 1e-9 || std::abs(v - 1.0) < 1e-9 || t.times[j] > -1.0 / t.etas[i] - 1.0));
        }
    CHECK_THROWS_AS(noncommutation_demo(1000.0, etas, times(11)), std::invalid_argument);
    std::ostringstream os;
    write_csv(os, t);
    CHECK(os.str().rfind("eta,t,integral\n", 0) == 0);
}

TEST_CASE("A5 holds for every probed mu0 inside the admissible interval") {
    const Grid g(1.0, 128);
    const RunConfig c = default_config("nd16_autonomous");
    const auto fam = build_family(c);
    const double ceiling = mu_ceiling(fam.viscosity_floor(), g);
    for (double frac : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        const ConditionVerdict v = check_A5(fam, g, frac * ceiling, times(21), fam.schedule(), c.experiment.condition_tolerance);
        CHECK_MESSAGE(v.passed(), frac);
        CHECK_FALSE(v.evidence.empty());
        CHECK(v == check_A5(fam, g, frac * ceiling, times(21), fam.schedule(), c.experiment.condition_tolerance));
    }
}
