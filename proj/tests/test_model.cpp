#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nlrd/model.hpp"
#include "nlrd/scenarios.hpp"

using namespace nlrd;

namespace {

const WeightDesc unit_weight{SpatialProfile::constant(1.0)};

ProblemSpec simple_spec(ForcingDesc h = ForcingDesc::none()) {
    return ProblemSpec(ViscosityDesc::constant(1.0), ReactionDesc::odd_power(1.0, 4.0), std::move(h), unit_weight, 1.0);
}

double window_sum(const std::vector<ExpWindow>& ws, double t) {
    double acc = 0.0;
    for (const auto& w : ws)
        if (t >= w.lo && t < w.hi) acc += w.coefficient * std::exp(w.rate * t);
    return acc;
}

}  // namespace

TEST_CASE("viscosity laws respect their floors") {
    const ViscosityDesc bump = ViscosityDesc::rational_bump(0.5, 2.0, 1.0, 0.25);
    const ViscosityDesc table = ViscosityDesc::piecewise_linear({{1.0, 2.0}, {-1.0, 1.0}, {0.0, 0.7}});
    const ViscosityDesc wave = ViscosityDesc::oscillating(0.5, 1.0, 0.5, 3.0);
    CHECK(bump(1.0) == doctest::Approx(2.5));
    CHECK(table(-0.5) == doctest::Approx(0.85));
    CHECK(table(5.0) == doctest::Approx(2.0));
    CHECK(table(-5.0) == doctest::Approx(1.0));
    CHECK(table.floor() == doctest::Approx(0.7));
    CHECK(table.breakpoints().size() == 3);
    for (double s = -20.0; s <= 20.0; s += 0.01) {
        CHECK(bump(s) >= bump.floor());
        CHECK(table(s) >= table.floor());
        CHECK(wave(s) >= wave.floor() - 1e-15);
    }
    CHECK_THROWS_AS(ViscosityDesc::constant(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ViscosityDesc::oscillating(0.8, 1.0, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ViscosityDesc::piecewise_linear({{0.0, 1.0}, {0.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("canonical reaction certificates hold on a dense sample") {
    const ReactionDesc cubic = ReactionDesc::odd_power(2.0, 4.0);
    const ReactionDesc shifted = ReactionDesc::odd_power_plus_bounded(1.0, 4.0, 0.75);
    for (const ReactionDesc* f : {&cubic, &shifted}) {
        const auto& c = f->certificate();
        for (double s = -30.0; s <= 30.0; s += 0.003) {
            const double fs = (*f)(s);
            CHECK(std::abs(fs) <= c.kappa1 + c.alpha1 * std::pow(std::abs(s), c.p - 1.0) + 1e-9);
            CHECK(fs * s <= c.kappa2 - c.alpha2 * std::pow(std::abs(s), c.p) + 1e-9 * (1.0 + std::pow(std::abs(s), c.p)));
        }
    }
    CHECK(cubic(2.0) == doctest::Approx(-16.0));
    CHECK(shifted.certificate().conjugate_exponent() == doctest::Approx(4.0 / 3.0));
    CHECK_THROWS_AS(ReactionDesc::odd_power(1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(ReactionDesc::odd_power(-1.0, 2.0), std::invalid_argument);
}

TEST_CASE("temporal profiles expand into exponential windows") {
    const TemporalProfile c = TemporalProfile::constant(2.0);
    const TemporalProfile e = TemporalProfile::exponential(3.0, 0.5);
    const TemporalProfile b = TemporalProfile::bump(1.5, -4.0, 2.0, -0.25);
    const TemporalProfile s = TemporalProfile::sum({c, TemporalProfile::scaled(e, 0.1), b, c});
    for (const TemporalProfile* p : {&c, &e, &b, &s}) {
        const auto ws = p->windows();
        for (double t = -10.0; t <= 3.0; t += 0.0137) CHECK(window_sum(ws, t) == doctest::Approx((*p)(t)));
    }
    // Two constants merge into one window.
    CHECK(s.windows().size() == 3);
    CHECK(b.breakpoints() == std::vector<double>{-4.0, -2.0});
    CHECK(b(-2.0) == 0.0);
    CHECK(b(-4.0) == doctest::Approx(1.5 * std::exp(1.0)));

    for (const TemporalProfile* p : {&c, &e, &b, &s}) {
        const TailBound tb = p->tail_bound();
        for (double t = -50.0; t <= 0.0; t += 0.01) CHECK(std::abs((*p)(t)) <= tb.constant * std::exp(tb.rate * t) * (1 + 1e-12));
    }
}

TEST_CASE("merge_windows drops cancelled terms") {
    const auto ws = merge_windows({{1.0, 0.5, -1.0, 0.0}, {-1.0, 0.5, -1.0, 0.0}, {2.0, 0.0, -std::numeric_limits<double>::infinity(), 0.0}});
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].coefficient == 2.0);
}

TEST_CASE("forcing descriptors") {
    const ForcingDesc h({ForcingTerm{SpatialProfile::sine(1, 2.0), TemporalProfile::constant(1.0)}}, 1.0);
    const ForcingDesc g({ForcingTerm{SpatialProfile::sine(1, 2.0), TemporalProfile::exponential(1.0, 1.0)}}, 1.0);
    const Grid grid(1.0, 31);
    const FieldD at = h.plus(g).evaluate(grid, -1.0);
    const FieldD expected(grid, (1.0 + std::exp(-1.0)) * SpatialProfile::sine(1, 2.0).sample(grid).values());
    CHECK(l2_distance(at, expected) < 1e-13);
    CHECK(l2_norm(h.minus(h).evaluate(grid, 0.3)) < 1e-15);
    CHECK(l2_norm(h.scaled(0.5).evaluate(grid, 0.0)) == doctest::Approx(0.5 * l2_norm(h.evaluate(grid, 0.0))));
    CHECK_THROWS_AS(ForcingDesc({ForcingTerm{SpatialProfile::constant(1.0), TemporalProfile::constant(1.0)}}, 1.0),
                    std::invalid_argument);
    CHECK(SpatialProfile::parabola(1.0)(0.5, 1.0) == doctest::Approx(1.0));
    CHECK(SpatialProfile::parabola(1.0).vanishes_on_boundary(1.0));
}

TEST_CASE("problem spec and family plumbing") {
    const ProblemSpec spec = simple_spec();
    CHECK(spec.viscosity_floor() == 1.0);
    CHECK(spec.kappa() == 0.0);
    CHECK_THROWS_AS(spec.require_grid(Grid(2.0, 15)), GridMismatch);

    const PerturbedFamily fam = build_family(default_config("nd16_autonomous"));
    CHECK(fam.schedule().size() == 6);
    CHECK(fam.smallest(2) == std::vector<double>{0.03125, 0.015625});
    CHECK(instantiate(fam, 0.0) == fam.limit_spec());
    CHECK(instantiate(fam, 0.25) == fam.spec_at(0.25));
    CHECK_THROWS_AS(instantiate(fam, 0.3), UnknownEta);
    CHECK(fam.viscosity_floor() == doctest::Approx(1.0));
    CHECK_THROWS_AS(fam.with_schedule({0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(fam.with_schedule({1.5}), std::invalid_argument);
}

TEST_CASE("A1 audit: certificate violations are detected") {
    CHECK(check_A1(simple_spec(), 10.0, 2001).passed());
    // f(s) = s with a certificate claiming dissipativity.
    const ReactionDesc anti(OddPower{-1.0, 2.0}, ReactionCertificate{0.0, 1.0, 0.0, 1.0, 2.0});
    const ProblemSpec bad(ViscosityDesc::constant(1.0), anti, ForcingDesc::none(), unit_weight, 1.0);
    const ConditionVerdict v = check_A1(bad, 10.0, 2001);
    CHECK(v.verdict == Verdict::fail);
    CHECK(v.note.find("dissipativity") != std::string::npos);
    CHECK_THROWS_AS(check_A1(simple_spec(), 10.0, 10), std::invalid_argument);
}

TEST_CASE("scenario families satisfy A1 for every member") {
    for (const auto& s : scenarios()) {
        const PerturbedFamily fam = s.build(s.defaults());
        CHECK_MESSAGE(check_A1(fam.limit_spec(), 10.0, 2001).passed(), s.name);
        for (double eta : fam.schedule()) CHECK_MESSAGE(check_A1(fam.spec_at(eta), 10.0, 2001).passed(), s.name);
    }
}

TEST_CASE("bounded offset reaction: declared certificate and worst margin location") {
    // f(s) = 1 - s^3; max of s - s^4/2 is about 0.5953, attained at s = 2^{-1/3}.
    const ReactionDesc f(OddPowerPlusBounded{1.0, 4.0, 1.0}, ReactionCertificate{1.0, 1.0, 0.6, 0.5, 4.0});
    const ReactionDesc tight(OddPowerPlusBounded{1.0, 4.0, 1.0}, ReactionCertificate{1.0, 1.0, 0.59, 0.5, 4.0});
    const ProblemSpec too_tight(ViscosityDesc::constant(1.0), tight, ForcingDesc::none(), unit_weight, 1.0);
    CHECK(check_A1(too_tight, 10.0, 20001).verdict == Verdict::fail);
    const ProblemSpec spec(ViscosityDesc::constant(1.0), f, ForcingDesc::none(), unit_weight, 1.0);
    const ConditionVerdict w = check_A1(spec, 10.0, 20001);
    CHECK(w.passed());
    for (const auto& row : w.evidence)
        if (row.quantity == "dissipation_margin_min") {
            CHECK(row.at == doctest::Approx(std::cbrt(0.5)).epsilon(2e-3));
            CHECK(std::abs(row.value - (0.6 - 0.75 * std::cbrt(0.5))) < 1e-5);
        }
}

TEST_CASE("instantiate is pure and the registry is well formed") {
    const PerturbedFamily fam = build_family(default_config("nonautonomous_limit"));
    for (double eta : fam.schedule()) CHECK(instantiate(fam, eta) == instantiate(fam, eta));
    std::vector<std::string> names;
    for (const auto& s : scenarios()) {
        CHECK_FALSE(s.description.empty());
        names.push_back(s.name);
    }
    CHECK(names == std::vector<std::string>{"nd16_autonomous", "nonautonomous_limit", "moving_bump_counterexample",
                                            "heat_benchmark", "linear_decay"});
    CHECK_THROWS_AS(find_scenario("nope"), std::out_of_range);
}
