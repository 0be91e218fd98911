#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nlrd/attractor.hpp"
#include "nlrd/scenarios.hpp"

using namespace nlrd;

namespace {

std::vector<double> dyadic(int first, int last) {
    std::vector<double> out;
    for (int k = first; k <= last; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

}  // namespace

TEST_CASE("initial clouds: zero first, on the sphere, reproducible") {
    const Grid g(1.0, 63);
    const auto a = sample_initial_cloud(g, 3.0, 6, 17, 42);
    const auto b = sample_initial_cloud(g, 3.0, 6, 17, 42);
    const auto c = sample_initial_cloud(g, 3.0, 6, 17, 43);
    REQUIRE(a.size() == 17);
    CHECK(l2_norm(a[0]) == 0.0);
    for (std::size_t i = 1; i < a.size(); ++i) {
        CHECK(l2_norm(a[i]) <= 3.0);
        CHECK(l2_norm(a[i]) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(a[i] == b[i]);
    }
    CHECK_FALSE(a[5] == c[5]);
    CHECK(sample_initial_cloud(g, 0.0, 6, 4, 1)[3] == FieldD::zero(g));
    CHECK_THROWS_AS(sample_initial_cloud(g, -1.0, 6, 4, 1), std::invalid_argument);
}

TEST_CASE("Hausdorff semidistance properties") {
    const Grid g(1.0, 31);
    const auto A = sample_initial_cloud(g, 1.0, 4, 9, 1);
    const std::vector<FieldD> B(A.begin(), A.begin() + 3);
    CHECK(hausdorff_semidist(A, A) == 0.0);
    CHECK(hausdorff_semidist(B, A) == 0.0);  // B is a subset of A
    CHECK(hausdorff_semidist(A, B) > 0.0);   // asymmetric
    const std::vector<FieldD> origin{FieldD::zero(g)};
    CHECK(hausdorff_semidist(A, origin) == doctest::Approx(1.0));
    // Triangle inequality on a few clouds.
    const auto C = sample_initial_cloud(g, 2.0, 4, 7, 9);
    CHECK(hausdorff_semidist(A, C) <= hausdorff_semidist(A, B) + hausdorff_semidist(B, C) + 1e-14);
    CHECK_THROWS_AS(hausdorff_semidist(A, std::vector<FieldD>{}), std::invalid_argument);
}

TEST_CASE("omega limit of the damped linear problem collapses to zero") {
    const RunConfig c = default_config("linear_decay");
    const Grid g = c.make_grid();
    const auto fam = build_family(c);
    const ProblemSpec spec = fam.limit_spec();
    const AbsorbingRadius R(spec, g, fam.mu_zero());
    const auto sched = default_pullback_schedule(spec, g, 0.0, 10);
    CHECK(sched.front() == doctest::Approx(-5.0 / first_eigenvalue(g)));
    OmegaLimitOptions opt;
    opt.cloud_size = 9;
    const AttractorCloud cloud = omega_limit(spec, g, R, 0.0, sched, opt);
    CHECK(cloud.max_norm() < 1e-3);
    CHECK(cloud.max_norm() <= R(0.0));
    CHECK(cloud.stabilization_metric <= opt.tol);
    CHECK(cloud.provenance.nodes == 128);
    std::ostringstream os;
    write_csv(os, cloud);
    CHECK(os.str().front() == '#');

    // One pullback step is never enough to certify stabilization.
    opt.tol = 1e-300;
    CHECK_THROWS_AS(omega_limit(spec, g, R, 0.0, std::vector<double>(sched.begin(), sched.begin() + 2), opt),
                    NoStabilization);
}

TEST_CASE("concurrent evolution matches sequential evolution bitwise") {
    const Grid g(1.0, 63);
    const auto fam = build_family(default_config("nonautonomous_limit"));
    const DiscreteProblem P(fam.spec_at(0.25), g);
    const auto cloud = sample_initial_cloud(g, 2.0, 5, 6, 3);
    const IntegrationOptions opt{1e8, 6, false};
    const auto all = evolve_all(P, cloud, -1.0, 0.0, 1e-3, opt);
    for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(all[i] == evolve(P, cloud[i], -1.0, 0.0, 1e-3, opt));
}

TEST_CASE("robustness on a reduced nd16 family") {
    RunConfig c = default_config("nd16_autonomous");
    c.grid.nodes = 48;
    // d(eta) is linear in eta, so the 5% threshold needs eta down to 2^-6.
    c.family.eta_schedule = dyadic(1, 6);
    const auto fam = build_family(c);
    RobustnessOptions opt;
    opt.omega.cloud_size = 9;
    opt.omega.dt = 2e-3;
    const RobustnessReport r = robustness_experiment(fam, c.make_grid(), fam.schedule(), opt);
    CHECK(r.verdict.passed());
    CHECK(r.inclusion_holds);
    CHECK(r.envelope_holds);
    CHECK(r.distances.size() == 6);
    CHECK(tail_nonincreasing(r.distances, 1e-9));
    for (std::size_t i = 0; i < r.distances.size(); ++i) CHECK(r.max_norms[i] <= r.radii[i] + 1e-9);

    // A failed precondition stops the experiment unless overridden.
    ConditionVerdict bad;
    bad.assumption = "A2";
    bad.verdict = Verdict::fail;
    const std::vector<ConditionVerdict> pre{bad};
    const RobustnessReport stopped = robustness_experiment(fam, c.make_grid(), fam.schedule(), opt, pre);
    CHECK(stopped.verdict.verdict == Verdict::fail);
    CHECK_FALSE(stopped.preconditions_passed);
    CHECK(stopped.clouds.empty());
    opt.override_preconditions = true;
    const RobustnessReport forced = robustness_experiment(fam, c.make_grid(), fam.schedule(), opt, pre);
    CHECK(forced.overridden);
    CHECK(forced.distances == r.distances);
}

TEST_CASE("finite-time convergence is first order in eta for a linear family") {
    const Grid g(1.0, 64);
    const auto fam = linear_forced_family(g, dyadic(1, 5));
    const FieldD u0(g, sine_mode(g, 1).values() + 0.5 * sine_mode(g, 3).values());
    const std::vector<double> checkpoints{-0.75, -0.5, -0.25, 0.0};
    const FiniteTimeReport r = finite_time_convergence_experiment(fam, g, -1.0, u0, checkpoints, fam.schedule(), 1e-3);
    CHECK(r.verdict.passed());
    CHECK(r.observed_order == doctest::Approx(1.0).epsilon(0.2));
    CHECK(r.norm_gaps_decreasing);
    CHECK(r.dt_error < 1e-2 * r.errors.front());
    std::ostringstream os;
    write_csv(os, r);
    CHECK(os.str().rfind("eta,s,distance,norm_gap\n", 0) == 0);
}

TEST_CASE("pulled-back clouds are invariant under the forward flow") {
    RunConfig c = default_config("nonautonomous_limit");
    c.grid.nodes = 64;
    const Grid g = c.make_grid();
    const auto fam = build_family(c);
    const ProblemSpec spec = fam.limit_spec();
    const AbsorbingRadius R(spec, g, fam.mu_zero());
    OmegaLimitOptions opt;
    opt.cloud_size = 9;
    const AttractorCloud earlier = omega_limit(spec, g, R, -1.0, default_pullback_schedule(spec, g, -1.0, 12), opt);
    const AttractorCloud now = omega_limit(spec, g, R, 0.0, default_pullback_schedule(spec, g, 0.0, 12), opt);
    const auto pushed = evolve_all(DiscreteProblem(spec, g), earlier.points, -1.0, 0.0, opt.dt, opt.integration);
    CHECK(hausdorff_semidist(pushed, now.points) < 1e-4);
    CHECK(hausdorff_semidist(now.points, pushed) < 1e-4);
}
