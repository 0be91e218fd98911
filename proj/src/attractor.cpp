#include "nlrd/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nlrd/csv.hpp"
#include "nlrd/errors.hpp"

namespace nlrd {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Positive root of x^{d+1} = x + 1.
double generalized_golden_ratio(int d) {
    double x = 2.0;
    for (int i = 0; i < 64; ++i) x = std::pow(1.0 + x, 1.0 / (d + 1));
    return x;
}

template <class Fn>
void parallel_for(std::size_t count, Fn fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t workers = std::min<std::size_t>(hw > 1 ? hw : 1, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double pullback_step(double m, const Grid& grid, double step) {
    return step > 0.0 ? step : 5.0 / (m * first_eigenvalue(grid, EigenvalueMode::discrete));
}

std::vector<double> schedule_from(double t, std::size_t count, double step) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= count; ++k) out.push_back(t - static_cast<double>(k) * step);
    return out;
}

}  // namespace

std::vector<FieldD> sample_initial_cloud(const Grid& grid, double radius, int n_modes, std::size_t n_points,
                                         std::uint64_t seed) {
    if (radius < 0.0) throw std::invalid_argument("sample_initial_cloud: radius must be >= 0");
    if (n_points < 1) throw std::invalid_argument("sample_initial_cloud: n_points must be >= 1");
    if (n_modes < 1) throw std::invalid_argument("sample_initial_cloud: n_modes must be >= 1");
    std::vector<FieldD> out;
    out.reserve(n_points);
    out.push_back(FieldD::zero(grid));
    if (radius == 0.0) {
        while (out.size() < n_points) out.push_back(FieldD::zero(grid));
        return out;
    }

    std::vector<Vector<double>> modes;
    for (int k = 1; k <= n_modes; ++k) modes.push_back(sine_mode(grid, k).values());
    const double phi = generalized_golden_ratio(n_modes);
    std::vector<double> alpha(static_cast<std::size_t>(n_modes));
    for (int j = 0; j < n_modes; ++j) alpha[static_cast<std::size_t>(j)] = std::fmod(std::pow(1.0 / phi, j + 1), 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> offset(static_cast<std::size_t>(n_modes));
    for (auto& o : offset) o = uniform(rng);

    for (std::size_t i = 1; out.size() < n_points; ++i) {
        Vector<double> values = Vector<double>::Zero(grid.size());
        for (int j = 0; j < n_modes; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double x = std::fmod(offset[ju] + static_cast<double>(i) * alpha[ju], 1.0);
            values += (2.0 * x - 1.0) * modes[ju];
        }
        const double norm = std::sqrt(grid.spacing()) * values.norm();
        if (!(norm > 1e-8)) continue;
        values *= radius / norm;
        // Rescaling can overshoot by one ulp; pull back onto the ball.
        const double after = std::sqrt(grid.spacing()) * values.norm();
        if (after > radius) values *= radius / after * (1.0 - 1e-15);
        out.emplace_back(grid, std::move(values));
    }
    return out;
}

double hausdorff_semidist(std::span<const FieldD> A, std::span<const FieldD> B) {
    if (A.empty() || B.empty()) throw std::invalid_argument("hausdorff_semidist: empty cloud");
    for (const auto& a : A) require_same_grid(a.grid(), B.front().grid());
    for (const auto& b : B) require_same_grid(b.grid(), B.front().grid());
    double worst = 0.0;
    for (const auto& a : A) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : B) best = std::min(best, l2_distance(a, b));
        worst = std::max(worst, best);
    }
    return worst;
}

double AttractorCloud::max_norm() const {
    double out = 0.0;
    for (const auto& p : points) out = std::max(out, l2_norm(p));
    return out;
}

std::vector<double> default_pullback_schedule(const ProblemSpec& spec, const Grid& grid, double t, std::size_t count,
                                              double step) {
    return schedule_from(t, count, pullback_step(spec.viscosity_floor(), grid, step));
}

std::vector<FieldD> evolve_all(const DiscreteProblem& problem, std::span<const FieldD> fields, double tau, double t,
                               double dt, const IntegrationOptions& options) {
    std::vector<std::optional<FieldD>> slots(fields.size());
    parallel_for(fields.size(), [&](std::size_t i) { slots[i] = evolve(problem, fields[i], tau, t, dt, options); });
    std::vector<FieldD> out;
    out.reserve(fields.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

AttractorCloud omega_limit(const ProblemSpec& spec, const Grid& grid, const std::function<double(double)>& ball_radius,
                           double t, std::span<const double> pullback_schedule, const OmegaLimitOptions& options) {
    if (!(options.tol > 0.0)) throw std::invalid_argument("omega_limit: tol must be positive");
    if (pullback_schedule.size() < 2) throw std::invalid_argument("omega_limit: need at least 2 pullback times");
    for (std::size_t k = 0; k < pullback_schedule.size(); ++k) {
        if (!(pullback_schedule[k] < t)) throw std::invalid_argument("omega_limit: pullback times must precede t");
        if (k > 0 && !(pullback_schedule[k] < pullback_schedule[k - 1]))
            throw std::invalid_argument("omega_limit: pullback schedule must decrease");
    }
    const DiscreteProblem problem(spec, grid);
    AttractorCloud cloud;
    cloud.t = t;
    cloud.provenance.dt = options.dt;
    cloud.provenance.length = grid.length();
    cloud.provenance.nodes = grid.size();
    {
        std::ostringstream desc;
        desc << "sphere of radius R(tau) in span of " << options.n_modes << " sine modes, " << options.cloud_size
             << " points, seed " << options.seed;
        cloud.provenance.initial_set = desc.str();
    }

    std::optional<std::vector<FieldD>> previous;
    double metric = std::numeric_limits<double>::infinity();
    for (double tau : pullback_schedule) {
        const double radius = ball_radius(tau);
        const auto start = sample_initial_cloud(grid, radius, options.n_modes, options.cloud_size, options.seed);
        auto current = evolve_all(problem, start, tau, t, options.dt, options.integration);
        cloud.provenance.pullback_times.push_back(tau);
        cloud.provenance.radii.push_back(radius);
        if (previous) {
            metric = std::max(hausdorff_semidist(*previous, current), hausdorff_semidist(current, *previous));
            if (metric < options.tol) {
                cloud.points = std::move(current);
                cloud.stabilization_metric = metric;
                return cloud;
            }
        }
        previous = std::move(current);
    }
    std::ostringstream msg;
    msg << "omega_limit did not stabilize at t = " << t << " after " << pullback_schedule.size()
        << " pullback times (last metric " << metric << ", tol " << options.tol << ")";
    throw NoStabilization(msg.str(), metric);
}

void write_csv(std::ostream& os, const AttractorCloud& cloud) {
    os << "# t = " << format_real(cloud.t) << '\n';
    os << "# initial_set = " << cloud.provenance.initial_set << '\n';
    os << "# dt = " << format_real(cloud.provenance.dt) << '\n';
    os << "# grid = L " << format_real(cloud.provenance.length) << ", n " << cloud.provenance.nodes << '\n';
    os << "# stabilization_metric = " << format_real(cloud.stabilization_metric) << '\n';
    os << "# pullback_times =";
    for (double tau : cloud.provenance.pullback_times) os << ' ' << format_real(tau);
    os << '\n';
    os << "index,norm";
    for (std::size_t i = 1; i <= cloud.provenance.nodes; ++i) os << ",u" << i;
    os << '\n';
    for (std::size_t k = 0; k < cloud.points.size(); ++k) {
        const auto& p = cloud.points[k];
        os << k << ',' << format_real(l2_norm(p));
        for (Eigen::Index i = 0; i < p.values().size(); ++i) os << ',' << format_real(p.values()[i]);
        os << '\n';
    }
}

// --------------------------------------------------------------------------

RobustnessReport robustness_experiment(const PerturbedFamily& family, const Grid& grid,
                                       std::span<const double> eta_schedule, const RobustnessOptions& options,
                                       std::span<const ConditionVerdict> preconditions) {
    RobustnessReport r;
    r.t = options.t;
    r.etas.assign(eta_schedule.begin(), eta_schedule.end());
    std::sort(r.etas.begin(), r.etas.end(), std::greater<>());
    r.verdict.assumption = "robustness";
    if (r.etas.size() < 4) throw std::invalid_argument("robustness_experiment needs at least 4 etas");

    for (const auto& p : preconditions) {
        if (!p.passed()) {
            r.preconditions_passed = false;
            r.verdict.note += "precondition " + p.assumption + " is " + to_string(p.verdict) + "; ";
        }
        r.verdict.add("precondition_" + p.assumption, 0.0, p.passed() ? 1.0 : 0.0);
    }
    if (!r.preconditions_passed) {
        if (!options.override_preconditions) {
            r.verdict.verdict = Verdict::fail;
            r.verdict.note += "failed precondition, experiment not run";
            return r;
        }
        r.overridden = true;
        r.verdict.note += "preconditions overridden by caller; ";
    }

    const double m = family.viscosity_floor();
    const double step = pullback_step(m, grid, options.pullback_step);
    const auto pullback = schedule_from(options.t, options.pullback_count, step);

    double mu_lower = std::numeric_limits<double>::infinity();
    for (std::size_t i = r.etas.size() / 2; i < r.etas.size(); ++i) mu_lower = std::min(mu_lower, family.mu_at(r.etas[i]));
    r.c0 = 2.0 + 2.0 * family.kappa() * family.domain_length() / mu_lower;
    const auto psi_squared = [&](double tau) {
        return psi_envelope_squared(family, grid, r.c0, tau, r.etas, options.envelope);
    };
    r.psi_c0 = std::sqrt(psi_squared(options.t));

    const ProblemSpec limit = family.limit_spec();
    r.limit_cloud = omega_limit(limit, grid, [&](double tau) { return std::sqrt(psi_squared(tau)); }, options.t,
                                pullback, options.omega);
    r.limit_max_norm = r.limit_cloud.max_norm();
    if (r.limit_max_norm > r.psi_c0 + 1e-9) r.inclusion_holds = false;
    r.verdict.add("limit_cloud_max_norm", 0.0, r.limit_max_norm);
    r.verdict.add("psi_c0(t)", options.t, r.psi_c0);
    r.verdict.add("limit_stabilization", 0.0, r.limit_cloud.stabilization_metric);

    try {
        const double fixed = r.psi_c0;
        const AttractorCloud ball = omega_limit(limit, grid, [fixed](double) { return fixed; }, options.t, pullback,
                                                options.omega);
        r.ball_to_tempered = hausdorff_semidist(ball.points, r.limit_cloud.points);
        r.tempered_to_ball = hausdorff_semidist(r.limit_cloud.points, ball.points);
    } catch (const NoStabilization& e) {
        r.ball_to_tempered = r.tempered_to_ball = nan;
        r.verdict.note += std::string("fixed-ball cloud: ") + e.what() + "; ";
    }
    r.verdict.add("dist(ball, tempered)", 0.0, r.ball_to_tempered);
    r.verdict.add("dist(tempered, ball)", 0.0, r.tempered_to_ball);

    for (std::size_t i = 0; i < r.etas.size(); ++i) {
        const double eta = r.etas[i];
        const ProblemSpec spec = instantiate(family, eta);
        const AbsorbingRadius radius(spec, grid, family.mu_at(eta), eta, options.envelope.mode);
        r.radii.push_back(radius(options.t));
        try {
            AttractorCloud cloud = omega_limit(spec, grid, radius, options.t, pullback, options.omega);
            const double d = hausdorff_semidist(cloud.points, r.limit_cloud.points);
            r.distances.push_back(d);
            r.max_norms.push_back(cloud.max_norm());
            r.member_status.push_back(Verdict::pass);
            if (cloud.max_norm() > r.radii.back() + 1e-9) r.inclusion_holds = false;
            if (i >= r.etas.size() / 2)
                for (double tau : cloud.provenance.pullback_times)
                    if (radius.squared(tau) > psi_squared(tau) * (1.0 + 1e-12)) r.envelope_holds = false;
            r.clouds.push_back(std::move(cloud));
        } catch (const NoStabilization& e) {
            r.distances.push_back(nan);
            r.max_norms.push_back(nan);
            r.member_status.push_back(Verdict::inconclusive);
            r.verdict.note += "eta = " + format_real(eta) + ": " + e.what() + "; ";
        }
        r.verdict.add("d(eta)", eta, r.distances.back());
    }

    const bool all_stable =
        std::all_of(r.member_status.begin(), r.member_status.end(), [](Verdict v) { return v == Verdict::pass; });
    const double threshold = options.threshold_ratio * std::max(r.distances.front(), options.omega.tol);
    r.verdict.thresholds = {{"threshold", threshold},
                            {"threshold_ratio", options.threshold_ratio},
                            {"stabilization_tol", options.omega.tol},
                            {"c0", r.c0}};
    if (!all_stable) {
        r.verdict.verdict = Verdict::inconclusive;
    } else if (!(r.distances.back() <= threshold)) {
        r.verdict.verdict = Verdict::fail;
        r.verdict.note += "d(eta_min) above threshold; ";
    } else if (!tail_nonincreasing(r.distances, 1e-9)) {
        r.verdict.verdict = Verdict::inconclusive;
        r.verdict.note += "d(eta) is not monotone over the schedule tail; ";
    } else {
        r.verdict.verdict = Verdict::pass;
    }
    return r;
}

void write_csv(std::ostream& os, const RobustnessReport& report) {
    os << "eta,distance,radius,max_norm,status\n";
    for (std::size_t i = 0; i < report.etas.size(); ++i) {
        const double d = i < report.distances.size() ? report.distances[i] : nan;
        const double rad = i < report.radii.size() ? report.radii[i] : nan;
        const double mx = i < report.max_norms.size() ? report.max_norms[i] : nan;
        const char* status = i < report.member_status.size() ? to_string(report.member_status[i]) : "skipped";
        os << format_real(report.etas[i]) << ',' << format_real(d) << ',' << format_real(rad) << ','
           << format_real(mx) << ',' << status << '\n';
    }
}

void write_report(std::ostream& os, const RobustnessReport& report) {
    os << "robustness at t = " << format_real(report.t) << '\n';
    os << "  c0 = " << format_real(report.c0) << ", Psi_c0(t) = " << format_real(report.psi_c0) << '\n';
    os << "  limit cloud: " << report.limit_cloud.points.size() << " points, max |u| = "
       << format_real(report.limit_max_norm) << '\n';
    os << "  fixed ball vs tempered limit: " << format_real(report.ball_to_tempered) << " / "
       << format_real(report.tempered_to_ball) << '\n';
    os << "  absorbing inclusion: " << (report.inclusion_holds ? "holds" : "VIOLATED") << '\n';
    os << "  envelope R_eta^2 <= Psi_c0^2: " << (report.envelope_holds ? "holds" : "VIOLATED") << '\n';
    if (report.overridden) os << "  preconditions overridden\n";
    write_report(os, report.verdict);
}

// --------------------------------------------------------------------------

namespace {

std::vector<FieldD> evolve_through(const DiscreteProblem& problem, const FieldD& u_tau, double tau,
                                   std::span<const double> checkpoints, double dt, const IntegrationOptions& options) {
    std::vector<FieldD> out;
    FieldD u = u_tau;
    double t = tau;
    for (double c : checkpoints) {
        u = evolve(problem, u, t, c, dt, options);
        t = c;
        out.push_back(u);
    }
    return out;
}

}  // namespace

FiniteTimeReport finite_time_convergence_experiment(const PerturbedFamily& family, const Grid& grid, double tau,
                                                    const FieldD& u_tau, std::span<const double> checkpoints,
                                                    std::span<const double> eta_schedule, double dt,
                                                    const IntegrationOptions& options) {
    FiniteTimeReport r;
    r.tau = tau;
    r.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    if (r.checkpoints.empty()) throw std::invalid_argument("finite_time: need at least one checkpoint");
    for (std::size_t k = 0; k < r.checkpoints.size(); ++k)
        if (!(r.checkpoints[k] > (k == 0 ? tau : r.checkpoints[k - 1])))
            throw std::invalid_argument("finite_time: checkpoints must increase and lie after tau");
    r.etas.assign(eta_schedule.begin(), eta_schedule.end());
    std::sort(r.etas.begin(), r.etas.end(), std::greater<>());

    const DiscreteProblem limit(family.limit_spec(), grid);
    const auto u0 = evolve_through(limit, u_tau, tau, r.checkpoints, dt, options);
    const auto u0_half = evolve_through(limit, u_tau, tau, r.checkpoints, 0.5 * dt, options);
    for (std::size_t k = 0; k < u0.size(); ++k) r.dt_error = std::max(r.dt_error, l2_distance(u0[k], u0_half[k]));

    const auto ne = static_cast<Eigen::Index>(r.etas.size());
    const auto nc = static_cast<Eigen::Index>(r.checkpoints.size());
    r.distances.resize(ne, nc);
    r.norm_gaps.resize(ne, nc);
    std::vector<std::vector<FieldD>> members(r.etas.size());
    parallel_for(r.etas.size(), [&](std::size_t i) {
        members[i] = evolve_through(DiscreteProblem(instantiate(family, r.etas[i]), grid), u_tau, tau, r.checkpoints,
                                    dt, options);
    });
    for (Eigen::Index i = 0; i < ne; ++i) {
        double e = 0.0;
        for (Eigen::Index k = 0; k < nc; ++k) {
            const auto& a = members[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            const auto& b = u0[static_cast<std::size_t>(k)];
            r.distances(i, k) = l2_distance(a, b);
            r.norm_gaps(i, k) = std::abs(l2_norm_squared(a) - l2_norm_squared(b));
            e = std::max(e, r.distances(i, k));
        }
        r.errors.push_back(e);
        r.verdict.add("e(eta)", r.etas[static_cast<std::size_t>(i)], e);
    }
    for (Eigen::Index k = 0; k < nc; ++k)
        for (Eigen::Index i = 1; i < ne; ++i)
            if (r.norm_gaps(i, k) > r.norm_gaps(i - 1, k)) r.norm_gaps_decreasing = false;

    // Least-squares slope of log e(eta) against log eta over the positive entries.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < r.etas.size(); ++i) {
        if (!(r.errors[i] > 0.0)) continue;
        const double x = std::log(r.etas[i]);
        const double y = std::log(r.errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count >= 2) r.observed_order = (count * sxy - sx * sy) / (count * sxx - sx * sx);

    r.verdict.assumption = "finite-time";
    r.verdict.thresholds = {{"dt", dt}, {"dt_error", r.dt_error}, {"observed_order", r.observed_order}};
    r.verdict.add("norm_gaps_decreasing", 0.0, r.norm_gaps_decreasing ? 1.0 : 0.0);
    bool decreasing = true;
    for (std::size_t i = 1; i < r.errors.size(); ++i)
        if (r.errors[i] > r.errors[i - 1]) decreasing = false;
    r.verdict.verdict = decreasing ? Verdict::pass : Verdict::fail;
    if (!decreasing) r.verdict.note = "e(eta) does not decrease along the schedule";
    return r;
}

void write_csv(std::ostream& os, const FiniteTimeReport& report) {
    os << "eta,s,distance,norm_gap\n";
    for (Eigen::Index i = 0; i < report.distances.rows(); ++i)
        for (Eigen::Index k = 0; k < report.distances.cols(); ++k)
            write_csv_row(os, {report.etas[static_cast<std::size_t>(i)], report.checkpoints[static_cast<std::size_t>(k)],
                               report.distances(i, k), report.norm_gaps(i, k)});
}

}  // namespace nlrd
