#pragma once

// Finite-cloud approximations of pullback attractor sections, Hausdorff
// semidistances and the two convergence experiments (attractor robustness
// as eta -> 0 and finite-time convergence of solutions).

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nlrd/estimates.hpp"
#include "nlrd/grid.hpp"
#include "nlrd/model.hpp"
#include "nlrd/solver.hpp"
#include "nlrd/verdict.hpp"

namespace nlrd {

// Zero field first, then n_points - 1 fields on the sphere of the given radius
// spanned by the first n_modes sine modes. Coefficients follow an R_d
// low-discrepancy sequence whose offset is drawn from `seed`.
std::vector<FieldD> sample_initial_cloud(const Grid& grid, double radius, int n_modes, std::size_t n_points,
                                         std::uint64_t seed);

// max_{a in A} min_{b in B} |a - b|
double hausdorff_semidist(std::span<const FieldD> A, std::span<const FieldD> B);

struct CloudProvenance {
    std::vector<double> pullback_times;  // tau_k actually used
    std::vector<double> radii;           // R(tau_k)
    std::string initial_set;
    double dt = 0.0;
    double length = 0.0;
    std::size_t nodes = 0;
};

struct AttractorCloud {
    double t = 0.0;
    std::vector<FieldD> points;
    CloudProvenance provenance;
    double stabilization_metric = 0.0;

    double max_norm() const;
};

struct OmegaLimitOptions {
    double dt = 1e-3;
    std::size_t cloud_size = 33;
    int n_modes = 8;
    std::uint64_t seed = 1;
    double tol = 1e-6;
    IntegrationOptions integration{1e8, 6, false};
};

// tau_k = t - k T_step for k = 1..count, T_step = 5 / (m lambda_1^h) unless given.
std::vector<double> default_pullback_schedule(const ProblemSpec& spec, const Grid& grid, double t, std::size_t count,
                                              double step = 0.0);

// Evolves sample_initial_cloud(R(tau_k)) from each tau_k to t and stops once two
// successive clouds are within tol of each other in both semidistances.
// Throws NoStabilization when the schedule runs out.
AttractorCloud omega_limit(const ProblemSpec& spec, const Grid& grid, const std::function<double(double)>& ball_radius,
                           double t, std::span<const double> pullback_schedule, const OmegaLimitOptions& options);

// Evolves every field from tau to t; members run concurrently when hardware allows.
std::vector<FieldD> evolve_all(const DiscreteProblem& problem, std::span<const FieldD> fields, double tau, double t,
                               double dt, const IntegrationOptions& options);

// Header lines start with '#'; then one row per field: index, |u|, u_1..u_n.
void write_csv(std::ostream& os, const AttractorCloud& cloud);

struct RobustnessOptions {
    double t = 0.0;
    OmegaLimitOptions omega;
    std::size_t pullback_count = 10;
    double pullback_step = 0.0;  // 0 selects 5 / (m lambda_1^h)
    double threshold_ratio = 0.05;
    EnvelopeOptions envelope;
    // Run even when a precondition verdict did not pass; recorded in the report.
    bool override_preconditions = false;
};

struct RobustnessReport {
    double t = 0.0;
    std::vector<double> etas;
    std::vector<double> distances;     // d(eta) = dist(A_eta(t), A_0(t)); NaN when not stabilized
    std::vector<Verdict> member_status;
    std::vector<double> radii;         // R_eta(t)
    std::vector<double> max_norms;     // max |u| over each cloud
    double c0 = 0.0;
    double psi_c0 = 0.0;               // Psi_{c0}(t)
    double limit_max_norm = 0.0;
    // Semidistances between the tempered-universe limit cloud and the cloud from a fixed ball.
    double ball_to_tempered = 0.0;
    double tempered_to_ball = 0.0;
    bool envelope_holds = true;        // R_eta(tau)^2 <= Psi_{c0}(tau)^2 at the pullback times
    bool inclusion_holds = true;       // every cloud point inside its absorbing ball
    bool preconditions_passed = true;
    bool overridden = false;
    std::vector<AttractorCloud> clouds;
    AttractorCloud limit_cloud;
    ConditionVerdict verdict;
};

RobustnessReport robustness_experiment(const PerturbedFamily& family, const Grid& grid,
                                       std::span<const double> eta_schedule, const RobustnessOptions& options,
                                       std::span<const ConditionVerdict> preconditions = {});

// Columns eta, distance, R_eta(t), max_norm, status.
void write_csv(std::ostream& os, const RobustnessReport& report);
void write_report(std::ostream& os, const RobustnessReport& report);

struct FiniteTimeReport {
    double tau = 0.0;
    std::vector<double> checkpoints;
    std::vector<double> etas;
    Eigen::MatrixXd distances;   // (eta, checkpoint) -> |u^eta(s) - u^0(s)|
    Eigen::MatrixXd norm_gaps;   // (eta, checkpoint) -> ||u^eta(s)|^2 - |u^0(s)|^2|
    std::vector<double> errors;  // e(eta) = max over checkpoints
    double observed_order = 0.0; // least-squares slope of log e against log eta
    double dt_error = 0.0;       // max_s |u^0_dt(s) - u^0_{dt/2}(s)|
    bool norm_gaps_decreasing = true;
    ConditionVerdict verdict;
};

FiniteTimeReport finite_time_convergence_experiment(const PerturbedFamily& family, const Grid& grid, double tau,
                                                    const FieldD& u_tau, std::span<const double> checkpoints,
                                                    std::span<const double> eta_schedule, double dt,
                                                    const IntegrationOptions& options = {});

// Columns eta, s, distance, norm_gap.
void write_csv(std::ostream& os, const FiniteTimeReport& report);

}  // namespace nlrd
