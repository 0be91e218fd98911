#pragma once

// Numerical audits of the family assumptions (A2)-(A5), the tempered-exponent
// limits and the sufficient conditions for (A5).
//
// Limits in eta are probed along a decreasing sequence of schedule values and
// limits in t along a decreasing sequence of times. Each becomes a
// trend-plus-threshold test (see decreasing_below), and the sampled values are
// kept in the verdict's evidence table.

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "nlrd/estimates.hpp"
#include "nlrd/grid.hpp"
#include "nlrd/model.hpp"
#include "nlrd/verdict.hpp"

namespace nlrd {

// Finite stand-in for the weak topology: the first n_modes discrete sine modes
// followed by n_random seeded random fields, all of unit discrete L2 norm.
using Dictionary = std::vector<FieldD>;
Dictionary default_dictionary(const Grid& grid, std::uint64_t seed = 20240601, int n_modes = 8, int n_random = 4);

struct Window {
    double lo;
    double hi;
};

// int_lo^hi phi(s) ds in closed form from the window expansion.
double temporal_integral(const TemporalProfile& phi, double lo, double hi);

// Probes sorted decreasing; throws UnknownEta for values off the schedule.
std::vector<double> sorted_probes(const PerturbedFamily& family, std::span<const double> eta_probes);

// mu_eta inside (0, 2 m lambda_1) and a convergent tail integral at t = 0 for every probe.
ConditionVerdict check_A2(const PerturbedFamily& family, const Grid& grid, std::span<const double> eta_probes,
                          double tol, EigenvalueMode mode = EigenvalueMode::discrete);

// sup_{|s| <= K} |a_eta - a_0|, sup_{|s| <= K} |f_eta - f_0|, max_j |(l_eta - l_0, v_j)| and
// max_j |int_window (h_eta - h_0, v_j) ds| must each settle below tol along the probes.
ConditionVerdict check_A3(const PerturbedFamily& family, const Grid& grid, double K, const Dictionary& dictionary,
                          std::span<const double> eta_probes, double tol, Window window = {-1.0, 0.0});

enum class A4Mode { strong_dual, weak_l2 };

// strong_dual: int_window ||h_eta - h_0||_*^2 ds -> 0.
// weak_l2: pairings of h_eta - h_0 with v_j times the indicator of each quarter of the window -> 0.
ConditionVerdict check_A4(const PerturbedFamily& family, const Grid& grid, A4Mode mode, Window window,
                          const Dictionary& dictionary, std::span<const double> eta_probes, double tol);

// (i) int_{-inf}^0 e^{mu0 s} ||h_0||_*^2 ds < inf and
// (ii) Q(t) = max over the smallest probes of
//        e^{(mu0 - mu_eta) t} / (m - mu_eta / (2 lambda_1)) int_{-inf}^t e^{mu_eta s} ||h_eta||_*^2 ds
//      settles below tol along t_sequence.
ConditionVerdict check_A5(const PerturbedFamily& family, const Grid& grid, double mu0, std::span<const double> t_sequence,
                          std::span<const double> eta_probes, double tol, const EnvelopeOptions& options = {});

struct MuLimits {
    double lower;  // liminf over the probe tail (last half)
    double upper;  // limsup over the probe tail
    ConditionVerdict verdict;  // pass iff lower > tol
};

MuLimits mu_limits(const PerturbedFamily& family, std::span<const double> eta_probes, double tol);

// sup_eta int_{-inf}^0 e^{mu_eta s} ||h_eta||_*^2 ds < inf: all tails finite and the max over the
// second half of the probes does not exceed the max over the first half.
ConditionVerdict check_uniform_tail(const PerturbedFamily& family, const Grid& grid,
                                    std::span<const double> eta_probes, double slack = 1e-9);

// lim_{t -> -inf} max over the smallest probes of int_{-inf}^t e^{mu_eta s} ||h_eta||_*^2 ds = 0.
ConditionVerdict check_vanishing_tail(const PerturbedFamily& family, const Grid& grid,
                                      std::span<const double> t_sequence, std::span<const double> eta_probes,
                                      double tol, const EnvelopeOptions& options = {});

struct SufficientConditionOptions {
    Window window{-10.0, 0.0};
    std::size_t tail_probes = 4;
    EigenvalueMode mode = EigenvalueMode::discrete;
};

struct SufficientConditionReport {
    ConditionVerdict assumption_A2;
    ConditionVerdict uniform_tail;
    MuLimits mu;
    ConditionVerdict mu_convergence;
    ConditionVerdict strong_convergence;
    ConditionVerdict limsup_equality;
    ConditionVerdict vanishing_tail;
    // A5 through mu_eta -> mu0, strong convergence and equality of the limsup of tails.
    bool strong_branch = false;
    // A5 through 0 < liminf <= limsup < 2 m lambda_1 with mu0 = limsup + epsilon.
    bool spread_branch = false;
    // vanishing_tail fails although every single member's tail vanishes as t -> -inf.
    bool noncommutation = false;
    double recommended_mu0 = 0.0;
    ConditionVerdict summary;
};

SufficientConditionReport sufficient_condition_report(const PerturbedFamily& family, const Grid& grid,
                                                      std::span<const double> eta_probes,
                                                      std::span<const double> t_sequence, double tol,
                                                      const SufficientConditionOptions& options = {});

// psi_eta(s) = e^{-mu s} on [-1/eta - 1, -1/eta], zero elsewhere, so that the
// integral of e^{mu s} psi_eta over its support equals 1.
struct NoncommutationTable {
    double mu = 0.0;
    std::vector<double> etas;   // decreasing
    std::vector<double> times;  // decreasing
    Eigen::MatrixXd integrals;  // (eta, t) -> int_{-inf}^t e^{mu s} psi_eta(s) ds by adaptive quadrature
    std::vector<double> limsup_in_eta;     // per t, max over the smallest probes
    std::vector<double> limit_in_t;        // per eta, t pushed below the support
    double limit_then_limsup = 0.0;        // lim_t limsup_eta
    double limsup_then_limit = 0.0;        // limsup_eta lim_t
    ConditionVerdict verdict;
};

NoncommutationTable noncommutation_demo(double mu, std::span<const double> eta_probes,
                                        std::span<const double> t_sequence, double tol = 1e-9,
                                        std::size_t tail_probes = 4);

// Columns eta, t, integral.
void write_csv(std::ostream& os, const NoncommutationTable& table);
void write_report(std::ostream& os, const SufficientConditionReport& report);

}  // namespace nlrd
