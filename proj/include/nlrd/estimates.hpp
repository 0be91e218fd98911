#pragma once

// Closed-form bounds for the family: Gronwall estimate, weighted tail integrals
// of the forcing's dual norm, absorbing radii, the limsup envelope Psi_c and
// tempered-universe membership tests.
//
// Dual norms are discrete H^{-1} norms on the supplied grid. lambda_1 is the
// discrete eigenvalue unless the caller asks for the continuous one.

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nlrd/grid.hpp"
#include "nlrd/model.hpp"
#include "nlrd/verdict.hpp"

namespace nlrd {

// ||h(s)||_*^2 = phi(s)^T G phi(s) with G the Gram matrix of the spatial
// profiles in the discrete H^{-1} inner product.
class DualForcing {
public:
    DualForcing(const ForcingDesc& forcing, const Grid& grid);

    double dual_norm_squared(double t) const;
    bool empty() const noexcept { return gram_.size() == 0; }
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }

    // e^{-mu * offset} * int_lo^hi e^{mu s} ||h(s)||_*^2 ds in closed form; lo may be -inf.
    // Throws DivergentTail when lo = -inf and some window grows too fast.
    double weighted_integral(double mu, double lo, double hi, double offset = 0.0) const;
    bool tail_converges(double mu) const;

    // ||h(s)||_* <= constant * e^{rate s} for s <= 0 (triangle inequality over terms).
    TailBound dual_tail_bound() const;
    std::vector<double> breakpoints() const { return breakpoints_; }

private:
    struct PairWindow {
        double coefficient;  // G_jk * c_j * c_k
        double rate;
        double lo;
        double hi;
    };
    std::vector<TemporalProfile> amplitudes_;
    std::vector<double> profile_dual_norms_;
    std::vector<PairWindow> pairs_;
    std::vector<double> breakpoints_;
    Eigen::MatrixXd gram_;
};

// e^{-shift} int_a^b e^{k s} ds without forming e^{k s} at large |s|; a may be -inf and b +inf.
// Returns +inf when the integral diverges.
double exp_integral(double k, double a, double b, double shift = 0.0);

enum class IntegrationMethod { closed_form, quadrature };

struct TailIntegralResult {
    double value = 0.0;
    double truncation_point = 0.0;  // lower limit of the numerical part (-inf for closed forms)
    double tail_error_bound = 0.0;
    IntegrationMethod method = IntegrationMethod::closed_form;
};

// int_{-inf}^t e^{mu s} ||h(s)||_*^2 ds. The closed form is used when every
// temporal law admits one; `force` selects adaptive Simpson on [T_cut, t] plus a
// certified exponential tail bound instead.
TailIntegralResult tail_integral(const ForcingDesc& forcing, const Grid& grid, double mu, double t, double tol,
                                 std::optional<IntegrationMethod> force = std::nullopt);

// Adaptive Simpson quadrature of `f` on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

// Open interval (0, 2 m lambda_1) that every tempered exponent must lie in.
double mu_ceiling(double m, const Grid& grid, EigenvalueMode mode = EigenvalueMode::discrete);

// e^{-mu(t-tau)} |u_tau|^2 + 2 kappa |Omega| / mu
//   + e^{-mu t} / (2 (m - mu / (2 lambda_1))) * int_tau^t e^{mu s} ||h(s)||_*^2 ds
double gronwall_bound(const ProblemSpec& spec, const Grid& grid, double mu, double u_tau_normsq, double tau, double t,
                      EigenvalueMode mode = EigenvalueMode::discrete);

struct RadiusEvaluation {
    double t;
    double radius_squared;
    double constant_part;  // 1 + 2 kappa |Omega| / mu
    double forcing_part;   // discounted tail term
};

// R^2(t) = 1 + 2 kappa |Omega| / mu + e^{-mu t} / (2 (m - mu / (2 lambda_1))) int_{-inf}^t e^{mu s} ||h||_*^2 ds
class AbsorbingRadius {
public:
    AbsorbingRadius(const ProblemSpec& spec, const Grid& grid, double mu, double eta = 0.0,
                    EigenvalueMode mode = EigenvalueMode::discrete);

    RadiusEvaluation evaluate(double t) const;
    double squared(double t) const { return evaluate(t).radius_squared; }
    double operator()(double t) const;

    double eta() const noexcept { return eta_; }
    double mu() const noexcept { return mu_; }
    double kappa_measure() const noexcept { return kappa_measure_; }
    double viscosity_floor() const noexcept { return m_; }
    double lambda1() const noexcept { return lambda1_; }

private:
    std::shared_ptr<const DualForcing> forcing_;
    double eta_;
    double mu_;
    double kappa_measure_;
    double m_;
    double lambda1_;
};

RadiusEvaluation absorbing_radius(const ProblemSpec& spec, const Grid& grid, double mu_eta, double t,
                                  EigenvalueMode mode = EigenvalueMode::discrete);

// e^{-mu t} / (2 (m - mu / (2 lambda_1))) * int_{-inf}^t e^{mu s} ||h_eta(s)||_*^2 ds for one member.
double radius_forcing_term(const ProblemSpec& spec, const Grid& grid, double m, double mu, double t,
                           EigenvalueMode mode = EigenvalueMode::discrete);

struct EnvelopeOptions {
    std::size_t tail_probes = 4;  // limsup over eta -> max over this many smallest probes
    EigenvalueMode mode = EigenvalueMode::discrete;
};

// Psi_c(t)^2 = c + limsup_eta (radius forcing term of member eta at t).
double psi_envelope_squared(const PerturbedFamily& family, const Grid& grid, double c, double t,
                            std::span<const double> eta_probes, const EnvelopeOptions& options = {});

// e^{sigma tau_k} R(tau_k)^2 must decrease along the (decreasing) tau sequence and end below tol.
ConditionVerdict tempered_membership(const std::function<double(double)>& radius_squared, double sigma,
                                     std::span<const double> tau_sequence, double tol);

// Columns t, R2, Psi2.
void write_radius_csv(std::ostream& os, std::span<const double> times, std::span<const double> r2,
                      std::span<const double> psi2);

}  // namespace nlrd
