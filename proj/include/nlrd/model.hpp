#pragma once

// Problem descriptors for the nonlocal reaction-diffusion family
//
//   u_t - a(l(u)) u_xx = f(u) + h(t, x)  on (0, L),  u = 0 on the boundary,
//
// with l(u) = (g_l, u). Every ingredient is a member of a small closed set of
// laws so that tail bounds and temporal integrals can be certified in closed
// form. Descriptors are immutable values.

#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "nlrd/grid.hpp"
#include "nlrd/verdict.hpp"

namespace nlrd {

// ---------------------------------------------------------------------------
// Viscosity a : R -> [m, inf)

struct ConstantViscosity {
    double value;
    bool operator==(const ConstantViscosity&) const = default;
};

// floor + amplitude / (1 + ((s - center) / width)^2), amplitude >= 0.
struct RationalBumpViscosity {
    double floor;
    double amplitude;
    double center;
    double width;
    bool operator==(const RationalBumpViscosity&) const = default;
};

// Linear interpolation between (s, a) breakpoints sorted by s, constant beyond the ends.
struct PiecewiseLinearViscosity {
    std::vector<std::pair<double, double>> breakpoints;
    bool operator==(const PiecewiseLinearViscosity&) const = default;
};

// offset + amplitude * sin(frequency * s), with offset - |amplitude| >= floor.
struct OscillatingViscosity {
    double floor;
    double offset;
    double amplitude;
    double frequency;
    bool operator==(const OscillatingViscosity&) const = default;
};

class ViscosityDesc {
public:
    using Law = std::variant<ConstantViscosity, RationalBumpViscosity, PiecewiseLinearViscosity, OscillatingViscosity>;

    explicit ViscosityDesc(Law law);

    static ViscosityDesc constant(double value) { return ViscosityDesc(ConstantViscosity{value}); }
    static ViscosityDesc rational_bump(double floor, double amplitude, double center, double width) {
        return ViscosityDesc(RationalBumpViscosity{floor, amplitude, center, width});
    }
    static ViscosityDesc piecewise_linear(std::vector<std::pair<double, double>> breakpoints) {
        return ViscosityDesc(PiecewiseLinearViscosity{std::move(breakpoints)});
    }
    static ViscosityDesc oscillating(double floor, double offset, double amplitude, double frequency) {
        return ViscosityDesc(OscillatingViscosity{floor, offset, amplitude, frequency});
    }

    double operator()(double s) const;
    // The lower bound m guaranteed by the law.
    double floor() const;
    // Points an audit must include (kinks of piecewise-linear tables).
    std::vector<double> breakpoints() const;
    const Law& law() const noexcept { return law_; }

    bool operator==(const ViscosityDesc&) const = default;

private:
    Law law_;
};

// ---------------------------------------------------------------------------
// Reaction f with its dissipativity certificate
//   |f(s)| <= kappa1 + alpha1 |s|^{p-1},   f(s) s <= kappa2 - alpha2 |s|^p.

struct ReactionCertificate {
    double kappa1;
    double alpha1;
    double kappa2;
    double alpha2;
    double p;

    double conjugate_exponent() const noexcept { return p / (p - 1.0); }
    bool operator==(const ReactionCertificate&) const = default;
};

// f(s) = -alpha |s|^{p-2} s
struct OddPower {
    double alpha;
    double p;
    bool operator==(const OddPower&) const = default;
};

// f(s) = -alpha |s|^{p-2} s + bounded_amplitude
struct OddPowerPlusBounded {
    double alpha;
    double p;
    double bounded_amplitude;
    bool operator==(const OddPowerPlusBounded&) const = default;
};

class ReactionDesc {
public:
    using Law = std::variant<OddPower, OddPowerPlusBounded>;

    ReactionDesc(Law law, ReactionCertificate certificate);

    // Sharp constants for alpha > 0: OddPower gets (0, alpha, 0, alpha); the bounded
    // variant gets kappa1 = |b|, alpha2 = alpha/2 and kappa2 = max_s (|b| s - alpha s^p / 2).
    static ReactionCertificate canonical_certificate(const Law& law);
    static ReactionDesc odd_power(double alpha, double p);
    static ReactionDesc odd_power_plus_bounded(double alpha, double p, double bounded_amplitude);

    double operator()(double s) const;
    const Law& law() const noexcept { return law_; }
    const ReactionCertificate& certificate() const noexcept { return certificate_; }

    bool operator==(const ReactionDesc&) const = default;

private:
    Law law_;
    ReactionCertificate certificate_;
};

// ---------------------------------------------------------------------------
// Spatial profiles on (0, L)

struct ConstantProfile {
    double value;
    bool operator==(const ConstantProfile&) const = default;
};

// amplitude * sin(mode * pi * x / L)
struct SineProfile {
    int mode;
    double amplitude;
    bool operator==(const SineProfile&) const = default;
};

// amplitude * 4 x (L - x) / L^2
struct ParabolaProfile {
    double amplitude;
    bool operator==(const ParabolaProfile&) const = default;
};

class SpatialProfile {
public:
    using Law = std::variant<ConstantProfile, SineProfile, ParabolaProfile>;

    explicit SpatialProfile(Law law) : law_(law) {}
    static SpatialProfile constant(double v) { return SpatialProfile(ConstantProfile{v}); }
    static SpatialProfile sine(int mode, double amplitude) { return SpatialProfile(SineProfile{mode, amplitude}); }
    static SpatialProfile parabola(double amplitude) { return SpatialProfile(ParabolaProfile{amplitude}); }

    double operator()(double x, double length) const;
    FieldD sample(const Grid& grid) const;
    bool vanishes_on_boundary(double length) const;
    const Law& law() const noexcept { return law_; }

    bool operator==(const SpatialProfile&) const = default;

private:
    Law law_;
};

// ---------------------------------------------------------------------------
// Temporal amplitudes

// c e^{rate t} restricted to [lo, hi); lo may be -inf and hi +inf.
struct ExpWindow {
    double coefficient;
    double rate;
    double lo;
    double hi;
    bool operator==(const ExpWindow&) const = default;
};

// |phi(t)| <= constant * e^{rate t} for every t <= 0.
struct TailBound {
    double constant;
    double rate;
};

class TemporalProfile;

struct ConstantTemporal {
    double value;
    bool operator==(const ConstantTemporal&) const = default;
};

// value * e^{rate t}
struct ExponentialTemporal {
    double value;
    double rate;
    bool operator==(const ExponentialTemporal&) const = default;
};

// value * e^{rate t} on [left, left + width), zero elsewhere.
struct BumpTemporal {
    double value;
    double left;
    double width;
    double rate = 0.0;
    bool operator==(const BumpTemporal&) const = default;
};

// factor * inner, with factor the eta-dependent scale fhat(eta).
struct EtaScaledTemporal {
    std::shared_ptr<const TemporalProfile> inner;
    double factor;
};

struct SumTemporal {
    std::vector<TemporalProfile> terms;
};

bool operator==(const EtaScaledTemporal& a, const EtaScaledTemporal& b);
bool operator==(const SumTemporal& a, const SumTemporal& b);

class TemporalProfile {
public:
    using Law = std::variant<ConstantTemporal, ExponentialTemporal, BumpTemporal, EtaScaledTemporal, SumTemporal>;

    explicit TemporalProfile(Law law);

    static TemporalProfile constant(double value) { return TemporalProfile(ConstantTemporal{value}); }
    static TemporalProfile exponential(double value, double rate) {
        return TemporalProfile(ExponentialTemporal{value, rate});
    }
    static TemporalProfile bump(double value, double left, double width, double rate = 0.0) {
        return TemporalProfile(BumpTemporal{value, left, width, rate});
    }
    static TemporalProfile scaled(TemporalProfile inner, double factor);
    static TemporalProfile sum(std::vector<TemporalProfile> terms);

    double operator()(double t) const;
    TailBound tail_bound() const;
    // Every law of the closed set expands into exponential windows, so the
    // temporal integrals against e^{mu s} are available in closed form.
    bool has_exact_integral() const noexcept { return true; }
    // Expansion into exponential windows; windows sharing (rate, lo, hi) are merged.
    std::vector<ExpWindow> windows() const;
    // Discontinuity locations (bump edges).
    std::vector<double> breakpoints() const;
    const Law& law() const noexcept { return law_; }

    bool operator==(const TemporalProfile& other) const { return law_ == other.law_; }

private:
    Law law_;
};

// Adds coefficients of windows with identical (rate, lo, hi) and drops exact zeros.
std::vector<ExpWindow> merge_windows(std::vector<ExpWindow> windows);

// ---------------------------------------------------------------------------
// Forcing h(t, x) = sum_j phi_j(t) g_j(x)

struct ForcingTerm {
    SpatialProfile profile;
    TemporalProfile amplitude;
    bool operator==(const ForcingTerm&) const = default;
};

class ForcingDesc {
public:
    ForcingDesc() = default;
    // Validates: spatial profiles vanish on the boundary, tail bounds hold on sampled t <= 0.
    ForcingDesc(std::vector<ForcingTerm> terms, double domain_length);

    static ForcingDesc none() { return ForcingDesc(); }

    const std::vector<ForcingTerm>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }
    FieldD evaluate(const Grid& grid, double t) const;
    ForcingDesc scaled(double factor) const;
    // Sum and difference merge terms with identical spatial profiles.
    ForcingDesc plus(const ForcingDesc& other) const;
    ForcingDesc minus(const ForcingDesc& other) const;
    std::vector<double> breakpoints() const;

    bool operator==(const ForcingDesc&) const = default;

private:
    std::vector<ForcingTerm> terms_;
};

struct WeightDesc {
    SpatialProfile profile;
    FieldD sample(const Grid& grid) const { return profile.sample(grid); }
    bool operator==(const WeightDesc&) const = default;
};

double nonlocal_value(const WeightDesc& weight, const FieldD& u);

// ---------------------------------------------------------------------------

class ProblemSpec {
public:
    ProblemSpec(ViscosityDesc viscosity, ReactionDesc reaction, ForcingDesc forcing, WeightDesc weight,
                double domain_length);

    const ViscosityDesc& viscosity() const noexcept { return viscosity_; }
    const ReactionDesc& reaction() const noexcept { return reaction_; }
    const ForcingDesc& forcing() const noexcept { return forcing_; }
    const WeightDesc& weight() const noexcept { return weight_; }
    double domain_length() const noexcept { return length_; }
    double measure() const noexcept { return length_; }
    // m: lower bound of the viscosity.
    double viscosity_floor() const { return viscosity_.floor(); }
    // kappa in the Gronwall/absorbing bounds: the dissipativity constant kappa2.
    double kappa() const noexcept { return reaction_.certificate().kappa2; }

    ProblemSpec with_forcing(ForcingDesc forcing) const;
    void require_grid(const Grid& grid) const;

    bool operator==(const ProblemSpec&) const = default;

private:
    ViscosityDesc viscosity_;
    ReactionDesc reaction_;
    ForcingDesc forcing_;
    WeightDesc weight_;
    double length_;
};

// eta -> (P_eta, mu_eta) together with the schedule and the limit problem (P_0).
class PerturbedFamily {
public:
    using SpecRule = std::function<ProblemSpec(double)>;
    using MuRule = std::function<double(double)>;

    PerturbedFamily(std::vector<double> eta_schedule, SpecRule spec_at, MuRule mu_at, ProblemSpec limit_spec,
                    double mu_zero);

    const std::vector<double>& schedule() const noexcept { return schedule_; }
    ProblemSpec spec_at(double eta) const { return spec_rule_(eta); }
    double mu_at(double eta) const { return mu_rule_(eta); }
    const ProblemSpec& limit_spec() const noexcept { return limit_; }
    double mu_zero() const noexcept { return mu_zero_; }
    double domain_length() const noexcept { return limit_.domain_length(); }

    // Uniform (A1) constants over the schedule and the limit: m = min floor, kappa = max kappa2.
    double viscosity_floor() const;
    double kappa() const;

    // The last k entries of the schedule (the smallest etas).
    std::vector<double> smallest(std::size_t k) const;
    PerturbedFamily with_schedule(std::vector<double> eta_schedule) const;

private:
    std::vector<double> schedule_;
    SpecRule spec_rule_;
    MuRule mu_rule_;
    ProblemSpec limit_;
    double mu_zero_;
};

// eta = 0 yields the limit spec; any other eta must be on the schedule.
ProblemSpec instantiate(const PerturbedFamily& family, double eta);

// Sampling audit of (A1) on [-range, range]: growth bound, dissipativity bound and
// a(s) >= m. Samples include both endpoints, s = 0 and the viscosity breakpoints.
ConditionVerdict check_A1(const ProblemSpec& spec, double range, int n_samples);

}  // namespace nlrd
