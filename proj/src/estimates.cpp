#include "nlrd/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "nlrd/csv.hpp"

namespace nlrd {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double simpson_step(const std::function<double(double)>& f, double a, double fa, double m, double fm, double b,
                    double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

void require_mu(double mu, double m, double lambda1) {
    if (!(mu > 0.0 && mu < 2.0 * m * lambda1)) {
        std::ostringstream msg;
        msg << "mu = " << mu << " outside the open interval (0, 2 m lambda_1) = (0, " << 2.0 * m * lambda1 << ")";
        throw InvalidMu(msg.str());
    }
}

}  // namespace

double exp_integral(double k, double a, double b, double shift) {
    if (!(b > a)) return 0.0;
    if (a == -inf) {
        if (!(k > 0.0)) return inf;
        return std::exp(k * b - shift) / k;
    }
    if (b == inf) {
        if (!(k < 0.0)) return inf;
        return std::exp(k * a - shift) / (-k);
    }
    if (k == 0.0) return (b - a) * std::exp(-shift);
    if (k > 0.0) return std::exp(k * b - shift) * (-std::expm1(-k * (b - a))) / k;
    return std::exp(k * a - shift) * (-std::expm1(k * (b - a))) / (-k);
}

// --------------------------------------------------------------------------
// DualForcing

DualForcing::DualForcing(const ForcingDesc& forcing, const Grid& grid) {
    const auto& terms = forcing.terms();
    const auto n = static_cast<Eigen::Index>(terms.size());
    std::vector<FieldD> profiles;
    profiles.reserve(terms.size());
    for (const auto& term : terms) {
        profiles.push_back(term.profile.sample(grid));
        amplitudes_.push_back(term.amplitude);
    }
    gram_.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const FieldD w = solve_poisson(profiles[static_cast<std::size_t>(j)]);
        for (Eigen::Index k = 0; k <= j; ++k) {
            const double g = inner(profiles[static_cast<std::size_t>(k)], w);
            gram_(j, k) = g;
            gram_(k, j) = g;
        }
        profile_dual_norms_.push_back(std::sqrt(std::max(gram_(j, j), 0.0)));
    }

    std::map<std::tuple<double, double, double>, double> merged;
    std::vector<std::tuple<double, double, double>> order;
    std::vector<std::vector<ExpWindow>> windows;
    for (const auto& a : amplitudes_) windows.push_back(a.windows());
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k <= j; ++k) {
            const double g = (j == k ? 1.0 : 2.0) * gram_(j, k);
            if (g == 0.0) continue;
            for (const auto& wj : windows[static_cast<std::size_t>(j)])
                for (const auto& wk : windows[static_cast<std::size_t>(k)]) {
                    const double lo = std::max(wj.lo, wk.lo);
                    const double hi = std::min(wj.hi, wk.hi);
                    if (!(hi > lo)) continue;
                    const auto key = std::make_tuple(wj.rate + wk.rate, lo, hi);
                    auto [it, inserted] = merged.emplace(key, 0.0);
                    if (inserted) order.push_back(key);
                    it->second += g * wj.coefficient * wk.coefficient;
                }
        }
    }
    for (const auto& key : order) {
        const double c = merged[key];
        if (c != 0.0) pairs_.push_back({c, std::get<0>(key), std::get<1>(key), std::get<2>(key)});
    }
    for (const auto& a : amplitudes_) {
        auto b = a.breakpoints();
        breakpoints_.insert(breakpoints_.end(), b.begin(), b.end());
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

double DualForcing::dual_norm_squared(double t) const {
    if (empty()) return 0.0;
    Eigen::VectorXd phi(static_cast<Eigen::Index>(amplitudes_.size()));
    for (std::size_t j = 0; j < amplitudes_.size(); ++j) phi[static_cast<Eigen::Index>(j)] = amplitudes_[j](t);
    return std::max(phi.dot(gram_ * phi), 0.0);
}

double DualForcing::weighted_integral(double mu, double lo, double hi, double offset) const {
    double acc = 0.0;
    for (const auto& p : pairs_) {
        const double part = exp_integral(mu + p.rate, std::max(lo, p.lo), std::min(hi, p.hi), mu * offset);
        if (std::isinf(part)) {
            std::ostringstream msg;
            msg << "tail integral diverges: window rate " << p.rate << " with mu = " << mu
                << " (need 2 rho + mu > 0)";
            throw DivergentTail(msg.str());
        }
        acc += p.coefficient * part;
    }
    return std::max(acc, 0.0);
}

bool DualForcing::tail_converges(double mu) const {
    try {
        (void)weighted_integral(mu, -inf, 0.0);
        return true;
    } catch (const DivergentTail&) {
        return false;
    }
}

TailBound DualForcing::dual_tail_bound() const {
    TailBound out{0.0, inf};
    for (std::size_t j = 0; j < amplitudes_.size(); ++j) {
        const TailBound b = amplitudes_[j].tail_bound();
        const double c = b.constant * profile_dual_norms_[j];
        if (c == 0.0) continue;
        out.constant += c;
        out.rate = std::min(out.rate, b.rate);
    }
    if (out.rate == inf) out.rate = 0.0;
    return out;
}

// --------------------------------------------------------------------------

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    constexpr int panels = 16;
    double acc = 0.0;
    const double width = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * width;
        const double hi = i + 1 == panels ? b : a + (i + 1) * width;
        const double mid = 0.5 * (lo + hi);
        const double flo = f(lo);
        const double fmid = f(mid);
        const double fhi = f(hi);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        acc += simpson_step(f, lo, flo, mid, fmid, hi, fhi, whole, tol / panels, 40);
    }
    return acc;
}

TailIntegralResult tail_integral(const ForcingDesc& forcing, const Grid& grid, double mu, double t, double tol,
                                 std::optional<IntegrationMethod> force) {
    if (!(tol > 0.0)) throw std::invalid_argument("tail_integral: tol must be positive");
    const DualForcing dual(forcing, grid);
    TailIntegralResult out;
    if (dual.empty()) {
        out.truncation_point = -inf;
        return out;
    }

    bool exact = true;
    for (const auto& term : forcing.terms()) exact = exact && term.amplitude.has_exact_integral();
    if (exact && force.value_or(IntegrationMethod::closed_form) == IntegrationMethod::closed_form) {
        out.value = dual.weighted_integral(mu, -inf, t);
        out.truncation_point = -inf;
        out.method = IntegrationMethod::closed_form;
        return out;
    }

    const TailBound bound = dual.dual_tail_bound();
    const double k = 2.0 * bound.rate + mu;
    const double k2 = bound.constant * bound.constant;
    if (!(k > 0.0)) throw DivergentTail("tail bound does not decay: 2 rho + mu <= 0");
    double cut = std::min(t, 0.0);
    if (k2 > 0.0) cut = std::min(cut, std::log(0.5 * tol * k / k2) / k);
    const double tail = k2 * std::exp(k * cut) / k;

    std::vector<double> nodes{cut};
    for (double b : dual.breakpoints())
        if (b > cut && b < t) nodes.push_back(b);
    nodes.push_back(t);
    const auto integrand = [&](double s) { return std::exp(mu * s) * dual.dual_norm_squared(s); };
    double value = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double share = 0.5 * tol * (nodes[i + 1] - nodes[i]) / std::max(t - cut, 1e-300);
        value += adaptive_simpson(integrand, nodes[i], nodes[i + 1], share);
    }
    out.value = value;
    out.truncation_point = cut;
    out.tail_error_bound = tail;
    out.method = IntegrationMethod::quadrature;
    return out;
}

double mu_ceiling(double m, const Grid& grid, EigenvalueMode mode) { return 2.0 * m * first_eigenvalue(grid, mode); }

double gronwall_bound(const ProblemSpec& spec, const Grid& grid, double mu, double u_tau_normsq, double tau, double t,
                      EigenvalueMode mode) {
    spec.require_grid(grid);
    const double m = spec.viscosity_floor();
    const double lambda1 = first_eigenvalue(grid, mode);
    require_mu(mu, m, lambda1);
    if (t < tau) throw std::invalid_argument("gronwall_bound: t must not precede tau");
    const double decay = std::exp(-mu * (t - tau)) * u_tau_normsq;
    const double source = 2.0 * spec.kappa() * spec.measure() / mu;
    double forcing = 0.0;
    if (!spec.forcing().empty()) {
        const DualForcing dual(spec.forcing(), grid);
        forcing = dual.weighted_integral(mu, tau, t, t) / (2.0 * (m - mu / (2.0 * lambda1)));
    }
    return decay + source + forcing;
}

// --------------------------------------------------------------------------
// Absorbing radii and envelope

AbsorbingRadius::AbsorbingRadius(const ProblemSpec& spec, const Grid& grid, double mu, double eta,
                                 EigenvalueMode mode)
    : forcing_(std::make_shared<const DualForcing>(spec.forcing(), grid)),
      eta_(eta),
      mu_(mu),
      kappa_measure_(spec.kappa() * spec.measure()),
      m_(spec.viscosity_floor()),
      lambda1_(first_eigenvalue(grid, mode)) {
    spec.require_grid(grid);
    require_mu(mu_, m_, lambda1_);
    if (!forcing_->tail_converges(mu_)) throw DivergentTail("absorbing radius: forcing tail diverges at this mu");
}

RadiusEvaluation AbsorbingRadius::evaluate(double t) const {
    const double constant = 1.0 + 2.0 * kappa_measure_ / mu_;
    const double forcing = forcing_->weighted_integral(mu_, -inf, t, t) / (2.0 * (m_ - mu_ / (2.0 * lambda1_)));
    return {t, constant + forcing, constant, forcing};
}

double AbsorbingRadius::operator()(double t) const { return std::sqrt(squared(t)); }

RadiusEvaluation absorbing_radius(const ProblemSpec& spec, const Grid& grid, double mu_eta, double t,
                                  EigenvalueMode mode) {
    return AbsorbingRadius(spec, grid, mu_eta, 0.0, mode).evaluate(t);
}

double radius_forcing_term(const ProblemSpec& spec, const Grid& grid, double m, double mu, double t,
                           EigenvalueMode mode) {
    const double lambda1 = first_eigenvalue(grid, mode);
    require_mu(mu, m, lambda1);
    if (spec.forcing().empty()) return 0.0;
    const DualForcing dual(spec.forcing(), grid);
    return dual.weighted_integral(mu, -inf, t, t) / (2.0 * (m - mu / (2.0 * lambda1)));
}

double psi_envelope_squared(const PerturbedFamily& family, const Grid& grid, double c, double t,
                            std::span<const double> eta_probes, const EnvelopeOptions& options) {
    if (eta_probes.size() < 4) throw std::invalid_argument("psi envelope needs at least 4 eta probes");
    if (c < 0.0) throw std::invalid_argument("psi envelope constant must be nonnegative");
    std::vector<double> probes(eta_probes.begin(), eta_probes.end());
    std::sort(probes.begin(), probes.end(), std::greater<>());
    const std::size_t k = std::min(options.tail_probes, probes.size());
    const double m = family.viscosity_floor();
    double worst = 0.0;
    for (std::size_t i = probes.size() - k; i < probes.size(); ++i) {
        const double eta = probes[i];
        const ProblemSpec spec = instantiate(family, eta);
        worst = std::max(worst, radius_forcing_term(spec, grid, m, family.mu_at(eta), t, options.mode));
    }
    return c + worst;
}

ConditionVerdict tempered_membership(const std::function<double(double)>& radius_squared, double sigma,
                                     std::span<const double> tau_sequence, double tol) {
    if (tau_sequence.size() < 8) throw std::invalid_argument("tempered_membership needs at least 8 tau samples");
    for (std::size_t i = 1; i < tau_sequence.size(); ++i)
        if (!(tau_sequence[i] < tau_sequence[i - 1]))
            throw std::invalid_argument("tempered_membership: tau sequence must decrease");
    ConditionVerdict v;
    v.assumption = "tempered";
    std::vector<double> products;
    for (double tau : tau_sequence) {
        const double product = std::exp(sigma * tau) * radius_squared(tau);
        products.push_back(product);
        v.add("exp(sigma*tau)*R2", tau, product);
    }
    v.thresholds = {{"sigma", sigma}, {"tol", tol}};
    v.verdict = decreasing_below(products, tol);
    if (v.verdict == Verdict::inconclusive) v.note = "e^{sigma tau} R^2 is not monotone over the tail samples";
    return v;
}

void write_radius_csv(std::ostream& os, std::span<const double> times, std::span<const double> r2,
                      std::span<const double> psi2) {
    os << "t,R2,Psi2\n";
    for (std::size_t i = 0; i < times.size(); ++i) write_csv_row(os, {times[i], r2[i], psi2[i]});
}

}  // namespace nlrd
