#include "nlrd/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nlrd/csv.hpp"
#include "nlrd/errors.hpp"

namespace nlrd {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<double> smallest_of(const std::vector<double>& sorted_desc, std::size_t k) {
    k = std::min(k, sorted_desc.size());
    return {sorted_desc.end() - static_cast<std::ptrdiff_t>(k), sorted_desc.end()};
}

std::vector<double> sorted_times(std::span<const double> t_sequence) {
    std::vector<double> t(t_sequence.begin(), t_sequence.end());
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] < t[i - 1])) throw std::invalid_argument("t_sequence must be strictly decreasing");
    if (t.size() < 2) throw std::invalid_argument("t_sequence needs at least 2 samples");
    return t;
}

std::vector<double> dense_samples(double K, std::vector<double> extra) {
    constexpr int n = 4001;
    std::vector<double> s;
    s.reserve(n + extra.size() + 1);
    for (int i = 0; i < n; ++i) s.push_back(-K + 2.0 * K * i / (n - 1));
    s.push_back(0.0);
    for (double e : extra)
        if (std::abs(e) <= K) s.push_back(e);
    return s;
}

// Integral over the window of (h, v) for a separable forcing.
double window_pairing(const ForcingDesc& h, const Grid& grid, const FieldD& v, double lo, double hi) {
    double acc = 0.0;
    for (const auto& term : h.terms()) acc += inner(term.profile.sample(grid), v) * temporal_integral(term.amplitude, lo, hi);
    return acc;
}

// Turns a nonnegative per-probe sequence into a verdict part, recording evidence.
Verdict settle(ConditionVerdict& v, const std::string& quantity, const std::vector<double>& probes,
               const std::vector<double>& values, double tol) {
    for (std::size_t i = 0; i < probes.size(); ++i) v.add(quantity, probes[i], values[i]);
    const Verdict r = decreasing_below(values, tol);
    if (r == Verdict::inconclusive) {
        if (!v.note.empty()) v.note += "; ";
        v.note += quantity + " is not monotone over the probe tail";
    } else if (r == Verdict::fail) {
        if (!v.note.empty()) v.note += "; ";
        v.note += quantity + " does not settle below tol";
    }
    return r;
}

double discounted_tail(const DualForcing& dual, double mu, double t) { return dual.weighted_integral(mu, -inf, t, t); }

}  // namespace

Dictionary default_dictionary(const Grid& grid, std::uint64_t seed, int n_modes, int n_random) {
    Dictionary out;
    for (int k = 1; k <= n_modes; ++k) {
        FieldD mode = sine_mode(grid, k);
        out.emplace_back(grid, mode.values() / l2_norm(mode));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int r = 0; r < n_random; ++r) {
        Vector<double> values(grid.size());
        for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = normal(rng);
        FieldD f(grid, values);
        out.emplace_back(grid, values / l2_norm(f));
    }
    return out;
}

double temporal_integral(const TemporalProfile& phi, double lo, double hi) {
    double acc = 0.0;
    for (const auto& w : phi.windows()) {
        const double part = exp_integral(w.rate, std::max(lo, w.lo), std::min(hi, w.hi));
        if (std::isinf(part)) throw DivergentTail("temporal integral diverges on the requested window");
        acc += w.coefficient * part;
    }
    return acc;
}

std::vector<double> sorted_probes(const PerturbedFamily& family, std::span<const double> eta_probes) {
    std::vector<double> p(eta_probes.begin(), eta_probes.end());
    const auto& s = family.schedule();
    for (double eta : p)
        if (std::find(s.begin(), s.end(), eta) == s.end()) {
            std::ostringstream msg;
            msg << "probe eta = " << eta << " is not on the family schedule";
            throw UnknownEta(msg.str());
        }
    std::sort(p.begin(), p.end(), std::greater<>());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
}

// --------------------------------------------------------------------------

ConditionVerdict check_A2(const PerturbedFamily& family, const Grid& grid, std::span<const double> eta_probes,
                          double tol, EigenvalueMode mode) {
    ConditionVerdict v;
    v.assumption = "A2";
    const auto probes = sorted_probes(family, eta_probes);
    const double ceiling = mu_ceiling(family.viscosity_floor(), grid, mode);
    v.thresholds = {{"mu_ceiling", ceiling}, {"tol", tol}};
    bool ok = true;
    for (double eta : probes) {
        const double mu = family.mu_at(eta);
        v.add("mu_eta", eta, mu);
        if (!(mu > 0.0 && mu < ceiling)) {
            ok = false;
            v.note += "mu_eta outside (0, 2 m lambda_1) at eta = " + format_real(eta) + "; ";
            continue;
        }
        const ProblemSpec spec = instantiate(family, eta);
        try {
            const double tail = tail_integral(spec.forcing(), grid, mu, 0.0, tol).value;
            v.add("tail_integral_t0", eta, tail);
            if (!std::isfinite(tail)) throw DivergentTail("non-finite tail integral");
        } catch (const DivergentTail& e) {
            ok = false;
            v.add("divergent_tail", eta, inf);
            v.note += std::string("DivergentTail at eta = ") + format_real(eta) + ": " + e.what() + "; ";
        }
    }
    v.verdict = ok ? Verdict::pass : Verdict::fail;
    return v;
}

ConditionVerdict check_A3(const PerturbedFamily& family, const Grid& grid, double K, const Dictionary& dictionary,
                          std::span<const double> eta_probes, double tol, Window window) {
    const auto probes = sorted_probes(family, eta_probes);
    if (probes.size() < 4) throw std::invalid_argument("check_A3 needs at least 4 probes");
    if (!(K > 0.0)) throw std::invalid_argument("check_A3 needs K > 0");
    ConditionVerdict v;
    v.assumption = "A3";
    v.thresholds = {{"K", K}, {"tol", tol}, {"window_lo", window.lo}, {"window_hi", window.hi}};

    const ProblemSpec limit = family.limit_spec();
    const FieldD g0 = limit.weight().sample(grid);
    std::vector<double> da, df, dl, dh;
    for (double eta : probes) {
        const ProblemSpec spec = instantiate(family, eta);
        auto breaks = spec.viscosity().breakpoints();
        const auto limit_breaks = limit.viscosity().breakpoints();
        breaks.insert(breaks.end(), limit_breaks.begin(), limit_breaks.end());
        double sup_a = 0.0;
        double sup_f = 0.0;
        for (double s : dense_samples(K, breaks)) {
            sup_a = std::max(sup_a, std::abs(spec.viscosity()(s) - limit.viscosity()(s)));
            sup_f = std::max(sup_f, std::abs(spec.reaction()(s) - limit.reaction()(s)));
        }
        const FieldD dg(grid, spec.weight().sample(grid).values() - g0.values());
        const ForcingDesc diff = spec.forcing().minus(limit.forcing());
        double sup_l = 0.0;
        double sup_h = 0.0;
        for (const auto& w : dictionary) {
            sup_l = std::max(sup_l, std::abs(inner(dg, w)));
            sup_h = std::max(sup_h, std::abs(window_pairing(diff, grid, w, window.lo, window.hi)));
        }
        da.push_back(sup_a);
        df.push_back(sup_f);
        dl.push_back(sup_l);
        dh.push_back(sup_h);
    }
    const Verdict parts[] = {
        settle(v, "sup|a_eta-a_0|", probes, da, tol),
        settle(v, "sup|f_eta-f_0|", probes, df, tol),
        settle(v, "max_j|(l_eta-l_0,v_j)|", probes, dl, tol),
        settle(v, "max_j|int(h_eta-h_0,v_j)|", probes, dh, tol),
    };
    v.verdict = combine(parts);
    return v;
}

ConditionVerdict check_A4(const PerturbedFamily& family, const Grid& grid, A4Mode mode, Window window,
                          const Dictionary& dictionary, std::span<const double> eta_probes, double tol) {
    if (!std::isfinite(window.lo) || !std::isfinite(window.hi) || !(window.hi > window.lo))
        throw std::invalid_argument("check_A4 needs a finite window with lo < hi");
    const auto probes = sorted_probes(family, eta_probes);
    ConditionVerdict v;
    v.assumption = mode == A4Mode::strong_dual ? "A4-strong" : "A4-weak";
    v.thresholds = {{"tol", tol}, {"window_lo", window.lo}, {"window_hi", window.hi}};

    const ProblemSpec limit = family.limit_spec();
    std::vector<double> dist;
    bool any_support = false;
    for (double eta : probes) {
        const ForcingDesc diff = instantiate(family, eta).forcing().minus(limit.forcing());
        double d = 0.0;
        if (mode == A4Mode::strong_dual) {
            d = DualForcing(diff, grid).weighted_integral(0.0, window.lo, window.hi);
        } else {
            const double q = 0.25 * (window.hi - window.lo);
            for (const auto& w : dictionary)
                for (int k = 0; k < 4; ++k) {
                    const double lo = window.lo + k * q;
                    const double hi = k == 3 ? window.hi : lo + q;
                    d = std::max(d, std::abs(window_pairing(diff, grid, w, lo, hi)));
                }
        }
        for (const auto& term : diff.terms())
            for (const auto& w : term.amplitude.windows())
                if (w.hi > window.lo && w.lo < window.hi) any_support = true;
        dist.push_back(d);
    }
    const char* quantity = mode == A4Mode::strong_dual ? "int_window||h_eta-h_0||_*^2" : "max_j,k|<h_eta-h_0,v_j x 1_k>|";
    v.verdict = settle(v, quantity, probes, dist, tol);
    if (!any_support) {
        if (!v.note.empty()) v.note += "; ";
        v.note += "h_eta - h_0 has no support inside the window for any probe (vacuous)";
    }
    return v;
}

ConditionVerdict check_A5(const PerturbedFamily& family, const Grid& grid, double mu0, std::span<const double> t_sequence,
                          std::span<const double> eta_probes, double tol, const EnvelopeOptions& options) {
    const double m = family.viscosity_floor();
    const double lambda1 = first_eigenvalue(grid, options.mode);
    if (!(mu0 > 0.0 && mu0 < 2.0 * m * lambda1)) {
        std::ostringstream msg;
        msg << "mu0 = " << mu0 << " outside the open interval (0, " << 2.0 * m * lambda1 << ")";
        throw InvalidMu(msg.str());
    }
    const auto times = sorted_times(t_sequence);
    const auto tail = smallest_of(sorted_probes(family, eta_probes), options.tail_probes);
    ConditionVerdict v;
    v.assumption = "A5";
    v.thresholds = {{"mu0", mu0}, {"tol", tol}, {"m", m}, {"lambda1", lambda1}};

    const DualForcing h0(family.limit_spec().forcing(), grid);
    if (!h0.tail_converges(mu0)) {
        v.add("limit_tail_t0", 0.0, inf);
        v.note = "tail integral of h_0 at mu0 diverges";
        v.verdict = Verdict::fail;
        return v;
    }
    v.add("limit_tail_t0", 0.0, h0.weighted_integral(mu0, -inf, 0.0));

    std::vector<DualForcing> duals;
    std::vector<double> mus;
    for (double eta : tail) {
        duals.emplace_back(instantiate(family, eta).forcing(), grid);
        mus.push_back(family.mu_at(eta));
        if (!(mus.back() > 0.0 && mus.back() < 2.0 * m * lambda1))
            throw InvalidMu("mu_eta outside the open interval at eta = " + format_real(eta));
    }
    std::vector<double> q;
    try {
        for (double t : times) {
            double worst = 0.0;
            for (std::size_t i = 0; i < duals.size(); ++i) {
                const double mu = mus[i];
                // e^{(mu0 - mu) t} int_{-inf}^t e^{mu s} ... = e^{mu0 t} * (discounted tail at t)
                const double value = std::exp(mu0 * t) * discounted_tail(duals[i], mu, t) / (m - mu / (2.0 * lambda1));
                worst = std::max(worst, value);
            }
            q.push_back(worst);
        }
    } catch (const DivergentTail& e) {
        v.note = std::string("member tail diverges: ") + e.what();
        v.verdict = Verdict::fail;
        return v;
    }
    v.verdict = settle(v, "Q(t)", times, q, tol);
    return v;
}

MuLimits mu_limits(const PerturbedFamily& family, std::span<const double> eta_probes, double tol) {
    const auto probes = sorted_probes(family, eta_probes);
    if (probes.size() < 8) throw std::invalid_argument("mu_limits needs at least 8 probes");
    MuLimits out{inf, -inf, {}};
    out.verdict.assumption = "mu-liminf";
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double mu = family.mu_at(probes[i]);
        out.verdict.add("mu_eta", probes[i], mu);
        if (i >= probes.size() / 2) {
            out.lower = std::min(out.lower, mu);
            out.upper = std::max(out.upper, mu);
        }
    }
    out.verdict.thresholds = {{"mu_lower", out.lower}, {"mu_upper", out.upper}, {"tol", tol}};
    out.verdict.verdict = out.lower > tol ? Verdict::pass : Verdict::fail;
    if (!out.verdict.passed()) out.verdict.note = "liminf of mu_eta is not bounded away from 0";
    return out;
}

ConditionVerdict check_uniform_tail(const PerturbedFamily& family, const Grid& grid,
                                    std::span<const double> eta_probes, double slack) {
    const auto probes = sorted_probes(family, eta_probes);
    if (probes.size() < 4) throw std::invalid_argument("check_uniform_tail needs at least 4 probes");
    ConditionVerdict v;
    v.assumption = "uniform-tail";
    v.thresholds = {{"slack", slack}};
    std::vector<double> tails;
    for (double eta : probes) {
        double tail = inf;
        try {
            tail = DualForcing(instantiate(family, eta).forcing(), grid).weighted_integral(family.mu_at(eta), -inf, 0.0);
        } catch (const DivergentTail&) {
        }
        v.add("tail_integral_t0", eta, tail);
        tails.push_back(tail);
    }
    const std::size_t half = probes.size() / 2;
    const double head = *std::max_element(tails.begin(), tails.begin() + static_cast<std::ptrdiff_t>(half));
    const double rest = *std::max_element(tails.begin() + static_cast<std::ptrdiff_t>(half), tails.end());
    const bool finite = std::all_of(tails.begin(), tails.end(), [](double x) { return std::isfinite(x); });
    v.thresholds.emplace_back("max_first_half", head);
    v.thresholds.emplace_back("max_second_half", rest);
    if (!finite) {
        v.verdict = Verdict::fail;
        v.note = "some member tail diverges";
    } else if (rest <= head * (1.0 + slack) + slack) {
        v.verdict = Verdict::pass;
    } else {
        v.verdict = Verdict::fail;
        v.note = "tail integrals keep growing as eta decreases";
    }
    return v;
}

ConditionVerdict check_vanishing_tail(const PerturbedFamily& family, const Grid& grid,
                                      std::span<const double> t_sequence, std::span<const double> eta_probes,
                                      double tol, const EnvelopeOptions& options) {
    const auto times = sorted_times(t_sequence);
    const auto tail = smallest_of(sorted_probes(family, eta_probes), options.tail_probes);
    ConditionVerdict v;
    v.assumption = "vanishing-tail";
    v.thresholds = {{"tol", tol}};
    std::vector<double> p;
    try {
        std::vector<DualForcing> duals;
        for (double eta : tail) duals.emplace_back(instantiate(family, eta).forcing(), grid);
        for (double t : times) {
            double worst = 0.0;
            for (std::size_t i = 0; i < tail.size(); ++i)
                worst = std::max(worst, duals[i].weighted_integral(family.mu_at(tail[i]), -inf, t));
            p.push_back(worst);
        }
    } catch (const DivergentTail& e) {
        v.verdict = Verdict::fail;
        v.note = std::string("member tail diverges: ") + e.what();
        return v;
    }
    v.verdict = settle(v, "limsup_tail(t)", times, p, tol);
    return v;
}

// --------------------------------------------------------------------------

SufficientConditionReport sufficient_condition_report(const PerturbedFamily& family, const Grid& grid,
                                                      std::span<const double> eta_probes,
                                                      std::span<const double> t_sequence, double tol,
                                                      const SufficientConditionOptions& options) {
    SufficientConditionReport r;
    const auto probes = sorted_probes(family, eta_probes);
    const double m = family.viscosity_floor();
    const double lambda1 = first_eigenvalue(grid, options.mode);
    const double ceiling = 2.0 * m * lambda1;

    r.assumption_A2 = check_A2(family, grid, probes, tol, options.mode);
    r.uniform_tail = check_uniform_tail(family, grid, probes);
    r.mu = mu_limits(family, probes, tol);

    const double spread = r.mu.upper - r.mu.lower;
    r.mu_convergence.assumption = "mu-convergence";
    r.mu_convergence.add("mu_lower", 0.0, r.mu.lower);
    r.mu_convergence.add("mu_upper", 0.0, r.mu.upper);
    r.mu_convergence.thresholds = {{"tol", tol}};
    r.mu_convergence.verdict = spread < tol ? Verdict::pass : Verdict::fail;
    if (!r.mu_convergence.passed()) r.mu_convergence.note = "mu_eta oscillates over the probe tail";

    r.strong_convergence = check_A4(family, grid, A4Mode::strong_dual, options.window, {}, probes, tol);

    // limsup of member tails against the limit tail at mu0 = lim mu_eta.
    const double mu_limit = r.mu.upper;
    r.limsup_equality.assumption = "limsup-equality";
    r.limsup_equality.thresholds = {{"mu0", mu_limit}, {"tol", tol}};
    try {
        const double limit_tail =
            DualForcing(family.limit_spec().forcing(), grid).weighted_integral(mu_limit, -inf, 0.0);
        r.limsup_equality.add("limit_tail_t0", 0.0, limit_tail);
        std::vector<double> gaps;
        for (double eta : probes) {
            const double tail =
                DualForcing(instantiate(family, eta).forcing(), grid).weighted_integral(family.mu_at(eta), -inf, 0.0);
            gaps.push_back(std::abs(tail - limit_tail));
        }
        r.limsup_equality.verdict = settle(r.limsup_equality, "|tail_eta-tail_0|", probes, gaps, tol);
    } catch (const DivergentTail& e) {
        r.limsup_equality.verdict = Verdict::fail;
        r.limsup_equality.note = std::string("tail diverges: ") + e.what();
    }

    // Bounding Q(t) by the limsup tail needs the threshold scaled by the smallest
    // prefactor denominator and the worst e^{(mu0 - mu_eta) t} over the samples.
    const auto times = sorted_times(t_sequence);
    const double t_min = std::min(0.0, times.back());
    const double scaled_tol =
        tol * std::max(m - r.mu.upper / (2.0 * lambda1), 0.0) * std::exp(-spread * std::abs(t_min));
    EnvelopeOptions env{options.tail_probes, options.mode};
    r.vanishing_tail = check_vanishing_tail(family, grid, times, probes, scaled_tol, env);
    r.vanishing_tail.thresholds.emplace_back("tol_unscaled", tol);

    const bool a2 = r.assumption_A2.passed();
    const bool in_range = r.mu.lower > tol && r.mu.upper < ceiling;
    r.strong_branch = a2 && r.uniform_tail.passed() && r.mu_convergence.passed() && mu_limit > 0.0 &&
                      mu_limit < ceiling && r.strong_convergence.passed() && r.limsup_equality.passed();
    r.spread_branch = a2 && in_range && r.uniform_tail.passed() && r.vanishing_tail.passed();

    if (r.strong_branch) {
        r.recommended_mu0 = mu_limit;
    } else if (in_range) {
        r.recommended_mu0 = r.mu.upper + 0.5 * (ceiling - r.mu.upper);
    }

    // Non-commutation: every member tail vanishes as t -> -inf, yet the limsup does not.
    if (r.vanishing_tail.verdict == Verdict::fail) {
        bool members_vanish = true;
        for (double eta : smallest_of(probes, options.tail_probes)) {
            const DualForcing dual(instantiate(family, eta).forcing(), grid);
            double t = std::min(-1.0, times.back());
            double value = inf;
            for (int k = 0; k < 60 && !(value < scaled_tol); ++k, t *= 2.0)
                value = dual.weighted_integral(family.mu_at(eta), -inf, t);
            r.vanishing_tail.add("member_tail_limit", eta, value);
            members_vanish = members_vanish && value < scaled_tol;
        }
        r.noncommutation = members_vanish;
        if (members_vanish) r.vanishing_tail.note += "; limit in t and limsup in eta do not commute";
    }

    r.summary.assumption = "sufficient-conditions";
    r.summary.add("strong_branch", 0.0, r.strong_branch ? 1.0 : 0.0);
    r.summary.add("spread_branch", 0.0, r.spread_branch ? 1.0 : 0.0);
    r.summary.add("noncommutation", 0.0, r.noncommutation ? 1.0 : 0.0);
    r.summary.add("recommended_mu0", 0.0, r.recommended_mu0);
    r.summary.thresholds = {{"mu_ceiling", ceiling}, {"tol", tol}};
    r.summary.verdict = (r.strong_branch || r.spread_branch) ? Verdict::pass : Verdict::fail;
    if (r.strong_branch)
        r.summary.note = "A5 implied with mu0 = lim mu_eta (strong convergence and limsup equality)";
    else if (r.spread_branch)
        r.summary.note = "A5 implied with mu0 = limsup mu_eta + epsilon";
    else
        r.summary.note = "no sufficient condition for A5 verified numerically";
    return r;
}

// --------------------------------------------------------------------------

NoncommutationTable noncommutation_demo(double mu, std::span<const double> eta_probes,
                                        std::span<const double> t_sequence, double tol, std::size_t tail_probes) {
    if (!(mu > 0.0)) throw std::invalid_argument("noncommutation_demo needs mu > 0");
    NoncommutationTable out;
    out.mu = mu;
    out.etas.assign(eta_probes.begin(), eta_probes.end());
    std::sort(out.etas.begin(), out.etas.end(), std::greater<>());
    out.times = sorted_times(t_sequence);
    for (double eta : out.etas)
        if (!(eta > 0.0)) throw std::invalid_argument("noncommutation_demo needs positive eta");
    if (mu * (1.0 / out.etas.back() + 1.0) > 700.0)
        throw std::invalid_argument("noncommutation_demo: e^{-mu s} overflows on the smallest probe's support");

    const auto integral = [&](double eta, double t) {
        const double lo = -1.0 / eta - 1.0;
        const double hi = std::min(-1.0 / eta, t);
        if (!(hi > lo)) return 0.0;
        const auto integrand = [mu](double s) { return std::exp(mu * s) * std::exp(-mu * s); };
        return adaptive_simpson(integrand, lo, hi, tol);
    };

    out.integrals.resize(static_cast<Eigen::Index>(out.etas.size()), static_cast<Eigen::Index>(out.times.size()));
    for (std::size_t i = 0; i < out.etas.size(); ++i)
        for (std::size_t j = 0; j < out.times.size(); ++j)
            out.integrals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = integral(out.etas[i], out.times[j]);

    const std::size_t k = std::min(tail_probes, out.etas.size());
    const std::size_t first = out.etas.size() - k;
    for (std::size_t j = 0; j < out.times.size(); ++j) {
        double worst = 0.0;
        for (std::size_t i = first; i < out.etas.size(); ++i)
            worst = std::max(worst, out.integrals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out.limsup_in_eta.push_back(worst);
    }
    out.limit_then_limsup = out.limsup_in_eta.back();

    for (double eta : out.etas) {
        // Push t left by doubling until it lies below the support.
        double t = std::min(-1.0, out.times.back());
        while (t >= -1.0 / eta - 1.0) t *= 2.0;
        out.limit_in_t.push_back(integral(eta, t));
    }
    out.limsup_then_limit = *std::max_element(out.limit_in_t.begin() + static_cast<std::ptrdiff_t>(first), out.limit_in_t.end());

    auto& v = out.verdict;
    v.assumption = "noncommutation";
    for (std::size_t j = 0; j < out.times.size(); ++j) v.add("limsup_eta_integral", out.times[j], out.limsup_in_eta[j]);
    for (std::size_t i = 0; i < out.etas.size(); ++i) v.add("lim_t_integral", out.etas[i], out.limit_in_t[i]);
    v.add("lim_t_limsup_eta", 0.0, out.limit_then_limsup);
    v.add("limsup_eta_lim_t", 0.0, out.limsup_then_limit);
    v.thresholds = {{"mu", mu}, {"tol", tol}};
    const double gap = out.limit_then_limsup - out.limsup_then_limit;
    v.verdict = std::abs(gap - 1.0) <= 1e-6 ? Verdict::pass : Verdict::fail;
    v.note = "iterated limits " + format_real(out.limit_then_limsup) + " vs " + format_real(out.limsup_then_limit);
    return out;
}

void write_csv(std::ostream& os, const NoncommutationTable& table) {
    os << "eta,t,integral\n";
    for (std::size_t i = 0; i < table.etas.size(); ++i)
        for (std::size_t j = 0; j < table.times.size(); ++j)
            write_csv_row(os, {table.etas[i], table.times[j],
                               table.integrals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
}

void write_report(std::ostream& os, const SufficientConditionReport& report) {
    for (const ConditionVerdict* v : {&report.assumption_A2, &report.uniform_tail, &report.mu.verdict,
                                      &report.mu_convergence, &report.strong_convergence, &report.limsup_equality,
                                      &report.vanishing_tail, &report.summary})
        write_report(os, *v);
}

}  // namespace nlrd
