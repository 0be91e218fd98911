#include "nlrd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace nlrd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double inf = std::numeric_limits<double>::infinity();

double odd_power_value(double alpha, double p, double s) {
    return -alpha * std::pow(std::abs(s), p - 2.0) * s;
}

}  // namespace

// --------------------------------------------------------------------------
// ViscosityDesc

ViscosityDesc::ViscosityDesc(Law law) : law_(std::move(law)) {
    std::visit(overloaded{
                   [](const ConstantViscosity& c) {
                       if (!(c.value > 0.0)) throw std::invalid_argument("constant viscosity must be positive");
                   },
                   [](const RationalBumpViscosity& b) {
                       if (!(b.floor > 0.0)) throw std::invalid_argument("viscosity floor must be positive");
                       if (b.amplitude < 0.0) throw std::invalid_argument("rational bump amplitude must be >= 0");
                       if (!(b.width > 0.0)) throw std::invalid_argument("rational bump width must be positive");
                   },
                   [](PiecewiseLinearViscosity& t) {
                       if (t.breakpoints.empty()) throw std::invalid_argument("piecewise-linear viscosity is empty");
                       std::sort(t.breakpoints.begin(), t.breakpoints.end());
                       for (std::size_t i = 1; i < t.breakpoints.size(); ++i)
                           if (t.breakpoints[i].first == t.breakpoints[i - 1].first)
                               throw std::invalid_argument("duplicate viscosity breakpoint");
                       for (const auto& [s, a] : t.breakpoints)
                           if (!(a > 0.0)) throw std::invalid_argument("viscosity table values must be positive");
                   },
                   [](const OscillatingViscosity& o) {
                       if (!(o.floor > 0.0)) throw std::invalid_argument("viscosity floor must be positive");
                       if (o.offset - std::abs(o.amplitude) < o.floor)
                           throw std::invalid_argument("oscillating viscosity dips below its floor");
                   },
               },
               law_);
}

double ViscosityDesc::operator()(double s) const {
    return std::visit(overloaded{
                          [](const ConstantViscosity& c) { return c.value; },
                          [s](const RationalBumpViscosity& b) {
                              const double z = (s - b.center) / b.width;
                              return b.floor + b.amplitude / (1.0 + z * z);
                          },
                          [s](const PiecewiseLinearViscosity& t) {
                              const auto& bp = t.breakpoints;
                              if (s <= bp.front().first) return bp.front().second;
                              if (s >= bp.back().first) return bp.back().second;
                              auto hi = std::upper_bound(bp.begin(), bp.end(), s,
                                                         [](double v, const auto& e) { return v < e.first; });
                              auto lo = hi - 1;
                              const double w = (s - lo->first) / (hi->first - lo->first);
                              return (1.0 - w) * lo->second + w * hi->second;
                          },
                          [s](const OscillatingViscosity& o) { return o.offset + o.amplitude * std::sin(o.frequency * s); },
                      },
                      law_);
}

double ViscosityDesc::floor() const {
    return std::visit(overloaded{
                          [](const ConstantViscosity& c) { return c.value; },
                          [](const RationalBumpViscosity& b) { return b.floor; },
                          [](const PiecewiseLinearViscosity& t) {
                              double m = inf;
                              for (const auto& [s, a] : t.breakpoints) m = std::min(m, a);
                              return m;
                          },
                          [](const OscillatingViscosity& o) { return o.floor; },
                      },
                      law_);
}

std::vector<double> ViscosityDesc::breakpoints() const {
    std::vector<double> out;
    if (const auto* t = std::get_if<PiecewiseLinearViscosity>(&law_))
        for (const auto& [s, a] : t->breakpoints) out.push_back(s);
    if (const auto* b = std::get_if<RationalBumpViscosity>(&law_)) out.push_back(b->center);
    return out;
}

// --------------------------------------------------------------------------
// ReactionDesc

ReactionDesc::ReactionDesc(Law law, ReactionCertificate certificate) : law_(law), certificate_(certificate) {
    const auto& c = certificate_;
    if (!(c.p >= 2.0)) throw std::invalid_argument("reaction certificate requires p >= 2");
    if (!(c.alpha1 > 0.0) || !(c.alpha2 > 0.0)) throw std::invalid_argument("certificate alphas must be positive");
    if (c.kappa1 < 0.0 || c.kappa2 < 0.0) throw std::invalid_argument("certificate kappas must be >= 0");
    const double law_p = std::visit([](const auto& l) { return l.p; }, law_);
    if (!(law_p >= 1.0)) throw std::invalid_argument("reaction exponent must be >= 1");
}

ReactionCertificate ReactionDesc::canonical_certificate(const Law& law) {
    return std::visit(overloaded{
                          [](const OddPower& o) {
                              if (!(o.alpha > 0.0)) throw std::invalid_argument("canonical certificate needs alpha > 0");
                              return ReactionCertificate{0.0, o.alpha, 0.0, o.alpha, o.p};
                          },
                          [](const OddPowerPlusBounded& o) {
                              if (!(o.alpha > 0.0)) throw std::invalid_argument("canonical certificate needs alpha > 0");
                              const double b = std::abs(o.bounded_amplitude);
                              // max over s >= 0 of b s - (alpha/2) s^p
                              const double s_star = std::pow(2.0 * b / (o.alpha * o.p), 1.0 / (o.p - 1.0));
                              const double kappa2 = b * s_star * (o.p - 1.0) / o.p;
                              return ReactionCertificate{b, o.alpha, kappa2, o.alpha / 2.0, o.p};
                          },
                      },
                      law);
}

ReactionDesc ReactionDesc::odd_power(double alpha, double p) {
    const Law law = OddPower{alpha, p};
    return ReactionDesc(law, canonical_certificate(law));
}

ReactionDesc ReactionDesc::odd_power_plus_bounded(double alpha, double p, double bounded_amplitude) {
    const Law law = OddPowerPlusBounded{alpha, p, bounded_amplitude};
    return ReactionDesc(law, canonical_certificate(law));
}

double ReactionDesc::operator()(double s) const {
    return std::visit(overloaded{
                          [s](const OddPower& o) { return odd_power_value(o.alpha, o.p, s); },
                          [s](const OddPowerPlusBounded& o) { return odd_power_value(o.alpha, o.p, s) + o.bounded_amplitude; },
                      },
                      law_);
}

// --------------------------------------------------------------------------
// SpatialProfile

double SpatialProfile::operator()(double x, double length) const {
    return std::visit(overloaded{
                          [](const ConstantProfile& c) { return c.value; },
                          [&](const SineProfile& s) {
                              return s.amplitude * std::sin(s.mode * std::numbers::pi * x / length);
                          },
                          [&](const ParabolaProfile& p) { return p.amplitude * 4.0 * x * (length - x) / (length * length); },
                      },
                      law_);
}

FieldD SpatialProfile::sample(const Grid& grid) const {
    Vector<double> v(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = (*this)(grid.node(i), grid.length());
    return FieldD(grid, std::move(v));
}

bool SpatialProfile::vanishes_on_boundary(double length) const {
    if (const auto* c = std::get_if<ConstantProfile>(&law_)) return c->value == 0.0;
    (void)length;
    return true;
}

// --------------------------------------------------------------------------
// TemporalProfile

bool operator==(const EtaScaledTemporal& a, const EtaScaledTemporal& b) {
    if (a.factor != b.factor) return false;
    if (a.inner == b.inner) return true;
    return a.inner && b.inner && *a.inner == *b.inner;
}

bool operator==(const SumTemporal& a, const SumTemporal& b) { return a.terms == b.terms; }

TemporalProfile::TemporalProfile(Law law) : law_(std::move(law)) {
    if (const auto* b = std::get_if<BumpTemporal>(&law_))
        if (!(b->width > 0.0)) throw std::invalid_argument("bump width must be positive");
    if (const auto* e = std::get_if<EtaScaledTemporal>(&law_))
        if (!e->inner) throw std::invalid_argument("eta-scaled profile needs an inner profile");
}

TemporalProfile TemporalProfile::scaled(TemporalProfile inner, double factor) {
    return TemporalProfile(EtaScaledTemporal{std::make_shared<const TemporalProfile>(std::move(inner)), factor});
}

TemporalProfile TemporalProfile::sum(std::vector<TemporalProfile> terms) {
    return TemporalProfile(SumTemporal{std::move(terms)});
}

double TemporalProfile::operator()(double t) const {
    return std::visit(overloaded{
                          [](const ConstantTemporal& c) { return c.value; },
                          [t](const ExponentialTemporal& e) { return e.value * std::exp(e.rate * t); },
                          [t](const BumpTemporal& b) {
                              return (t >= b.left && t < b.left + b.width) ? b.value * std::exp(b.rate * t) : 0.0;
                          },
                          [t](const EtaScaledTemporal& e) { return e.factor * (*e.inner)(t); },
                          [t](const SumTemporal& s) {
                              double acc = 0.0;
                              for (const auto& term : s.terms) acc += term(t);
                              return acc;
                          },
                      },
                      law_);
}

TailBound TemporalProfile::tail_bound() const {
    return std::visit(overloaded{
                          [](const ConstantTemporal& c) { return TailBound{std::abs(c.value), 0.0}; },
                          [](const ExponentialTemporal& e) { return TailBound{std::abs(e.value), e.rate}; },
                          [](const BumpTemporal& b) {
                              if (b.left > 0.0) return TailBound{0.0, 0.0};
                              const double right = std::min(b.left + b.width, 0.0);
                              const double peak =
                                  std::abs(b.value) * std::max(std::exp(b.rate * b.left), std::exp(b.rate * right));
                              return TailBound{peak, 0.0};
                          },
                          [](const EtaScaledTemporal& e) {
                              const TailBound inner = e.inner->tail_bound();
                              return TailBound{std::abs(e.factor) * inner.constant, inner.rate};
                          },
                          [](const SumTemporal& s) {
                              TailBound out{0.0, inf};
                              for (const auto& term : s.terms) {
                                  const TailBound b = term.tail_bound();
                                  out.constant += b.constant;
                                  if (b.constant > 0.0) out.rate = std::min(out.rate, b.rate);
                              }
                              if (out.rate == inf) out.rate = 0.0;
                              return out;
                          },
                      },
                      law_);
}

std::vector<ExpWindow> TemporalProfile::windows() const {
    std::vector<ExpWindow> out = std::visit(
        overloaded{
            [](const ConstantTemporal& c) { return std::vector<ExpWindow>{{c.value, 0.0, -inf, inf}}; },
            [](const ExponentialTemporal& e) { return std::vector<ExpWindow>{{e.value, e.rate, -inf, inf}}; },
            [](const BumpTemporal& b) { return std::vector<ExpWindow>{{b.value, b.rate, b.left, b.left + b.width}}; },
            [](const EtaScaledTemporal& e) {
                auto w = e.inner->windows();
                for (auto& x : w) x.coefficient *= e.factor;
                return w;
            },
            [](const SumTemporal& s) {
                std::vector<ExpWindow> w;
                for (const auto& term : s.terms) {
                    auto part = term.windows();
                    w.insert(w.end(), part.begin(), part.end());
                }
                return w;
            },
        },
        law_);
    return merge_windows(std::move(out));
}

std::vector<double> TemporalProfile::breakpoints() const {
    std::vector<double> out;
    for (const auto& w : windows()) {
        if (std::isfinite(w.lo)) out.push_back(w.lo);
        if (std::isfinite(w.hi)) out.push_back(w.hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<ExpWindow> merge_windows(std::vector<ExpWindow> windows) {
    std::map<std::tuple<double, double, double>, double> merged;
    std::vector<std::tuple<double, double, double>> order;
    for (const auto& w : windows) {
        const auto key = std::make_tuple(w.rate, w.lo, w.hi);
        auto [it, inserted] = merged.emplace(key, 0.0);
        if (inserted) order.push_back(key);
        it->second += w.coefficient;
    }
    std::vector<ExpWindow> out;
    for (const auto& key : order) {
        const double c = merged[key];
        if (c != 0.0 && std::get<1>(key) < std::get<2>(key))
            out.push_back({c, std::get<0>(key), std::get<1>(key), std::get<2>(key)});
    }
    return out;
}

// --------------------------------------------------------------------------
// ForcingDesc

ForcingDesc::ForcingDesc(std::vector<ForcingTerm> terms, double domain_length) : terms_(std::move(terms)) {
    for (const auto& term : terms_) {
        if (!term.profile.vanishes_on_boundary(domain_length))
            throw std::invalid_argument("forcing profile must vanish on the boundary");
        const TailBound bound = term.amplitude.tail_bound();
        for (int k = 0; k <= 400; ++k) {
            const double t = -0.125 * k;
            const double phi = std::abs(term.amplitude(t));
            const double cap = bound.constant * std::exp(bound.rate * t);
            if (phi > cap * (1.0 + 1e-12) + 1e-300) {
                std::ostringstream msg;
                msg << "forcing tail bound violated at t = " << t << ": |phi| = " << phi << " > " << cap;
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

FieldD ForcingDesc::evaluate(const Grid& grid, double t) const {
    Vector<double> v = Vector<double>::Zero(grid.size());
    for (const auto& term : terms_) {
        const double a = term.amplitude(t);
        if (a != 0.0) v += a * term.profile.sample(grid).values();
    }
    return FieldD(grid, std::move(v));
}

ForcingDesc ForcingDesc::scaled(double factor) const {
    ForcingDesc out;
    for (const auto& term : terms_)
        out.terms_.push_back({term.profile, TemporalProfile::scaled(term.amplitude, factor)});
    return out;
}

ForcingDesc ForcingDesc::plus(const ForcingDesc& other) const {
    ForcingDesc out = *this;
    for (const auto& term : other.terms_) {
        auto it = std::find_if(out.terms_.begin(), out.terms_.end(),
                               [&](const ForcingTerm& t) { return t.profile == term.profile; });
        if (it == out.terms_.end())
            out.terms_.push_back(term);
        else
            it->amplitude = TemporalProfile::sum({it->amplitude, term.amplitude});
    }
    return out;
}

ForcingDesc ForcingDesc::minus(const ForcingDesc& other) const { return plus(other.scaled(-1.0)); }

std::vector<double> ForcingDesc::breakpoints() const {
    std::vector<double> out;
    for (const auto& term : terms_) {
        auto b = term.amplitude.breakpoints();
        out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double nonlocal_value(const WeightDesc& weight, const FieldD& u) {
    return nonlocal_value(weight.sample(u.grid()), u);
}

// --------------------------------------------------------------------------
// ProblemSpec / PerturbedFamily

ProblemSpec::ProblemSpec(ViscosityDesc viscosity, ReactionDesc reaction, ForcingDesc forcing, WeightDesc weight,
                         double domain_length)
    : viscosity_(std::move(viscosity)),
      reaction_(std::move(reaction)),
      forcing_(std::move(forcing)),
      weight_(std::move(weight)),
      length_(domain_length) {
    if (!(length_ > 0.0) || !std::isfinite(length_)) throw std::invalid_argument("domain length must be positive");
}

ProblemSpec ProblemSpec::with_forcing(ForcingDesc forcing) const {
    ProblemSpec out = *this;
    out.forcing_ = std::move(forcing);
    return out;
}

void ProblemSpec::require_grid(const Grid& grid) const {
    if (grid.length() != length_) throw GridMismatch("grid length differs from the problem's domain length");
}

PerturbedFamily::PerturbedFamily(std::vector<double> eta_schedule, SpecRule spec_at, MuRule mu_at,
                                 ProblemSpec limit_spec, double mu_zero)
    : schedule_(std::move(eta_schedule)),
      spec_rule_(std::move(spec_at)),
      mu_rule_(std::move(mu_at)),
      limit_(std::move(limit_spec)),
      mu_zero_(mu_zero) {
    if (schedule_.empty()) throw std::invalid_argument("eta schedule is empty");
    for (std::size_t i = 0; i < schedule_.size(); ++i) {
        if (!(schedule_[i] > 0.0 && schedule_[i] <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
        if (i > 0 && !(schedule_[i] < schedule_[i - 1]))
            throw std::invalid_argument("eta schedule must be strictly decreasing");
    }
    if (!spec_rule_ || !mu_rule_) throw std::invalid_argument("family rules must be callable");
}

double PerturbedFamily::viscosity_floor() const {
    double m = limit_.viscosity_floor();
    for (double eta : schedule_) m = std::min(m, spec_at(eta).viscosity_floor());
    return m;
}

double PerturbedFamily::kappa() const {
    double k = limit_.kappa();
    for (double eta : schedule_) k = std::max(k, spec_at(eta).kappa());
    return k;
}

std::vector<double> PerturbedFamily::smallest(std::size_t k) const {
    k = std::min(k, schedule_.size());
    return {schedule_.end() - static_cast<std::ptrdiff_t>(k), schedule_.end()};
}

PerturbedFamily PerturbedFamily::with_schedule(std::vector<double> eta_schedule) const {
    return PerturbedFamily(std::move(eta_schedule), spec_rule_, mu_rule_, limit_, mu_zero_);
}

ProblemSpec instantiate(const PerturbedFamily& family, double eta) {
    if (eta == 0.0) return family.limit_spec();
    const auto& s = family.schedule();
    if (std::find(s.begin(), s.end(), eta) == s.end()) {
        std::ostringstream msg;
        msg << "eta = " << eta << " is not on the family schedule";
        throw UnknownEta(msg.str());
    }
    return family.spec_at(eta);
}

// --------------------------------------------------------------------------
// (A1) audit

ConditionVerdict check_A1(const ProblemSpec& spec, double range, int n_samples) {
    if (!(range > 0.0)) throw std::invalid_argument("check_A1: sample range must be positive");
    if (n_samples < 100) throw std::invalid_argument("check_A1: need at least 100 samples");

    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(n_samples) + 8);
    for (int i = 0; i < n_samples; ++i) samples.push_back(-range + 2.0 * range * i / (n_samples - 1));
    samples.push_back(0.0);
    for (double b : spec.viscosity().breakpoints())
        if (std::abs(b) <= range) samples.push_back(b);
    std::sort(samples.begin(), samples.end());
    samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

    const auto& c = spec.reaction().certificate();
    const auto& f = spec.reaction();
    const auto& a = spec.viscosity();
    const double m = a.floor();

    struct Worst {
        double margin = inf;
        double at = 0.0;
        bool ok = true;
    } growth, dissipation, viscosity;

    auto record = [](Worst& w, double margin, double scale, double s) {
        if (margin < w.margin) {
            w.margin = margin;
            w.at = s;
        }
        if (margin < -1e-12 * std::max(1.0, scale)) w.ok = false;
    };

    for (double s : samples) {
        const double fs = f(s);
        const double as = std::pow(std::abs(s), c.p);
        const double growth_cap = c.kappa1 + c.alpha1 * std::pow(std::abs(s), c.p - 1.0);
        record(growth, growth_cap - std::abs(fs), growth_cap, s);
        const double diss_cap = c.kappa2 - c.alpha2 * as;
        record(dissipation, diss_cap - fs * s, std::abs(diss_cap) + std::abs(fs * s), s);
        record(viscosity, a(s) - m, m, s);
    }

    ConditionVerdict v;
    v.assumption = "A1";
    v.add("growth_margin_min", growth.at, growth.margin);
    v.add("dissipation_margin_min", dissipation.at, dissipation.margin);
    v.add("viscosity_margin_min", viscosity.at, viscosity.margin);
    v.add("samples", range, static_cast<double>(samples.size()));
    v.thresholds = {{"range", range}, {"m", m}, {"kappa1", c.kappa1}, {"alpha1", c.alpha1},
                    {"kappa2", c.kappa2},  {"alpha2", c.alpha2}, {"p", c.p}};
    v.verdict = (growth.ok && dissipation.ok && viscosity.ok) ? Verdict::pass : Verdict::fail;
    std::ostringstream note;
    note << "sampled on [-" << range << ", " << range << "]";
    if (!growth.ok) note << "; growth bound violated near s = " << growth.at;
    if (!dissipation.ok) note << "; dissipativity violated near s = " << dissipation.at;
    if (!viscosity.ok) note << "; viscosity below m near s = " << viscosity.at;
    v.note = note.str();
    return v;
}

}  // namespace nlrd
