#include "nlrd/solver.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nlrd/csv.hpp"

namespace nlrd {

DiscreteProblem::DiscreteProblem(ProblemSpec spec, const Grid& grid)
    : spec_(std::move(spec)), grid_(grid), weight_(spec_.weight().sample(grid)) {
    spec_.require_grid(grid_);
    for (const auto& term : spec_.forcing().terms()) profiles_.push_back(term.profile.sample(grid_).values());
}

double DiscreteProblem::viscosity_at(const FieldD& u) const { return spec_.viscosity()(nonlocal_value(weight_, u)); }

Vector<double> DiscreteProblem::reaction(const Vector<double>& u) const {
    const auto& f = spec_.reaction();
    return u.unaryExpr([&f](double s) { return f(s); });
}

Vector<double> DiscreteProblem::forcing(double t) const {
    Vector<double> h = Vector<double>::Zero(grid_.size());
    const auto& terms = spec_.forcing().terms();
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const double a = terms[j].amplitude(t);
        if (a != 0.0) h += a * profiles_[j];
    }
    return h;
}

namespace {

FieldD step_or_throw(const DiscreteProblem& problem, const FieldD& u, double t, double dt, double ceiling,
                     std::size_t step_index) {
    if (!(dt > 0.0)) throw std::invalid_argument("imex_step: dt must be positive");
    const double a = problem.viscosity_at(u);
    Vector<double> rhs = u.values() + dt * (problem.reaction(u.values()) + problem.forcing(t + dt));
    Vector<double> next = solve_shifted_laplacian(problem.grid(), dt * a, rhs);
    const double norm = std::sqrt(problem.grid().spacing()) * next.norm();
    if (!std::isfinite(norm) || norm > ceiling) {
        std::ostringstream msg;
        msg << "blow-up at step " << step_index << " (t = " << t + dt << ", |u| = " << norm << ", dt = " << dt << ")";
        throw BlowUp(msg.str(), step_index);
    }
    return FieldD(problem.grid(), std::move(next));
}

struct StepPlan {
    std::size_t count;
    double tau;
    double t_end;
    double dt;

    double time(std::size_t k) const { return k >= count ? t_end : tau + static_cast<double>(k) * dt; }
};

StepPlan plan_steps(double tau, double t_end, double dt) {
    if (!(t_end > tau)) throw std::invalid_argument("integrate: t_end must exceed tau");
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
    const double ratio = (t_end - tau) / dt;
    auto count = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
    if (count == 0) count = 1;
    return {count, tau, t_end, dt};
}

template <class Body>
auto with_retries(double dt, const IntegrationOptions& options, Body body) {
    for (int attempt = 0;; ++attempt) {
        try {
            return body(dt);
        } catch (const BlowUp&) {
            if (attempt >= options.max_retries) throw;
            dt *= 0.5;
        }
    }
}

}  // namespace

FieldD imex_step(const DiscreteProblem& problem, const FieldD& u, double t, double dt, double blowup_ceiling) {
    require_same_grid(problem.grid(), u.grid());
    return step_or_throw(problem, u, t, dt, blowup_ceiling, 0);
}

FieldD imex_step(const ProblemSpec& spec, const FieldD& u, double t, double dt, double blowup_ceiling) {
    return imex_step(DiscreteProblem(spec, u.grid()), u, t, dt, blowup_ceiling);
}

double energy_residual(const DiscreteProblem& problem, const FieldD& u, const FieldD& u_next, double t, double dt) {
    require_same_grid(u.grid(), u_next.grid());
    const double h = problem.grid().spacing();
    const auto& v = u.values();
    const auto& w = u_next.values();
    const double a = problem.viscosity_at(u);
    const double balance = 0.5 * h * (w.squaredNorm() - v.squaredNorm() + (w - v).squaredNorm());
    const double dissipation = dt * a * h10_norm_squared(u_next);
    const double source = dt * h * (problem.reaction(v) + problem.forcing(t + dt)).dot(w);
    return balance + dissipation - source;
}

Trajectory integrate(const DiscreteProblem& problem, const FieldD& u_tau, double tau, double t_end, double dt,
                     const IntegrationOptions& options) {
    require_same_grid(problem.grid(), u_tau.grid());
    return with_retries(dt, options, [&](double step) {
        const StepPlan plan = plan_steps(tau, t_end, step);
        Trajectory out{step, {}, {}, {}, {}, {}, {}, u_tau};
        out.times.reserve(plan.count + 1);
        out.times.push_back(tau);
        out.l2.push_back(l2_norm(u_tau));
        out.h10.push_back(h10_norm(u_tau));
        out.residual.push_back(0.0);
        if (options.store_fields) out.fields.push_back(u_tau);
        FieldD u = u_tau;
        for (std::size_t k = 0; k < plan.count; ++k) {
            const double t = plan.time(k);
            const double h = plan.time(k + 1) - t;
            out.viscosity.push_back(problem.viscosity_at(u));
            FieldD next = step_or_throw(problem, u, t, h, options.blowup_ceiling, k + 1);
            out.residual.push_back(energy_residual(problem, u, next, t, h));
            out.times.push_back(plan.time(k + 1));
            out.l2.push_back(l2_norm(next));
            out.h10.push_back(h10_norm(next));
            if (options.store_fields) out.fields.push_back(next);
            u = std::move(next);
        }
        out.viscosity.push_back(problem.viscosity_at(u));
        out.final_field = std::move(u);
        return out;
    });
}

Trajectory integrate(const ProblemSpec& spec, const FieldD& u_tau, double tau, double t_end, double dt,
                     const IntegrationOptions& options) {
    return integrate(DiscreteProblem(spec, u_tau.grid()), u_tau, tau, t_end, dt, options);
}

FieldD evolve(const DiscreteProblem& problem, const FieldD& u_tau, double tau, double t_end, double dt,
              const IntegrationOptions& options) {
    require_same_grid(problem.grid(), u_tau.grid());
    if (t_end == tau) return u_tau;
    return with_retries(dt, options, [&](double step) {
        const StepPlan plan = plan_steps(tau, t_end, step);
        FieldD u = u_tau;
        for (std::size_t k = 0; k < plan.count; ++k) {
            const double t = plan.time(k);
            u = step_or_throw(problem, u, t, plan.time(k + 1) - t, options.blowup_ceiling, k + 1);
        }
        return u;
    });
}

void write_csv(std::ostream& os, const Trajectory& trajectory) {
    os << "t,l2,h10,viscosity,residual\n";
    for (std::size_t k = 0; k < trajectory.times.size(); ++k)
        write_csv_row(os, {trajectory.times[k], trajectory.l2[k], trajectory.h10[k], trajectory.viscosity[k],
                           trajectory.residual[k]});
}

}  // namespace nlrd
