#pragma once

// Linearly implicit IMEX time stepping:
//
//   (I - dt a(l(u^n)) Lap_h) u^{n+1} = u^n + dt (f(u^n) + h(t_n + dt))
//
// Diffusion is implicit with the nonlocal coefficient frozen at the current
// state; the reaction is explicit. Pairing the scheme with u^{n+1} gives an exact
// per-step energy balance (see energy_residual).

#include <iosfwd>
#include <vector>

#include "nlrd/grid.hpp"
#include "nlrd/model.hpp"

namespace nlrd {

// A ProblemSpec with its spatial profiles sampled once on a grid.
class DiscreteProblem {
public:
    DiscreteProblem(ProblemSpec spec, const Grid& grid);

    const ProblemSpec& spec() const noexcept { return spec_; }
    const Grid& grid() const noexcept { return grid_; }

    // a(l(u))
    double viscosity_at(const FieldD& u) const;
    Vector<double> reaction(const Vector<double>& u) const;
    Vector<double> forcing(double t) const;

private:
    ProblemSpec spec_;
    Grid grid_;
    FieldD weight_;
    std::vector<Vector<double>> profiles_;
};

struct IntegrationOptions {
    double blowup_ceiling = 1e8;
    // On BlowUp the whole run restarts with dt halved, at most this many times.
    int max_retries = 6;
    bool store_fields = true;
};

struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<FieldD> fields;      // empty unless store_fields
    std::vector<double> l2;          // |u^k|
    std::vector<double> h10;         // ||u^k||
    std::vector<double> viscosity;   // a(l(u^k)) used by the step leaving t_k; last entry repeats
    std::vector<double> residual;    // energy residual of the step ending at t_k; first entry 0
    FieldD final_field;

    std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
};

FieldD imex_step(const DiscreteProblem& problem, const FieldD& u, double t, double dt, double blowup_ceiling = 1e8);
FieldD imex_step(const ProblemSpec& spec, const FieldD& u, double t, double dt, double blowup_ceiling = 1e8);

// r = 1/2 (|u+|^2 - |u|^2 + |u+ - u|^2) + dt a ||u+||^2 - dt (f(u), u+) - dt (h(t+dt), u+).
// Zero up to rounding whenever u_next = imex_step(u, t, dt).
double energy_residual(const DiscreteProblem& problem, const FieldD& u, const FieldD& u_next, double t, double dt);

// Uniform steps from tau; the last step is shortened so the final time is t_end.
Trajectory integrate(const DiscreteProblem& problem, const FieldD& u_tau, double tau, double t_end, double dt,
                     const IntegrationOptions& options = {});
Trajectory integrate(const ProblemSpec& spec, const FieldD& u_tau, double tau, double t_end, double dt,
                     const IntegrationOptions& options = {});

// Endpoint-only variant of integrate (no diagnostics), same retry policy.
FieldD evolve(const DiscreteProblem& problem, const FieldD& u_tau, double tau, double t_end, double dt,
              const IntegrationOptions& options = {});

// Columns t, l2, h10, viscosity, residual.
void write_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace nlrd
