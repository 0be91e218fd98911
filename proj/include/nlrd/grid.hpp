#pragma once

// Uniform 1D Dirichlet grid on (0, L) and the discrete operators, norms and
// functionals built on it. Interior nodes only: boundary values are zero and
// never stored. Spatial integrals use the interior rectangle rule (weight h per
// node), which makes (-Lap_h u, u)_h equal the discrete H1_0 seminorm exactly.

#include <Eigen/Core>

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nlrd/errors.hpp"

namespace nlrd {

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class EigenvalueMode { continuous, discrete };

template <class Scalar = double>
class Grid1D {
public:
    Grid1D(Scalar length, Eigen::Index interior_nodes) : length_(length), n_(interior_nodes) {
        if (!(length > Scalar(0)) || !std::isfinite(static_cast<double>(length)))
            throw std::invalid_argument("grid length must be positive and finite");
        if (interior_nodes < 3) throw std::invalid_argument("grid needs at least 3 interior nodes");
    }

    Scalar length() const noexcept { return length_; }
    Eigen::Index size() const noexcept { return n_; }
    Scalar spacing() const noexcept { return length_ / Scalar(n_ + 1); }

    // Coordinate of interior node i (0-based), i.e. x_{i+1} = (i+1) h.
    Scalar node(Eigen::Index i) const noexcept { return Scalar(i + 1) * spacing(); }

    Vector<Scalar> nodes() const {
        Vector<Scalar> x(n_);
        for (Eigen::Index i = 0; i < n_; ++i) x[i] = node(i);
        return x;
    }

    bool operator==(const Grid1D& other) const noexcept {
        return length_ == other.length_ && n_ == other.n_;
    }

private:
    Scalar length_;
    Eigen::Index n_;
};

template <class Scalar = double>
class Field {
public:
    Field(Grid1D<Scalar> grid, Vector<Scalar> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) throw GridMismatch("field length does not match grid");
        if (!values_.allFinite()) throw std::invalid_argument("field has non-finite entries");
    }

    static Field zero(const Grid1D<Scalar>& grid) { return Field(grid, Vector<Scalar>::Zero(grid.size())); }

    const Grid1D<Scalar>& grid() const noexcept { return grid_; }
    const Vector<Scalar>& values() const noexcept { return values_; }
    Eigen::Index size() const noexcept { return values_.size(); }
    Scalar operator[](Eigen::Index i) const { return values_[i]; }

    bool operator==(const Field& other) const {
        return grid_ == other.grid_ && values_ == other.values_;
    }

private:
    Grid1D<Scalar> grid_;
    Vector<Scalar> values_;
};

using Grid = Grid1D<double>;
using FieldD = Field<double>;

template <class Scalar>
void require_same_grid(const Grid1D<Scalar>& a, const Grid1D<Scalar>& b) {
    if (!(a == b)) throw GridMismatch("operands live on different grids");
}

// Solves the constant-coefficient symmetric tridiagonal system
// off*x_{i-1} + diag*x_i + off*x_{i+1} = rhs_i with x_{-1} = x_n = 0 (Thomas).
template <class Scalar, class Derived>
Vector<Scalar> solve_tridiagonal(Scalar diag, Scalar off, const Eigen::MatrixBase<Derived>& rhs) {
    const Eigen::Index n = rhs.size();
    Vector<Scalar> c(n);
    Vector<Scalar> x(n);
    Scalar pivot = diag;
    if (!(std::abs(pivot) > std::numeric_limits<Scalar>::min()))
        throw SolverFailure("tridiagonal solve: zero pivot at row 0");
    c[0] = off / pivot;
    x[0] = rhs[0] / pivot;
    for (Eigen::Index i = 1; i < n; ++i) {
        pivot = diag - off * c[i - 1];
        if (!(std::abs(pivot) > std::numeric_limits<Scalar>::min()) || !std::isfinite(static_cast<double>(pivot)))
            throw SolverFailure("tridiagonal solve: degenerate pivot at row " + std::to_string(i));
        c[i] = off / pivot;
        x[i] = (rhs[i] - off * x[i - 1]) / pivot;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
    return x;
}

// (Lap_h u)_i = (u_{i-1} - 2 u_i + u_{i+1}) / h^2 with zero boundary values.
template <class Scalar>
Field<Scalar> laplacian(const Field<Scalar>& u) {
    const auto& v = u.values();
    const Eigen::Index n = v.size();
    const Scalar inv_h2 = Scalar(1) / (u.grid().spacing() * u.grid().spacing());
    Vector<Scalar> out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar left = i > 0 ? v[i - 1] : Scalar(0);
        const Scalar right = i + 1 < n ? v[i + 1] : Scalar(0);
        out[i] = (left - Scalar(2) * v[i] + right) * inv_h2;
    }
    return Field<Scalar>(u.grid(), std::move(out));
}

template <class Scalar>
Scalar first_eigenvalue(const Grid1D<Scalar>& grid, EigenvalueMode mode = EigenvalueMode::discrete) {
    const Scalar pi = std::numbers::pi_v<Scalar>;
    if (mode == EigenvalueMode::continuous) {
        const Scalar k = pi / grid.length();
        return k * k;
    }
    const Scalar h = grid.spacing();
    const Scalar s = std::sin(pi * h / (Scalar(2) * grid.length()));
    return Scalar(4) / (h * h) * s * s;
}

// Discrete eigenvalue of -Lap_h for sine mode k (1-based).
template <class Scalar>
Scalar mode_eigenvalue(const Grid1D<Scalar>& grid, int k) {
    const Scalar h = grid.spacing();
    const Scalar s = std::sin(Scalar(k) * std::numbers::pi_v<Scalar> * h / (Scalar(2) * grid.length()));
    return Scalar(4) / (h * h) * s * s;
}

// sin(k pi x / L) sampled at the interior nodes.
template <class Scalar>
Field<Scalar> sine_mode(const Grid1D<Scalar>& grid, int k) {
    Vector<Scalar> v(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        v[i] = std::sin(Scalar(k) * std::numbers::pi_v<Scalar> * grid.node(i) / grid.length());
    return Field<Scalar>(grid, std::move(v));
}

template <class Scalar>
Scalar inner(const Field<Scalar>& a, const Field<Scalar>& b) {
    require_same_grid(a.grid(), b.grid());
    return a.grid().spacing() * a.values().dot(b.values());
}

template <class Scalar>
Scalar l2_norm(const Field<Scalar>& u) {
    return std::sqrt(u.grid().spacing()) * u.values().norm();
}

template <class Scalar>
Scalar l2_norm_squared(const Field<Scalar>& u) {
    return u.grid().spacing() * u.values().squaredNorm();
}

template <class Scalar>
Scalar l2_distance(const Field<Scalar>& a, const Field<Scalar>& b) {
    require_same_grid(a.grid(), b.grid());
    return std::sqrt(a.grid().spacing()) * (a.values() - b.values()).norm();
}

// ||u||^2 = h * sum_{i=0}^{n} ((u_{i+1} - u_i)/h)^2 including both boundary differences.
template <class Scalar>
Scalar h10_norm_squared(const Field<Scalar>& u) {
    const auto& v = u.values();
    const Eigen::Index n = v.size();
    const Scalar h = u.grid().spacing();
    Scalar acc = v[0] * v[0] + v[n - 1] * v[n - 1];
    for (Eigen::Index i = 1; i < n; ++i) {
        const Scalar d = v[i] - v[i - 1];
        acc += d * d;
    }
    return acc / h;
}

template <class Scalar>
Scalar h10_norm(const Field<Scalar>& u) {
    return std::sqrt(h10_norm_squared(u));
}

// Summation-by-parts bilinear form h * sum (D a)(D b).
template <class Scalar>
Scalar h10_inner(const Field<Scalar>& a, const Field<Scalar>& b) {
    require_same_grid(a.grid(), b.grid());
    const auto& x = a.values();
    const auto& y = b.values();
    const Eigen::Index n = x.size();
    Scalar acc = x[0] * y[0] + x[n - 1] * y[n - 1];
    for (Eigen::Index i = 1; i < n; ++i) acc += (x[i] - x[i - 1]) * (y[i] - y[i - 1]);
    return acc / a.grid().spacing();
}

template <class Scalar>
Scalar lp_norm(const Field<Scalar>& u, Scalar p) {
    if (!(p >= Scalar(1))) throw std::invalid_argument("lp_norm requires p >= 1");
    Scalar acc(0);
    for (Eigen::Index i = 0; i < u.size(); ++i) acc += std::pow(std::abs(u[i]), p);
    return std::pow(u.grid().spacing() * acc, Scalar(1) / p);
}

template <class Scalar>
struct Norms {
    Scalar l2;
    Scalar h10;
    Scalar lp;
};

template <class Scalar>
Norms<Scalar> norms(const Field<Scalar>& u, Scalar p) {
    return {l2_norm(u), h10_norm(u), lp_norm(u, p)};
}

// w solving -Lap_h w = f with homogeneous Dirichlet data.
template <class Scalar>
Field<Scalar> solve_poisson(const Field<Scalar>& f) {
    const Scalar inv_h2 = Scalar(1) / (f.grid().spacing() * f.grid().spacing());
    return Field<Scalar>(f.grid(), solve_tridiagonal<Scalar>(Scalar(2) * inv_h2, -inv_h2, f.values()));
}

// u solving (I - c Lap_h) u = rhs, c >= 0.
template <class Scalar, class Derived>
Vector<Scalar> solve_shifted_laplacian(const Grid1D<Scalar>& grid, Scalar c, const Eigen::MatrixBase<Derived>& rhs) {
    const Scalar k = c / (grid.spacing() * grid.spacing());
    return solve_tridiagonal<Scalar>(Scalar(1) + Scalar(2) * k, -k, rhs);
}

// Discrete H^{-1} inner product (f, (-Lap_h)^{-1} g)_h.
template <class Scalar>
Scalar dual_inner(const Field<Scalar>& f, const Field<Scalar>& g) {
    require_same_grid(f.grid(), g.grid());
    return inner(f, solve_poisson(g));
}

// ||f||_* = sqrt((f, w)_h) with -Lap_h w = f.
template <class Scalar>
Scalar dual_norm(const Field<Scalar>& f) {
    const Scalar s = dual_inner(f, f);
    return std::sqrt(std::max(s, Scalar(0)));
}

// l(u) = (g_l, u)_h.
template <class Scalar>
Scalar nonlocal_value(const Field<Scalar>& weight, const Field<Scalar>& u) {
    return inner(weight, u);
}

// Two CSV columns x,u with 17 significant digits.
template <class Scalar>
void write_csv(std::ostream& os, const Field<Scalar>& u) {
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << "x,u\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < u.size(); ++i) os << u.grid().node(i) << ',' << u[i] << '\n';
    os.flags(flags);
    os.precision(precision);
}

}  // namespace nlrd
