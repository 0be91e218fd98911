#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlrd {

// Two objects were built on different grids (length or node count).
class GridMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Discrete L2 norm exceeded the ceiling or became non-finite during time stepping.
class BlowUp : public std::runtime_error {
public:
    BlowUp(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class UnknownEta : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Tempered exponent outside the open interval (0, 2 m lambda_1).
class InvalidMu : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DivergentTail : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoStabilization : public std::runtime_error {
public:
    NoStabilization(const std::string& what, double last_metric)
        : std::runtime_error(what), last_metric_(last_metric) {}
    double last_metric() const noexcept { return last_metric_; }

private:
    double last_metric_;
};

}  // namespace nlrd
