#pragma once

#include <stdexcept>
#include <string>

namespace rollidx {

// Error taxonomy used across the library.  The CLI maps these onto process
// exit codes (validation -> 1, numerical -> 2, non-convergence -> 3), so new
// failure modes should pick the closest family rather than throwing raw
// std::runtime_error.

// Malformed or inconsistent inputs: bad CSV rows, negative prices, dates out
// of order, unknown enum tags, contract schedules off the business grid, ...
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine left its domain of validity: Cholesky of an indefinite
// matrix, implied vol outside no-arbitrage bounds, quadrature blow-up, ...
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative scheme exhausted its budget without meeting its tolerance.
// Carries the worst residual so callers can report how close it got.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double worst_residual)
        : std::runtime_error(what), worst_residual_(worst_residual) {}

    double worst_residual() const noexcept { return worst_residual_; }

private:
    double worst_residual_;
};

} // namespace rollidx
