#pragma once

#include <cstddef>
#include <vector>

namespace rollidx::mc {

// Kernel regression of E[(v)^+ | X = x] over a simulation cross-section,
// used to turn the calibrated local vol into the stochastic-local-vol
// leverage.  Compactly supported quartic kernel
//
//   K_eps(u) = (15/16) (1 - (u/eps)^2)^2   on |u| <= eps
//
// with bandwidth eps = mult * stddev(X) * N^{-1/5}.  Estimates are computed
// once on a uniform node grid spanning the cross-section; per-path queries
// interpolate the nodes linearly (flat beyond the ends), which is also what
// makes a stored surface replay bit-identically.
struct ParticleOptions {
    std::size_t nodes = 200;
    double bandwidth_mult = 1.5;
    double denominator_floor = 1e-12; // kernel mass below this -> fallback
    double clamp_lo = 1e-8;           // estimate clamp
    double clamp_hi = 1e3;
};

struct ParticleEstimate {
    std::vector<double> nodes;  // ascending; empty means "never built"
    std::vector<double> values; // clamped estimates at the nodes
    bool degenerate = false;    // cross-section had no usable spread
    long floored_nodes = 0;     // nodes whose kernel mass hit the floor

    // Linear interpolation, flat beyond the node range.
    double operator()(double x) const;
};

// O(N log N): sorts the cross-section once, then answers every node from
// prefix sums of the standardized coordinate's powers (the quartic kernel is
// a polynomial, so a window sum is five moment lookups).
ParticleEstimate estimate_conditional_expectation(const std::vector<double>& x,
                                                  const std::vector<double>& v,
                                                  const ParticleOptions& options = {});

} // namespace rollidx::mc
