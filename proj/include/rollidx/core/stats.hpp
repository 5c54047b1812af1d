#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace rollidx {

// Pairwise (tree) summation with a fixed recursion structure.  The reduction
// order depends only on the array length, never on thread scheduling, so
// Monte Carlo estimates are bit-identical across reruns and thread counts
// (and pick up the usual O(log n) error growth instead of O(n)).
double pairwise_sum(std::span<const double> values);

struct MeanStdErr {
    double mean = 0.0;
    double std_error = 0.0; // sample standard deviation / sqrt(n)
};

// Sample mean and standard error with pairwise-deterministic accumulation.
MeanStdErr mean_std_error(std::span<const double> values);

// Sample standard deviation (n-1 denominator), pairwise-deterministic.
double sample_std(std::span<const double> values);

} // namespace rollidx
