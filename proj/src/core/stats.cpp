#include "rollidx/core/stats.hpp"

#include <vector>

namespace rollidx {

namespace {

// Below this size a serial loop is cheaper than further splitting and the
// ordering is still fixed by construction.
constexpr std::size_t kLeaf = 64;

double pairwise_sum_impl(const double* data, std::size_t n) {
    if (n <= kLeaf) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += data[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

} // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values.data(), values.size());
}

MeanStdErr mean_std_error(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return {};
    const double mean = pairwise_sum(values) / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    // Two-pass variance: pairwise sum of squared deviations about the mean.
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

double sample_std(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const MeanStdErr ms = mean_std_error(values);
    return ms.std_error * std::sqrt(static_cast<double>(n));
}

} // namespace rollidx
