#include "rollidx/mc/particle.hpp"

#include "rollidx/core/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace rollidx::mc {

double ParticleEstimate::operator()(double x) const {
    if (nodes.empty())
        throw NumericalError("particle estimate queried before it was built");
    if (nodes.size() == 1 || x <= nodes.front()) return values.front();
    if (x >= nodes.back()) return values.back();
    // Uniform node spacing: direct index arithmetic.
    const double h = (nodes.back() - nodes.front()) / static_cast<double>(nodes.size() - 1);
    std::size_t i = static_cast<std::size_t>((x - nodes.front()) / h);
    if (i >= nodes.size() - 1) i = nodes.size() - 2;
    const double w = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
    return values[i] + w * (values[i + 1] - values[i]);
}

ParticleEstimate estimate_conditional_expectation(const std::vector<double>& x,
                                                  const std::vector<double>& v,
                                                  const ParticleOptions& opt) {
    const std::size_t n = x.size();
    if (n == 0 || v.size() != n)
        throw ValidationError("particle estimator: x and v must be non-empty and equal length");
    if (opt.nodes < 2 || opt.bandwidth_mult <= 0.0 || opt.clamp_lo <= 0.0 ||
        opt.clamp_hi <= opt.clamp_lo)
        throw ValidationError("particle estimator: invalid options");

    double mean_x = 0.0, mean_v = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        mean_x += x[j];
        mean_v += std::max(v[j], 0.0);
    }
    mean_x /= static_cast<double>(n);
    mean_v /= static_cast<double>(n);

    double var_x = 0.0;
    for (std::size_t j = 0; j < n; ++j) var_x += (x[j] - mean_x) * (x[j] - mean_x);
    const double sd_x = std::sqrt(var_x / static_cast<double>(n));

    ParticleEstimate out;
    const double fallback = std::clamp(mean_v, opt.clamp_lo, opt.clamp_hi);

    // No spread to regress against: every path sees the same price, so the
    // conditional expectation is the plain mean.
    if (!(sd_x > 1e-14 * (std::abs(mean_x) + 1.0)) || n == 1) {
        out.nodes = {mean_x, mean_x + 1.0};
        out.values = {fallback, fallback};
        out.degenerate = true;
        return out;
    }

    // Standardize and sort; ties break on the original index so the result
    // does not depend on the incoming path order's stability.
    std::vector<std::pair<double, std::uint32_t>> ys(n);
    for (std::size_t j = 0; j < n; ++j)
        ys[j] = {(x[j] - mean_x) / sd_x, static_cast<std::uint32_t>(j)};
    std::sort(ys.begin(), ys.end());

    // Prefix sums of y^p and (v)^+ y^p, p = 0..4.
    std::vector<std::array<double, 5>> py(n + 1), pv(n + 1);
    py[0] = pv[0] = {0.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
        const double y = ys[j].first;
        const double w = std::max(v[ys[j].second], 0.0);
        double yp = 1.0;
        for (int p = 0; p < 5; ++p) {
            py[j + 1][p] = py[j][p] + yp;
            pv[j + 1][p] = pv[j][p] + w * yp;
            yp *= y;
        }
    }

    const double eps = opt.bandwidth_mult * std::pow(static_cast<double>(n), -0.2);
    const double y_lo = ys.front().first, y_hi = ys.back().first;

    out.nodes.resize(opt.nodes);
    out.values.resize(opt.nodes);
    const double span = y_hi - y_lo;
    for (std::size_t g = 0; g < opt.nodes; ++g) {
        const double yg =
            y_lo + span * static_cast<double>(g) / static_cast<double>(opt.nodes - 1);
        out.nodes[g] = mean_x + sd_x * yg;

        const auto lo = std::lower_bound(ys.begin(), ys.end(), std::make_pair(yg - eps, 0u));
        const auto hi = std::upper_bound(ys.begin(), ys.end(),
                                         std::make_pair(yg + eps, ~0u));
        const std::size_t a = static_cast<std::size_t>(lo - ys.begin());
        const std::size_t b = static_cast<std::size_t>(hi - ys.begin());

        double num = 0.0, den = 0.0;
        if (b > a) {
            // sum_j w_j (1 - ((y_j - yg)/eps)^2)^2 via the moment expansion
            // of (y - yg)^2 and (y - yg)^4.
            auto window = [&](const std::vector<std::array<double, 5>>& pre, int p) {
                return pre[b][p] - pre[a][p];
            };
            const double e2 = eps * eps, e4 = e2 * e2;
            auto kernel_sum = [&](const std::vector<std::array<double, 5>>& pre) {
                const double s0 = window(pre, 0), s1 = window(pre, 1), s2 = window(pre, 2);
                const double s3 = window(pre, 3), s4 = window(pre, 4);
                const double d2 = s2 - 2.0 * yg * s1 + yg * yg * s0;
                const double d4 = s4 - 4.0 * yg * s3 + 6.0 * yg * yg * s2 -
                                  4.0 * yg * yg * yg * s1 + yg * yg * yg * yg * s0;
                return s0 - 2.0 * d2 / e2 + d4 / e4;
            };
            num = kernel_sum(pv);
            den = kernel_sum(py);
        }

        if (den <= opt.denominator_floor) {
            out.values[g] = fallback;
            ++out.floored_nodes;
        } else {
            out.values[g] = std::clamp(num / den, opt.clamp_lo, opt.clamp_hi);
        }
    }
    return out;
}

} // namespace rollidx::mc
