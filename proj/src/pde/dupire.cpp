#include "rollidx/pde/dupire.hpp"

#include "rollidx/core/csv.hpp"
#include "rollidx/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rollidx::pde {

namespace {

struct Tridiagonal {
    std::vector<double> lower, diag, upper; // lower[0] and upper[n-1] unused
};

// Thomas algorithm; the systems here are strictly diagonally dominant for
// the implicit half (diag = 1 + positive terms), so no pivoting is needed.
void solve_tridiagonal(const Tridiagonal& m, std::vector<double>& rhs,
                       std::vector<double>& scratch) {
    const std::size_t n = rhs.size();
    scratch.resize(n);
    double pivot = m.diag[0];
    if (pivot == 0.0) throw NumericalError("pde: zero pivot in tridiagonal solve");
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = m.upper[i - 1] / pivot;
        pivot = m.diag[i] - m.lower[i] * scratch[i];
        if (pivot == 0.0) throw NumericalError("pde: zero pivot in tridiagonal solve");
        rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

// Average of (1-x)^+ over [lo, hi]; exact through the kink at x = 1.
double cell_averaged_payoff(double lo, double hi) {
    if (lo >= 1.0) return 0.0;
    const double u = std::min(hi, 1.0);
    const double integral = (u - lo) - 0.5 * (u * u - lo * lo);
    return integral / (hi - lo);
}

} // namespace

std::vector<double> make_space_grid(std::size_t nodes, double k_max) {
    if (nodes < 3) throw ValidationError("pde: need at least 3 space nodes");
    if (!(k_max > 0.0)) throw ValidationError("pde: k_max must be positive");
    std::vector<double> k(nodes);
    const double h = k_max / static_cast<double>(nodes - 1);
    for (std::size_t p = 0; p < nodes; ++p) k[p] = h * static_cast<double>(p);
    k.back() = k_max;
    return k;
}

std::vector<double> make_daily_time_grid(int days) {
    if (days < 1) throw ValidationError("pde: need at least 1 time step");
    std::vector<double> t(static_cast<std::size_t>(days) + 1);
    for (int d = 0; d <= days; ++d) t[static_cast<std::size_t>(d)] = d / 365.0;
    return t;
}

double PdeSolution::at(double t, double strike) const {
    const std::vector<double>& row = values[time_index(t)];
    if (strike <= k.front()) return row.front();
    if (strike >= k.back()) return row.back();
    const auto it = std::upper_bound(k.begin(), k.end(), strike);
    const std::size_t hi = static_cast<std::size_t>(it - k.begin());
    const std::size_t lo = hi - 1;
    const double w = (strike - k[lo]) / (k[hi] - k[lo]);
    return row[lo] + w * (row[hi] - row[lo]);
}

std::size_t PdeSolution::time_index(double t) const {
    for (std::size_t m = 0; m < times.size(); ++m)
        if (std::abs(times[m] - t) < 1e-9) return m;
    throw ValidationError("pde: time " + format_double(t) + " is not a grid node");
}

PdeSolution solve_forward_call_pde(double a, const LocalVolGrid& lv,
                                   const std::vector<double>& times,
                                   const std::vector<double>& k, const PdeOptions& options) {
    if (!(a >= 0.0)) throw ValidationError("pde: mean-reversion speed must be non-negative");
    if (times.size() < 2 || std::abs(times.front()) > 1e-12)
        throw ValidationError("pde: time grid must start at 0 with at least one step");
    for (std::size_t m = 1; m < times.size(); ++m)
        if (times[m] <= times[m - 1])
            throw ValidationError("pde: time grid not strictly increasing");
    if (k.size() < 3 || std::abs(k.front()) > 1e-12)
        throw ValidationError("pde: space grid must start at 0 with at least 3 nodes");
    for (std::size_t p = 1; p < k.size(); ++p)
        if (k[p] <= k[p - 1]) throw ValidationError("pde: space grid not strictly increasing");
    if (!(options.theta >= 0.0 && options.theta <= 1.0))
        throw ValidationError("pde: theta must lie in [0, 1]");

    const std::size_t P = k.size();
    PdeSolution sol;
    sol.times = times;
    sol.k = k;
    sol.values.assign(times.size(), std::vector<double>(P, 0.0));

    // Cell-averaged payoff keeps the kink at k = 1 from polluting the
    // second-order convergence when it falls between nodes.
    std::vector<double>& initial = sol.values[0];
    initial[0] = 1.0;
    for (std::size_t p = 1; p + 1 < P; ++p) {
        const double lo = 0.5 * (k[p - 1] + k[p]);
        const double hi = 0.5 * (k[p] + k[p + 1]);
        initial[p] = cell_averaged_payoff(lo, hi);
    }
    initial[P - 1] = 0.0;

    sol.min_value = 0.0;
    sol.min_second_difference = 0.0;

    // Spatial operator rows at one slab: A = -a - a(1-k) d/dk + 0.5 k^2 L^2 d2/dk2.
    std::vector<double> a_lower(P, 0.0), a_diag(P, 0.0), a_upper(P, 0.0);
    auto build_operator = [&](double slab_time) {
        for (std::size_t p = 1; p + 1 < P; ++p) {
            const double hm = k[p] - k[p - 1];
            const double hp = k[p + 1] - k[p];
            const double drift = a * (1.0 - k[p]);
            const double lvol = lv(slab_time, k[p]);
            const double diff = 0.5 * k[p] * k[p] * lvol * lvol;
            const double d1_l = -hp / (hm * (hm + hp));
            const double d1_c = (hp - hm) / (hm * hp);
            const double d1_r = hm / (hp * (hm + hp));
            const double d2_l = 2.0 / (hm * (hm + hp));
            const double d2_c = -2.0 / (hm * hp);
            const double d2_r = 2.0 / (hp * (hm + hp));
            a_lower[p] = -drift * d1_l + diff * d2_l;
            a_diag[p] = -a - drift * d1_c + diff * d2_c;
            a_upper[p] = -drift * d1_r + diff * d2_r;
        }
    };

    Tridiagonal lhs{std::vector<double>(P), std::vector<double>(P), std::vector<double>(P)};
    std::vector<double> rhs(P), scratch(P), current = initial, next(P);

    auto apply_step = [&](double dt, double theta, std::vector<double>& out) {
        for (std::size_t p = 1; p + 1 < P; ++p) {
            lhs.lower[p] = -theta * dt * a_lower[p];
            lhs.diag[p] = 1.0 - theta * dt * a_diag[p];
            lhs.upper[p] = -theta * dt * a_upper[p];
            const double expl = 1.0 - theta;
            rhs[p] = current[p] + expl * dt *
                                      (a_lower[p] * current[p - 1] + a_diag[p] * current[p] +
                                       a_upper[p] * current[p + 1]);
        }
        lhs.diag[0] = 1.0;
        lhs.upper[0] = 0.0;
        rhs[0] = 1.0; // c(t, 0) = E[s_t] = 1
        lhs.diag[P - 1] = 1.0;
        lhs.lower[P - 1] = 0.0;
        rhs[P - 1] = 0.0;
        solve_tridiagonal(lhs, rhs, scratch);
        out = rhs;
    };

    for (std::size_t m = 0; m + 1 < times.size(); ++m) {
        const double dt = times[m + 1] - times[m];
        build_operator(times[m]);
        if (static_cast<int>(m) < options.rannacher_steps) {
            // Damped start: two fully implicit half-steps.
            apply_step(0.5 * dt, 1.0, next);
            current = next;
            apply_step(0.5 * dt, 1.0, next);
        } else {
            apply_step(dt, options.theta, next);
        }
        current = next;
        for (std::size_t p = 0; p < P; ++p)
            sol.min_value = std::min(sol.min_value, current[p]);
        for (std::size_t p = 1; p + 1 < P; ++p)
            sol.min_second_difference = std::min(
                sol.min_second_difference, current[p - 1] - 2.0 * current[p] + current[p + 1]);
        sol.values[m + 1] = current;
    }
    return sol;
}

} // namespace rollidx::pde
