#include "rollidx/lvcalib/lv_calibration.hpp"

#include "rollidx/core/csv.hpp"
#include "rollidx/core/errors.hpp"
#include "rollidx/market/black76.hpp"

#include <algorithm>
#include <cmath>

namespace rollidx::lvcalib {

double effective_strike(double a, double t, double maturity_time, double strike, double f0) {
    return 1.0 - std::exp(a * (maturity_time - t)) * (1.0 - strike / f0);
}

double futures_local_vol(double a, double t, double maturity_time, double f, double f0,
                         const pde::LocalVolGrid& spot_lv) {
    const double floor_price = f0 * (1.0 - std::exp(-a * (maturity_time - t)));
    const double k = effective_strike(a, t, maturity_time, f, f0);
    const double coeff = (f - floor_price) * spot_lv(t, k);
    // Paths kicked below the curve's reachable floor would otherwise see a
    // negative diffusion coefficient.
    return std::max(coeff, 1e-8);
}

double futures_call_from_pde(const pde::PdeSolution& sol, double a, double t,
                             double maturity_time, double strike, double f0) {
    const double k = effective_strike(a, t, maturity_time, strike, f0);
    return f0 * std::exp(-a * (maturity_time - t)) * sol.at(t, std::max(k, 0.0));
}

namespace {

struct CalibQuote {
    std::size_t maturity;
    double expiry_time;
    double maturity_time;
    double strike;
    double k;          // normalized strike on the factor lattice
    double market_vol;
    double forward;
    double df;
    double vega;
};

// Piecewise-linear curve through (k, ratio) points, flat beyond the ends.
double interp_ratio(const std::vector<std::pair<double, double>>& pts, double k) {
    if (pts.empty()) return 1.0;
    if (k <= pts.front().first) return pts.front().second;
    if (k >= pts.back().first) return pts.back().second;
    auto hi = std::upper_bound(pts.begin(), pts.end(), k,
                               [](double v, const auto& p) { return v < p.first; });
    const auto lo = hi - 1;
    const double w = (k - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

LvCalibResult run_fixed_point(double a, std::vector<CalibQuote> quotes,
                              const LvCalibOptions& opt) {
    if (quotes.empty())
        throw ValidationError("local vol calibration: no quotes to fit");
    if (opt.max_iterations < 1 || opt.vol_tolerance <= 0.0 || opt.max_update_factor <= 1.0 ||
        opt.space_nodes < 10 || opt.k_max <= 1.0)
        throw ValidationError("local vol calibration: invalid options");

    for (const CalibQuote& q : quotes) {
        if (q.k <= 0.0 || q.k >= opt.k_max)
            throw ValidationError("local vol calibration: strike " + format_double(q.strike) +
                                  " maps to normalized strike " + format_double(q.k) +
                                  " outside (0, " + format_double(opt.k_max) + ")");
    }

    // Expiry pillars; slab m of the lattice covers [pillar_{m-1}, pillar_m).
    std::vector<double> pillars;
    for (const CalibQuote& q : quotes) pillars.push_back(q.expiry_time);
    std::sort(pillars.begin(), pillars.end());
    pillars.erase(std::unique(pillars.begin(), pillars.end()), pillars.end());

    std::vector<double> slab_starts{0.0};
    for (std::size_t e = 0; e + 1 < pillars.size(); ++e) slab_starts.push_back(pillars[e]);

    const std::vector<double> k_grid = pde::make_space_grid(opt.space_nodes, opt.k_max);
    const int days = static_cast<int>(std::llround(pillars.back() * 365.0));
    const std::vector<double> times = pde::make_daily_time_grid(days);

    // Start from the flat vol of each pillar's nearest-the-money quote.
    std::vector<std::vector<double>> init(slab_starts.size());
    for (std::size_t e = 0; e < pillars.size(); ++e) {
        double best_dist = 1e300, vol = 0.0;
        for (const CalibQuote& q : quotes) {
            if (q.expiry_time != pillars[e]) continue;
            if (std::abs(q.k - 1.0) < best_dist) {
                best_dist = std::abs(q.k - 1.0);
                vol = q.market_vol;
            }
        }
        init[e].assign(k_grid.size(), vol);
    }
    pde::LocalVolGrid lv(slab_starts, k_grid, std::move(init));

    LvCalibResult result{lv, {}, {}, 0.0, 0};
    pde::PdeOptions pde_opt;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const pde::PdeSolution sol = pde::solve_forward_call_pde(a, lv, times, k_grid, pde_opt);

        double worst = 0.0;
        std::vector<QuoteFit> fits;
        std::vector<double> model_vols(quotes.size());
        fits.reserve(quotes.size());
        for (std::size_t qi = 0; qi < quotes.size(); ++qi) {
            const CalibQuote& q = quotes[qi];
            const double price =
                q.df * futures_call_from_pde(sol, a, q.expiry_time, q.maturity_time, q.strike,
                                             q.forward);
            double model_vol;
            const double intrinsic = q.df * std::max(q.forward - q.strike, 0.0);
            if (price <= intrinsic) {
                model_vol = 0.0;
            } else if (!market::black76_price_in_bounds(price, q.forward, q.strike, q.df)) {
                model_vol = lv.cap();
            } else {
                model_vol = market::implied_vol_black76(price, q.forward, q.strike,
                                                        q.expiry_time, q.df);
            }
            model_vols[qi] = model_vol;
            if (q.vega >= opt.vega_floor)
                worst = std::max(worst, std::abs(model_vol - q.market_vol));
            fits.push_back({q.maturity, q.expiry_time, q.strike, q.k, q.market_vol, model_vol});
        }

        result.fits = std::move(fits);
        result.worst_vol_error = worst;
        result.iterations = it + 1;
        if (worst <= opt.vol_tolerance) {
            result.lv = lv;
            result.pde = sol;
            return result;
        }
        if (it + 1 == opt.max_iterations) break;

        // Multiplicative update: market/model vol ratio per quote, spread
        // linearly in k within each pillar and applied to the pillar's slab.
        for (std::size_t e = 0; e < pillars.size(); ++e) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t qi = 0; qi < quotes.size(); ++qi) {
                const CalibQuote& q = quotes[qi];
                if (q.expiry_time != pillars[e] || q.vega < opt.vega_floor) continue;
                double ratio;
                if (model_vols[qi] <= 0.0) {
                    ratio = opt.max_update_factor; // undershoots even intrinsic
                } else {
                    ratio = std::clamp(q.market_vol / model_vols[qi],
                                       1.0 / opt.max_update_factor, opt.max_update_factor);
                }
                pts.emplace_back(q.k, ratio);
            }
            std::sort(pts.begin(), pts.end());
            // Coincident normalized strikes (same node from two quotes)
            // collapse to their average ratio.
            std::vector<std::pair<double, double>> merged;
            for (const auto& p : pts) {
                if (!merged.empty() && std::abs(merged.back().first - p.first) < 1e-12) {
                    merged.back().second = 0.5 * (merged.back().second + p.second);
                } else {
                    merged.push_back(p);
                }
            }
            for (std::size_t p = 0; p < k_grid.size(); ++p)
                lv.scale_node(e, p, interp_ratio(merged, k_grid[p]));
        }
    }

    throw ConvergenceError("local vol calibration did not reach " +
                               format_double(opt.vol_tolerance) + " within " +
                               std::to_string(opt.max_iterations) + " iterations",
                           result.worst_vol_error);
}

} // namespace

LvCalibResult calibrate_spot_lv(const market::MarketSnapshot& snapshot, double a,
                                const LvCalibOptions& options) {
    if (!(a >= 0.0) || !std::isfinite(a))
        throw ValidationError("calibrate_spot_lv: mean reversion must be non-negative");
    std::vector<CalibQuote> quotes;
    for (std::size_t i = 0; i < snapshot.futures.size(); ++i) {
        const market::VolSurface& smile = snapshot.futures_vol(i);
        if (smile.empty()) continue;
        const double f0 = snapshot.futures.price(i);
        const double t_mat = year_fraction(snapshot.reference, snapshot.futures.maturity(i));
        for (const market::VolQuote& q : smile.quotes()) {
            const double t_exp = year_fraction(snapshot.reference, q.expiry);
            CalibQuote cq;
            cq.maturity = i;
            cq.expiry_time = t_exp;
            cq.maturity_time = t_mat;
            cq.strike = q.strike;
            cq.k = effective_strike(a, t_exp, t_mat, q.strike, f0);
            cq.market_vol = q.vol;
            cq.forward = f0;
            cq.df = snapshot.discount.df(q.expiry);
            cq.vega = market::black76_vega(f0, q.strike, q.vol, t_exp, cq.df);
            quotes.push_back(cq);
        }
    }
    return run_fixed_point(a, std::move(quotes), options);
}

LvCalibResult calibrate_index_lv(Date reference, const market::VolSurface& index_vols,
                                 double index_level, const market::DiscountCurve& discount,
                                 const LvCalibOptions& options) {
    if (!(index_level > 0.0))
        throw ValidationError("calibrate_index_lv: index level must be positive");
    std::vector<CalibQuote> quotes;
    for (const market::VolQuote& q : index_vols.quotes()) {
        const double t_exp = year_fraction(reference, q.expiry);
        CalibQuote cq;
        cq.maturity = 0;
        cq.expiry_time = t_exp;
        cq.maturity_time = t_exp; // driftless: no curve mapping
        cq.strike = q.strike;
        cq.k = q.strike / index_level;
        cq.market_vol = q.vol;
        cq.forward = index_level;
        cq.df = discount.df(q.expiry);
        cq.vega = market::black76_vega(index_level, q.strike, q.vol, t_exp, cq.df);
        quotes.push_back(cq);
    }
    return run_fixed_point(0.0, std::move(quotes), options);
}

} // namespace rollidx::lvcalib
