#include "rollidx/calib/model_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "rollidx/core/errors.hpp"
#include "rollidx/core/stats.hpp"
#include "rollidx/market/black76.hpp"

namespace rollidx::calib {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Penalty per quote the model cannot price inside the arbitrage band.  Large
// against vol errors (which are O(0.01)) yet finite, so the optimizer can
// still rank two infeasible points by how many quotes they lose.
constexpr double kUnusablePenalty = 1.0;

std::vector<Date> quote_grid(Date reference, const market::VolSurface& quotes,
                             std::optional<Date> horizon) {
    Date last = quotes.expiries().back();
    if (horizon && *horizon > last) last = *horizon;
    return business_day_grid(reference, last);
}

mc::Observables quote_observables(const market::VolSurface& quotes) {
    mc::Observables obs;
    obs.index_dates = quotes.expiries();
    return obs;
}

double fit_objective(const std::vector<IndexVolFit>& fits) {
    double objective = 0.0;
    for (const auto& f : fits)
        objective += f.usable ? std::abs(f.market_vol - f.model_vol) : kUnusablePenalty;
    return objective;
}

std::vector<bool> near_edge(const std::vector<double>& x, const std::vector<double>& edge,
                            const opt::Bounds& bounds) {
    std::vector<bool> flags(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        flags[i] = std::abs(x[i] - edge[i]) <= 1e-4 * (bounds.upper[i] - bounds.lower[i]);
    return flags;
}

double quantize_a(double a) { return static_cast<double>(llround(a * 1e4)) / 1e4; }

} // namespace

std::vector<IndexVolFit> index_vol_fits(const mc::SimResult& sim, const market::VolSurface& quotes,
                                        const market::DiscountCurve& discount, Date reference,
                                        double index_level) {
    if (!(index_level > 0.0)) throw ValidationError("index level must be positive");
    std::vector<IndexVolFit> fits;
    fits.reserve(quotes.quotes().size());
    std::vector<double> payoff;
    for (const auto& q : quotes.quotes()) {
        const auto it = std::find(sim.index_obs_dates.begin(), sim.index_obs_dates.end(), q.expiry);
        if (it == sim.index_obs_dates.end())
            throw ValidationError("index level was not recorded at quote expiry " +
                                  q.expiry.to_iso());
        const auto& levels = sim.index_obs[static_cast<std::size_t>(it - sim.index_obs_dates.begin())];

        payoff.resize(levels.size());
        for (std::size_t p = 0; p < levels.size(); ++p)
            payoff[p] = std::max(levels[p] - q.strike, 0.0);
        const MeanStdErr ms = mean_std_error(payoff);

        const double expiry_time = year_fraction(reference, q.expiry);
        const double df = discount.df(q.expiry);

        IndexVolFit fit;
        fit.expiry = q.expiry;
        fit.strike = q.strike;
        fit.market_vol = q.vol;
        fit.model_price = df * ms.mean;
        fit.price_std_error = df * ms.std_error;
        fit.usable = market::black76_price_in_bounds(fit.model_price, index_level, q.strike, df);
        if (fit.usable) {
            fit.model_vol =
                market::implied_vol_black76(fit.model_price, index_level, q.strike, expiry_time, df);
            const double vega =
                market::black76_vega(index_level, q.strike, fit.model_vol, expiry_time, df);
            fit.vol_std_error = vega > 1e-12 ? fit.price_std_error / vega : kNaN;
        } else {
            fit.model_vol = kNaN;
            fit.vol_std_error = kNaN;
        }
        fits.push_back(fit);
    }
    return fits;
}

std::vector<IndexVolFit> micro_index_vols(const market::MarketSnapshot& snapshot,
                                          double index_level, const mc::MicroParams& params,
                                          const pde::LocalVolGrid& spot_lv,
                                          const market::VolSurface& quotes,
                                          const mc::SimOptions& options,
                                          std::optional<Date> horizon) {
    if (quotes.empty()) throw ValidationError("index vol repricing needs quotes");
    const auto grid = quote_grid(snapshot.reference, quotes, horizon);
    const auto sim = mc::simulate_micro(snapshot, index_level, params, spot_lv, grid,
                                        quote_observables(quotes), options);
    return index_vol_fits(sim, quotes, snapshot.discount, snapshot.reference, index_level);
}

std::vector<IndexVolFit> macro_index_vols(Date reference, const market::DiscountCurve& discount,
                                          double index_level, const mc::MacroParams& params,
                                          const pde::LocalVolGrid& index_lv,
                                          const market::VolSurface& quotes,
                                          const mc::SimOptions& options,
                                          std::optional<Date> horizon) {
    if (quotes.empty()) throw ValidationError("index vol repricing needs quotes");
    const auto grid = quote_grid(reference, quotes, horizon);
    const auto sim = mc::simulate_macro(reference, index_level, params, index_lv, grid,
                                        quote_observables(quotes), options);
    return index_vol_fits(sim, quotes, discount, reference, index_level);
}

MicroCalibResult calibrate_micro(const market::MarketSnapshot& snapshot, double index_level,
                                 const MicroCalibOptions& options) {
    if (snapshot.index_vols.empty())
        throw ValidationError("micro calibration needs index option quotes");
    if (!(index_level > 0.0)) throw ValidationError("index level must be positive");
    options.bounds.validate();
    if (options.bounds.dimension() != 4)
        throw ValidationError("micro calibration bounds must cover {a, beta, chi, rho_fv}");

    const auto& quotes = snapshot.index_vols;
    const auto grid = quote_grid(snapshot.reference, quotes, std::nullopt);
    const auto obs = quote_observables(quotes);

    mc::SimOptions sim_options;
    sim_options.paths = options.paths;
    sim_options.seed = options.seed;
    sim_options.mode = mc::LeverageMode::particle;
    sim_options.particle = options.particle;

    // The factor local vol depends on a alone; quantizing that coordinate
    // turns repeat visits into exact cache hits.  Failures are cached too:
    // the box can contain a-regions where low strikes leave the factor
    // lattice or the fixed point diverges, and those stay expensive to
    // rediscover otherwise.
    std::map<long long, std::optional<pde::LocalVolGrid>> lv_cache;
    auto factor_lv = [&](double a) -> const std::optional<pde::LocalVolGrid>& {
        const long long key = llround(a * 1e4);
        auto it = lv_cache.find(key);
        if (it == lv_cache.end()) {
            std::optional<pde::LocalVolGrid> lv;
            try {
                lv = lvcalib::calibrate_spot_lv(snapshot, quantize_a(a), options.lv).lv;
            } catch (const ValidationError&) {
            } catch (const ConvergenceError&) {
            }
            it = lv_cache.emplace(key, std::move(lv)).first;
        }
        return it->second;
    };

    auto trial_params = [](const std::vector<double>& x) {
        mc::MicroParams p;
        p.a = quantize_a(x[0]);
        p.beta = x[1];
        p.variance.chi = x[2];
        p.rho_fv = x[3];
        return p;
    };

    auto evaluate = [&](const std::vector<double>& x) {
        const mc::MicroParams p = trial_params(x);
        const auto& lv = factor_lv(p.a);
        if (!lv)
            throw ConvergenceError("factor local vol does not calibrate at a = " +
                                       std::to_string(p.a),
                                   kNaN);
        const auto sim = mc::simulate_micro(snapshot, index_level, p, *lv, grid, obs, sim_options);
        return index_vol_fits(sim, quotes, snapshot.discount, snapshot.reference, index_level);
    };

    // Common random numbers: every evaluation reuses the seed, path count and
    // grid, so the objective is a deterministic function of the parameters
    // and the optimizer sees no Monte Carlo chatter between nearby points.
    const opt::Objective objective = [&](const std::vector<double>& x) -> double {
        try {
            return fit_objective(evaluate(x));
        } catch (const ValidationError&) {
            return kInf;
        } catch (const NumericalError&) {
            return kInf;
        } catch (const ConvergenceError&) {
            return kInf;
        }
    };

    opt::HybridReport search;
    const opt::OptResult best =
        opt::hybrid_minimize(objective, options.bounds, options.optimizer, &search);
    if (!std::isfinite(best.value)) {
        // Every sampled point failed; surface the underlying error instead of
        // reporting a meaningless optimum.
        evaluate(best.x);
        throw ConvergenceError("micro calibration objective failed at every sampled point",
                               best.value);
    }

    const mc::MicroParams params = trial_params(best.x);
    lvcalib::LvCalibResult spot_lv = lvcalib::calibrate_spot_lv(snapshot, params.a, options.lv);

    // Freeze the leverage at the optimum. Extending the grid beyond the last
    // expiry only appends steps, so the repriced quotes reproduce the optimal
    // objective value exactly.
    std::vector<Date> full_grid = quote_grid(snapshot.reference, quotes, options.leverage_horizon);
    auto final_sim =
        mc::simulate_micro(snapshot, index_level, params, spot_lv.lv, full_grid, obs, sim_options);
    std::vector<IndexVolFit> fits =
        index_vol_fits(final_sim, quotes, snapshot.discount, snapshot.reference, index_level);

    return MicroCalibResult{
        params,
        best.value,
        std::move(fits),
        near_edge(best.x, options.bounds.lower, options.bounds),
        near_edge(best.x, options.bounds.upper, options.bounds),
        2.0 * params.variance.kappa * params.variance.theta /
            (params.variance.chi * params.variance.chi),
        std::move(search),
        std::move(spot_lv),
        std::move(final_sim.leverage),
        std::move(full_grid),
    };
}

MacroCalibResult calibrate_macro(const market::MarketSnapshot& snapshot, double index_level,
                                 const MacroCalibOptions& options) {
    if (snapshot.index_vols.empty())
        throw ValidationError("macro calibration needs index option quotes");
    if (!(index_level > 0.0)) throw ValidationError("index level must be positive");
    options.bounds.validate();
    if (options.bounds.dimension() != 4)
        throw ValidationError("macro calibration bounds must cover {theta, chi, rho, v0}");

    const auto& quotes = snapshot.index_vols;
    const Date reference = snapshot.reference;

    // Group quotes per expiry once for the batched semi-analytic pricer.
    struct Slice {
        Date expiry;
        double expiry_time;
        double df;
        std::vector<market::VolQuote> slice_quotes;
        std::vector<double> strikes;
    };
    std::vector<Slice> slices;
    for (Date e : quotes.expiries()) {
        Slice s;
        s.expiry = e;
        s.expiry_time = year_fraction(reference, e);
        s.df = snapshot.discount.df(e);
        s.slice_quotes = quotes.slice(e);
        for (const auto& q : s.slice_quotes) s.strikes.push_back(q.strike);
        slices.push_back(std::move(s));
    }

    auto sv_params = [](const std::vector<double>& x) {
        HestonParams p;
        p.theta = x[0];
        p.chi = x[1];
        p.rho = x[2];
        p.v0 = x[3];
        return p;
    };

    auto sv_fits_at = [&](const HestonParams& p) {
        std::vector<IndexVolFit> fits;
        fits.reserve(quotes.quotes().size());
        for (const auto& s : slices) {
            const auto prices = heston_calls(index_level, s.strikes, s.expiry_time, p, s.df);
            for (std::size_t i = 0; i < s.slice_quotes.size(); ++i) {
                IndexVolFit fit;
                fit.expiry = s.expiry;
                fit.strike = s.slice_quotes[i].strike;
                fit.market_vol = s.slice_quotes[i].vol;
                fit.model_price = prices[i];
                fit.usable =
                    market::black76_price_in_bounds(prices[i], index_level, fit.strike, s.df);
                if (fit.usable) {
                    fit.model_vol = market::implied_vol_black76(prices[i], index_level, fit.strike,
                                                                s.expiry_time, s.df);
                    fit.vol_std_error = 0.0;
                } else {
                    fit.model_vol = kNaN;
                    fit.vol_std_error = kNaN;
                }
                fits.push_back(fit);
            }
        }
        return fits;
    };

    const opt::Objective objective = [&](const std::vector<double>& x) {
        return fit_objective(sv_fits_at(sv_params(x)));
    };

    opt::HybridReport search;
    const opt::OptResult best =
        opt::hybrid_minimize(objective, options.bounds, options.optimizer, &search);

    const HestonParams sv = sv_params(best.x);
    mc::MacroParams params;
    params.rho = sv.rho;
    params.variance = mc::CirParams{sv.kappa, sv.theta, sv.chi, sv.v0};

    // Stage 2: the index local vol is its own fixed point on the same smile,
    // independent of the variance parameters.
    lvcalib::LvCalibResult index_lv =
        lvcalib::calibrate_index_lv(reference, quotes, index_level, snapshot.discount, options.lv);

    // Stage 3: one combined run; the conditional-variance surface it freezes
    // is what pricing and bump scenarios replay.
    std::vector<Date> full_grid = quote_grid(reference, quotes, options.leverage_horizon);
    mc::SimOptions sim_options;
    sim_options.paths = options.paths;
    sim_options.seed = options.seed;
    sim_options.mode = mc::LeverageMode::particle;
    sim_options.particle = options.particle;
    auto sim = mc::simulate_macro(reference, index_level, params, index_lv.lv, full_grid,
                                  quote_observables(quotes), sim_options);
    std::vector<IndexVolFit> slv_fits =
        index_vol_fits(sim, quotes, snapshot.discount, reference, index_level);

    return MacroCalibResult{
        params,
        best.value,
        sv_fits_at(sv),
        std::move(slv_fits),
        near_edge(best.x, options.bounds.lower, options.bounds),
        near_edge(best.x, options.bounds.upper, options.bounds),
        2.0 * sv.kappa * sv.theta / (sv.chi * sv.chi),
        std::move(search),
        std::move(index_lv),
        std::move(sim.leverage),
        std::move(full_grid),
    };
}

} // namespace rollidx::calib
