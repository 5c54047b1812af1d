#include "rollidx/risk/risk.hpp"

#include "rollidx/core/errors.hpp"
#include "rollidx/core/stats.hpp"
#include "rollidx/index/roll.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace rollidx::risk {

namespace {

constexpr double kVolBump = 0.01; // absolute implied-vol shift for vegas

void require_bump(double bump) {
    if (!std::isfinite(bump) || bump <= 0.0)
        throw ValidationError("bump size must be positive and finite");
}

contracts::ContractPrice priced_from(const std::vector<double>& pv) {
    const MeanStdErr stats = mean_std_error(pv);
    return contracts::ContractPrice{stats.mean, stats.std_error, pv.size()};
}

// Differences per-path present values under common random numbers and only
// then estimates the error, so shared noise cancels: a scenario that leaves
// every path untouched reports exactly zero with exactly zero error.
Sensitivity finite_difference(const std::vector<double>& base_pv,
                              const std::vector<double>& high_pv,
                              const std::vector<double>& low_pv, double denominator,
                              double bump, bool central) {
    std::vector<double> diffs(high_pv.size());
    for (std::size_t i = 0; i < diffs.size(); ++i)
        diffs[i] = (high_pv[i] - low_pv[i]) / denominator;
    const MeanStdErr stats = mean_std_error(diffs);
    Sensitivity out;
    out.value = stats.mean;
    out.std_error = stats.std_error;
    out.bump = bump;
    out.central = central;
    out.base = priced_from(base_pv);
    out.bumped = priced_from(high_pv);
    return out;
}

std::vector<double> micro_present_values(const MicroPricing& pricing,
                                         const market::MarketSnapshot& snapshot,
                                         double index_level, const pde::LocalVolGrid& spot_lv,
                                         const contracts::ContractSpec& contract,
                                         mc::LeverageMode mode,
                                         const mc::ConditionalVarianceSurface* frozen) {
    const mc::Observables observables = contracts::required_observables(contract);
    mc::SimOptions options;
    options.paths = pricing.paths;
    options.seed = pricing.seed;
    options.mode = mode;
    options.particle = pricing.particle;
    options.frozen = frozen;
    const mc::SimResult sim = mc::simulate_micro(snapshot, index_level, pricing.params, spot_lv,
                                                 pricing.grid, observables, options);
    const contracts::PathBundle bundle = contracts::make_path_bundle(sim, index_level, observables);
    return contracts::pathwise_present_values(contract, bundle, snapshot.discount);
}

std::vector<double> macro_present_values(const MacroPricing& pricing, double index_level,
                                         const mc::MacroParams& params,
                                         const pde::LocalVolGrid& index_lv,
                                         const contracts::ContractSpec& contract,
                                         const mc::ConditionalVarianceSurface* frozen) {
    const mc::Observables observables = contracts::required_observables(contract);
    mc::SimOptions options;
    options.paths = pricing.paths;
    options.seed = pricing.seed;
    options.mode = mc::LeverageMode::frozen;
    options.frozen = frozen;
    const mc::SimResult sim = mc::simulate_macro(pricing.reference, index_level, params, index_lv,
                                                 pricing.grid, observables, options);
    const contracts::PathBundle bundle = contracts::make_path_bundle(sim, index_level, observables);
    return contracts::pathwise_present_values(contract, bundle, pricing.discount);
}

} // namespace

double index_future_partial(const market::FuturesCurve& futures, double index_level,
                            std::size_t maturity_index) {
    if (maturity_index >= futures.size())
        throw ValidationError("maturity index " + std::to_string(maturity_index) +
                              " out of range for a curve of " + std::to_string(futures.size()) +
                              " contracts");
    const index_engine::RollState state =
        index_engine::initial_roll_state(futures, futures.reference());
    const bool has_second = state.front + 1 < futures.size();
    const double front_price = futures.price(state.front);
    // Outside a roll window to_second is exactly zero, so the placeholder
    // price on a curve whose front is the last contract is never read.
    const double second_price = has_second ? futures.price(state.front + 1) : front_price;
    const index_engine::IndexFuturesSensitivity sens =
        index_engine::index_futures_sensitivity(index_level, state.alpha, front_price, second_price);
    if (maturity_index == state.front) return sens.to_front;
    if (has_second && maturity_index == state.front + 1) return sens.to_second;
    return 0.0;
}

Sensitivity delta_futures(const MicroPricing& pricing, const contracts::ContractSpec& contract,
                          std::size_t maturity_index, const DeltaOptions& options) {
    const market::FuturesCurve& futures = pricing.snapshot.futures;
    if (maturity_index >= futures.size())
        throw ValidationError("maturity index " + std::to_string(maturity_index) +
                              " out of range for a curve of " + std::to_string(futures.size()) +
                              " contracts");
    require_bump(options.bump);
    const double move = options.bump * futures.price(maturity_index);
    const double partial = index_future_partial(futures, pricing.index_level, maturity_index);

    // Shifting a basket pillar shifts today's replicated index level through
    // the holding quantities; the leverage surface stays frozen so the bump
    // run differs from the base run only where the pillar actually matters.
    const auto scenario = [&](double direction) {
        const market::MarketSnapshot shifted =
            pricing.snapshot.with_futures_curve(futures.bumped(maturity_index,
                                                               direction * options.bump));
        const double level = pricing.index_level + direction * move * partial;
        return micro_present_values(pricing, shifted, level, pricing.spot_lv, contract,
                                    mc::LeverageMode::frozen, &pricing.leverage);
    };

    const std::vector<double> base_pv =
        micro_present_values(pricing, pricing.snapshot, pricing.index_level, pricing.spot_lv,
                             contract, mc::LeverageMode::frozen, &pricing.leverage);
    const std::vector<double> up_pv = scenario(+1.0);
    if (!options.central)
        return finite_difference(base_pv, up_pv, base_pv, move, options.bump, false);
    const std::vector<double> down_pv = scenario(-1.0);
    return finite_difference(base_pv, up_pv, down_pv, 2.0 * move, options.bump, true);
}

Sensitivity delta_index_macro(const MacroPricing& pricing, const contracts::ContractSpec& contract,
                              const DeltaOptions& options) {
    require_bump(options.bump);
    const double move = options.bump * pricing.index_level;
    const auto scenario = [&](double scale) {
        return macro_present_values(pricing, pricing.index_level * scale, pricing.params,
                                    pricing.index_lv, contract, &pricing.leverage);
    };
    const std::vector<double> base_pv = scenario(1.0);
    const std::vector<double> up_pv = scenario(1.0 + options.bump);
    if (!options.central)
        return finite_difference(base_pv, up_pv, base_pv, move, options.bump, false);
    const std::vector<double> down_pv = scenario(1.0 - options.bump);
    return finite_difference(base_pv, up_pv, down_pv, 2.0 * move, options.bump, true);
}

Sensitivity delta_index_from_micro(const Sensitivity& delta_front, double index_partial) {
    if (index_partial == 0.0)
        throw NumericalError("index delta from a futures delta is undefined when dIndex/dF is zero");
    Sensitivity mapped = delta_front;
    mapped.value = delta_front.value / index_partial;
    mapped.std_error = delta_front.std_error / std::abs(index_partial);
    return mapped;
}

Sensitivity vega_futures(const MicroPricing& pricing, const contracts::ContractSpec& contract,
                         std::size_t maturity_index) {
    const market::FuturesCurve& futures = pricing.snapshot.futures;
    if (maturity_index >= futures.size())
        throw ValidationError("maturity index " + std::to_string(maturity_index) +
                              " out of range for a curve of " + std::to_string(futures.size()) +
                              " contracts");
    const std::vector<double> base_pv =
        micro_present_values(pricing, pricing.snapshot, pricing.index_level, pricing.spot_lv,
                             contract, mc::LeverageMode::frozen, &pricing.leverage);
    // A vol scenario changes the marginals themselves, so the factor local
    // vol is refit to the shifted smile and the leverage re-estimated live
    // instead of replayed.
    const market::MarketSnapshot shifted =
        pricing.snapshot.with_futures_vol_bumped(maturity_index, kVolBump);
    const lvcalib::LvCalibResult refit =
        lvcalib::calibrate_spot_lv(shifted, pricing.params.a, pricing.lv);
    const std::vector<double> bumped_pv =
        micro_present_values(pricing, shifted, pricing.index_level, refit.lv, contract,
                             mc::LeverageMode::particle, nullptr);
    return finite_difference(base_pv, bumped_pv, base_pv, kVolBump, kVolBump, false);
}

Sensitivity vega_index_macro(const MacroPricing& pricing, const contracts::ContractSpec& contract,
                             const market::MarketSnapshot& market, Date expiry,
                             const calib::MacroCalibOptions& calib_options) {
    if (market.reference != pricing.reference)
        throw ValidationError("market snapshot reference " + market.reference.to_iso() +
                              " does not match the pricing reference " +
                              pricing.reference.to_iso());
    std::vector<market::VolQuote> quotes = market.index_vols.quotes();
    bool hit = false;
    for (market::VolQuote& quote : quotes) {
        if (quote.expiry == expiry) {
            quote.vol += kVolBump;
            hit = true;
        }
    }
    if (!hit)
        throw ValidationError("no index vol quote expires on " + expiry.to_iso());
    const market::MarketSnapshot shifted = market.with_index_vols(
        market::VolSurface(market.index_vols.reference(), std::move(quotes)));
    const calib::MacroCalibResult refit =
        calib::calibrate_macro(shifted, pricing.index_level, calib_options);
    if (refit.grid != pricing.grid)
        throw ValidationError("the recalibrated leverage grid does not match the pricing grid; "
                              "align the leverage horizons before bumping");
    const std::vector<double> base_pv =
        macro_present_values(pricing, pricing.index_level, pricing.params, pricing.index_lv,
                             contract, &pricing.leverage);
    const std::vector<double> bumped_pv =
        macro_present_values(pricing, pricing.index_level, refit.params, refit.index_lv.lv,
                             contract, &refit.leverage);
    return finite_difference(base_pv, bumped_pv, base_pv, kVolBump, kVolBump, false);
}

} // namespace rollidx::risk
