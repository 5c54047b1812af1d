#pragma once

#include "rollidx/calib/model_calibration.hpp"
#include "rollidx/contracts/contracts.hpp"
#include "rollidx/lvcalib/lv_calibration.hpp"
#include "rollidx/market/snapshot.hpp"
#include "rollidx/mc/engine.hpp"

#include <cstddef>
#include <cstdint>

namespace rollidx::risk {

// Everything needed to reprice a contract under the curve-level model with a
// scenario applied: the market, the calibrated parameters and spot local
// vol, the frozen conditional-variance surface from the calibrating run, and
// the simulation recipe.  Delta scenarios replay the frozen surface; vega
// scenarios recalibrate the local vol and the leverage from scratch, which
// is why the particle and local-vol options ride along.
struct MicroPricing {
    market::MarketSnapshot snapshot;
    double index_level = 1.0;
    mc::MicroParams params;
    pde::LocalVolGrid spot_lv;
    mc::ConditionalVarianceSurface leverage;
    std::vector<Date> grid;
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    mc::ParticleOptions particle;
    lvcalib::LvCalibOptions lv;
};

// Index-level counterpart.  Vega scenarios rerun the staged macro
// calibration on a bumped surface, so those take the market snapshot and
// calibration options explicitly.
struct MacroPricing {
    Date reference;
    market::DiscountCurve discount;
    double index_level = 1.0;
    mc::MacroParams params;
    pde::LocalVolGrid index_lv;
    mc::ConditionalVarianceSurface leverage;
    std::vector<Date> grid;
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
};

struct DeltaOptions {
    double bump = 1e-7; // relative shift of the bumped level
    bool central = false;
};

// A bump-and-reprice sensitivity.  value/std_error come from pathwise
// differences under common random numbers, so a payoff that provably does
// not depend on the bumped input reports exactly zero with zero error.  The
// bump that was applied is echoed so non-default (larger) bumps are visible
// in any output built from this struct.
struct Sensitivity {
    double value = 0.0;
    double std_error = 0.0;
    double bump = 0.0;    // relative for deltas, absolute vol for vegas
    bool central = false;
    contracts::ContractPrice base;
    contracts::ContractPrice bumped;
};

// Price of the contract from one replay of the stored frozen leverage
// surface -- the exact run every sensitivity below differences against.
contracts::ContractPrice price_micro(const MicroPricing& pricing,
                                     const contracts::ContractSpec& contract);
contracts::ContractPrice price_macro(const MacroPricing& pricing,
                                     const contracts::ContractSpec& contract);

// Per-path discounted payoffs of that same replay.  Two pricing bundles that
// share seed, paths and grid can be differenced path by path, which is how
// the cross-model comparison forms its price moves.
std::vector<double> pathwise_micro(const MicroPricing& pricing,
                                   const contracts::ContractSpec& contract);
std::vector<double> pathwise_macro(const MacroPricing& pricing,
                                   const contracts::ContractSpec& contract);

// Analytic dIndex/dF(T_i) at the curve's reference date from the
// replication relation: the index holds quantity Q = I / basket of the
// basket, so the partial is Q on the front contract (alpha * Q and
// (1 - alpha) * Q on front and second inside a roll window) and zero on any
// other pillar.
double index_future_partial(const market::FuturesCurve& futures, double index_level,
                            std::size_t maturity_index);

// Forward-difference delta with respect to the futures pillar F_0(T_i),
// normalised by the bump size 1e-7 * F_0(T_i).  The bumped run shifts the
// pillar and, through the replication relation, the initial index level, and
// replays the frozen leverage under the same seed.
Sensitivity delta_futures(const MicroPricing& pricing, const contracts::ContractSpec& contract,
                          std::size_t maturity_index, const DeltaOptions& options = {});

// Same bump applied to the index level itself under the index-level model.
Sensitivity delta_index_macro(const MacroPricing& pricing,
                              const contracts::ContractSpec& contract,
                              const DeltaOptions& options = {});

// Chain rule mapping the front-futures delta onto an index delta:
// divide by dIndex/dF(T_1).  A zero partial leaves the delta undefined.
Sensitivity delta_index_from_micro(const Sensitivity& delta_front, double index_partial);

// Vega with respect to the maturity-T_i futures smile: +0.01 absolute on
// that smile only, full spot local-vol recalibration and a fresh particle
// (leverage) run under the same seed, difference divided by 0.01.
Sensitivity vega_futures(const MicroPricing& pricing, const contracts::ContractSpec& contract,
                         std::size_t maturity_index);

// Same recalibration applied to a +0.01 parallel shift of every futures
// smile at once -- the scenario the cross-model comparison differences.
Sensitivity vega_futures_all(const MicroPricing& pricing,
                             const contracts::ContractSpec& contract);

// Vega with respect to one expiry of the index smile under the index-level
// model: +0.01 absolute on that slice, the staged macro calibration rerun on
// the bumped surface (market.index_vols carries the unbumped quotes), and
// the contract repriced under the recalibrated model with the same seed.
// The recalibrated grid must match the pricing grid, so leverage horizons
// have to agree.
Sensitivity vega_index_macro(const MacroPricing& pricing,
                             const contracts::ContractSpec& contract,
                             const market::MarketSnapshot& market, Date expiry,
                             const calib::MacroCalibOptions& calib_options);

} // namespace rollidx::risk
