#pragma once

#include "rollidx/core/dates.hpp"
#include "rollidx/market/snapshot.hpp"
#include "rollidx/mc/particle.hpp"
#include "rollidx/pde/localvol_grid.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace rollidx::mc {

// Square-root variance process dv = kappa (theta - v) dt + chi sqrt(v) dW,
// discretized with full truncation: v may dip below zero between steps, but
// drift and diffusion only ever see v^+.
struct CirParams {
    double kappa = 1.0;
    double theta = 1.0;
    double chi = 0.0;
    double v0 = 1.0;
};

// Curve-level model: every futures price diffuses with the shared factor
// local vol, scaled by sqrt of its own variance process and divided by the
// particle estimate of E[v | price] so the curve marginals stay glued to the
// vanilla surface.  Price shocks correlate as exp(-beta |dT|); variance
// shocks reuse the price shocks' factors (see correlation.hpp) so the
// price-variance correlation is exactly rho_fv maturity by maturity.
struct MicroParams {
    double a = 0.0;      // factor mean reversion
    double beta = 0.0;   // curve decorrelation rate
    double rho_fv = 0.0; // price-variance correlation
    CirParams variance;
};

// Index-level model: one lognormal-style SLV diffusion for the index itself.
struct MacroParams {
    double rho = 0.0; // index-variance correlation
    CirParams variance;
};

// What to record while stepping.  Dates must sit on the simulation grid.
struct Observables {
    std::vector<Date> index_dates;
    // (observation date, curve maturity index); date must not pass maturity.
    std::vector<std::pair<Date, std::size_t>> futures_dates;
    bool track_extrema = false; // running min/max of the index level
    std::optional<Date> extrema_from, extrema_to; // default: whole grid
    bool record_final_variance = false; // variance state at the last grid date
};

// Per-step, per-asset conditional variance estimates.  Stored by the
// calibrating (particle) run and replayed verbatim by frozen runs, which is
// what makes bump scenarios reuse the leverage bit-identically.
struct ConditionalVarianceSurface {
    std::vector<Date> grid;
    std::vector<std::vector<ParticleEstimate>> per_step; // [step][asset]

    bool empty() const noexcept { return grid.empty(); }
};

enum class LeverageMode {
    pure_sv,  // leverage identically 1 (macro only; semi-closed-form checks)
    particle, // estimate E[v | price] live from the cross-section
    frozen,   // replay a stored surface
};

struct SimOptions {
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    LeverageMode mode = LeverageMode::particle;
    ParticleOptions particle;
    const ConditionalVarianceSurface* frozen = nullptr; // required in frozen mode
};

struct SimResult {
    std::vector<Date> grid;
    std::vector<Date> index_obs_dates;            // echoes Observables::index_dates
    std::vector<std::vector<double>> index_obs;   // [observation][path]
    std::vector<std::vector<double>> futures_obs; // [observation][path]
    std::vector<double> index_min, index_max;     // [path], when tracked
    std::vector<std::vector<double>> final_variance; // [asset][path], on request
    ConditionalVarianceSurface leverage;          // filled by particle mode
    long estimator_fallbacks = 0; // degenerate slices + floored nodes
    long degenerate_baskets = 0;  // index steps skipped on non-positive basket
};

// Simulates every live futures contract plus the replicated rolling index
// over the business-day grid (grid.front() must be the snapshot reference).
// The index path applies the same end-of-day roll schedule as the
// deterministic replay.
SimResult simulate_micro(const market::MarketSnapshot& snapshot, double index_level,
                         const MicroParams& params, const pde::LocalVolGrid& spot_lv,
                         const std::vector<Date>& grid, const Observables& observables,
                         const SimOptions& options);

// Simulates the index directly under its own SLV dynamics.
SimResult simulate_macro(Date reference, double index_level, const MacroParams& params,
                         const pde::LocalVolGrid& index_lv, const std::vector<Date>& grid,
                         const Observables& observables, const SimOptions& options);

} // namespace rollidx::mc
