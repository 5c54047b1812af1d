#pragma once

#include <optional>
#include <vector>

#include "rollidx/calib/heston.hpp"
#include "rollidx/lvcalib/lv_calibration.hpp"
#include "rollidx/market/snapshot.hpp"
#include "rollidx/mc/engine.hpp"
#include "rollidx/opt/optimizers.hpp"

namespace rollidx::calib {

// One index-option quote repriced by a model: price (Monte Carlo mean or
// semi-analytic), its standard error, and the Black-76 vols on both sides.
struct IndexVolFit {
    Date expiry;
    double strike = 0.0;
    double market_vol = 0.0;
    double model_price = 0.0;
    double price_std_error = 0.0; // 0 for semi-analytic prices
    double model_vol = 0.0;       // NaN when the price pins an arbitrage bound
    double vol_std_error = 0.0;   // price SE / Black vega; NaN alongside model_vol
    bool usable = false;
};

// Black-76 vols of simulated index marginals at the quoted points.  The
// simulation must have recorded the index at every distinct quote expiry;
// prices are undiscounted means E[(I_T - K)^+] scaled by the discount factor
// of the expiry and inverted with that same factor.
std::vector<IndexVolFit> index_vol_fits(const mc::SimResult& sim, const market::VolSurface& quotes,
                                        const market::DiscountCurve& discount, Date reference,
                                        double index_level);

// Reprices index quotes under the curve-level model (simulating the whole
// futures curve and replicating the rolling index) or under the index-level
// model.  The grid runs from the snapshot reference to the later of the last
// quote expiry and `horizon`; every quote expiry must be a business day.
std::vector<IndexVolFit> micro_index_vols(const market::MarketSnapshot& snapshot,
                                          double index_level, const mc::MicroParams& params,
                                          const pde::LocalVolGrid& spot_lv,
                                          const market::VolSurface& quotes,
                                          const mc::SimOptions& options,
                                          std::optional<Date> horizon = {});

std::vector<IndexVolFit> macro_index_vols(Date reference, const market::DiscountCurve& discount,
                                          double index_level, const mc::MacroParams& params,
                                          const pde::LocalVolGrid& index_lv,
                                          const market::VolSurface& quotes,
                                          const mc::SimOptions& options,
                                          std::optional<Date> horizon = {});

// ---------------------------------------------------------------------------
// Curve-level ("micro") calibration: pick {a, beta, chi, rho_fv} so the
// simulated rolling index reprices the index smile.  kappa, theta and v0 are
// pinned to 1 (the variance process starts on its stationary level; leverage
// absorbs the overall scale).  Every objective evaluation recalibrates the
// factor local vol to the futures smiles at the trial a, simulates with
// common random numbers (same seed, paths and grid), and sums absolute
// implied-vol errors; quotes the model cannot reprice inside the arbitrage
// band each add a fixed unit penalty.
// ---------------------------------------------------------------------------

struct MicroCalibOptions {
    opt::HybridOptions optimizer;
    std::size_t paths = 10000;        // per objective evaluation
    std::uint64_t seed = 7;           // common random numbers across evaluations
    lvcalib::LvCalibOptions lv;       // factor local-vol fit at each trial a
    mc::ParticleOptions particle;
    opt::Bounds bounds;               // {a, beta, chi, rho_fv}
    std::optional<Date> leverage_horizon; // extend the final frozen grid

    MicroCalibOptions() {
        optimizer.global.max_evaluations = 300;
        optimizer.global.seed = 17;
        optimizer.local.max_evaluations = 200;
        bounds.lower = {0.01, 0.01, 0.01, -1.0};
        bounds.upper = {2.0, 2.0, 1.4, 1.0};
    }
};

struct MicroCalibResult {
    mc::MicroParams params;
    double objective = 0.0;           // sum |market - model| vol + unit penalties
    std::vector<IndexVolFit> fits;    // at the optimum
    std::vector<bool> at_lower, at_upper; // per coordinate {a, beta, chi, rho_fv}
    double feller_ratio = 0.0;        // 2 kappa theta / chi^2, diagnostic only
    opt::HybridReport search;
    lvcalib::LvCalibResult spot_lv;   // factor local vol at the optimal a
    mc::ConditionalVarianceSurface leverage; // frozen at the optimum
    std::vector<Date> grid;           // grid the surface is frozen on
};

MicroCalibResult calibrate_micro(const market::MarketSnapshot& snapshot, double index_level,
                                 const MicroCalibOptions& options = {});

// ---------------------------------------------------------------------------
// Index-level ("macro") calibration, three stages: (1) fit the square-root
// variance parameters {theta, chi, rho, v0} to the index smile with the
// semi-analytic pricer (kappa pinned to 1), (2) fit the index local vol to
// the same smile, (3) simulate the combined dynamics once with the particle
// estimator and freeze the conditional-variance surface for pricing runs.
// ---------------------------------------------------------------------------

struct MacroCalibOptions {
    opt::HybridOptions optimizer;     // stage 1; evaluations are cheap
    lvcalib::LvCalibOptions lv;       // stage 2
    std::size_t paths = 50000;        // stage 3 freeze run
    std::uint64_t seed = 11;
    mc::ParticleOptions particle;
    opt::Bounds bounds;               // {theta, chi, rho, v0}
    std::optional<Date> leverage_horizon;

    MacroCalibOptions() {
        optimizer.global.max_evaluations = 4000;
        optimizer.global.seed = 23;
        optimizer.local.max_evaluations = 2000;
        bounds.lower = {1e-4, 0.01, -1.0, 1e-4};
        bounds.upper = {1.0, 1.4, 1.0, 1.0};
    }
};

struct MacroCalibResult {
    mc::MacroParams params;
    double sv_objective = 0.0;        // stage 1 objective at the optimum
    std::vector<IndexVolFit> sv_fits; // semi-analytic repricing (SE fields 0)
    std::vector<IndexVolFit> slv_fits; // stage 3 simulated repricing
    std::vector<bool> at_lower, at_upper; // per coordinate {theta, chi, rho, v0}
    double feller_ratio = 0.0;        // 2 theta / chi^2, diagnostic only
    opt::HybridReport search;
    lvcalib::LvCalibResult index_lv;  // stage 2
    mc::ConditionalVarianceSurface leverage; // stage 3
    std::vector<Date> grid;
};

MacroCalibResult calibrate_macro(const market::MarketSnapshot& snapshot, double index_level,
                                 const MacroCalibOptions& options = {});

} // namespace rollidx::calib
