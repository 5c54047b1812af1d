#pragma once

#include "rollidx/market/snapshot.hpp"
#include "rollidx/pde/dupire.hpp"

#include <vector>

namespace rollidx::lvcalib {

// The whole futures curve is driven by one mean-reverting factor s with
// s_0 = 1:  F_t(T) = F_0(T) (1 - (1 - s_t) e^{-a(T-t)}).  Ito gives a
// driftless futures price with absolute diffusion coefficient
//
//   sigma_F(t, T, F) = (F - F_0(T)(1 - e^{-a(T-t)})) * L_s(t, k_F(t, T, F))
//
// where the normalized coordinate k_F inverts the curve mapping.  Futures
// calls collapse onto the factor's normalized call surface c(t, k):
//
//   C(T_o, T, K) = P(T_o) F_0(T) e^{-a(T - T_o)} c(T_o, k_F(T_o, T, K)).
//
// a = 0 recovers the plain driftless case used for the index itself.

// k_F(t, T, K) = 1 - e^{a(T-t)} (1 - K / F_0(T)).
double effective_strike(double a, double t, double maturity_time, double strike, double f0);

// Absolute diffusion coefficient above, floored at a tiny positive value so
// Euler steps that leave the factor's natural domain cannot pick up a
// negative volatility.
double futures_local_vol(double a, double t, double maturity_time, double f, double f0,
                         const pde::LocalVolGrid& spot_lv);

// Undiscounted futures call E[(F_{t}(T) - K)^+] read off a factor PDE sweep.
double futures_call_from_pde(const pde::PdeSolution& sol, double a, double t,
                             double maturity_time, double strike, double f0);

struct LvCalibOptions {
    std::size_t space_nodes = 400;   // uniform nodes on [0, k_max]
    double k_max = 3.0;
    int max_iterations = 50;
    double vol_tolerance = 1e-4;     // max |model - market| implied vol
    double max_update_factor = 2.0;  // per-iteration multiplicative clamp
    double vega_floor = 1e-8;        // quotes below this vega are not fitted
};

struct QuoteFit {
    std::size_t maturity = 0;  // curve index (0 for the index itself)
    double expiry_time = 0.0;  // ACT/365F
    double strike = 0.0;       // original units
    double normalized_strike = 0.0;
    double market_vol = 0.0;
    double model_vol = 0.0;
};

struct LvCalibResult {
    pde::LocalVolGrid lv;      // calibrated factor local vol
    pde::PdeSolution pde;      // final sweep, daily time grid
    std::vector<QuoteFit> fits;
    double worst_vol_error = 0.0;
    int iterations = 0;        // PDE sweeps performed
};

// Fits the shared factor local vol to every futures smile in the snapshot:
// solve the forward PDE, imply model vols at the quotes, scale the lattice
// by market/model vol ratios (linear in the normalized strike per expiry,
// flat beyond the quoted range), repeat until every quote is matched to
// vol_tolerance.  Throws ConvergenceError with the worst residual if the
// iteration budget runs out.
LvCalibResult calibrate_spot_lv(const market::MarketSnapshot& snapshot, double a,
                                const LvCalibOptions& options = {});

// Same fixed point for the index smile (driftless, unit mean-reversion-free
// factor): quotes are struck on the index itself with forward index_level.
LvCalibResult calibrate_index_lv(Date reference, const market::VolSurface& index_vols,
                                 double index_level, const market::DiscountCurve& discount,
                                 const LvCalibOptions& options = {});

} // namespace rollidx::lvcalib
