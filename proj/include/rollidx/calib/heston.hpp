#pragma once

#include <vector>

namespace rollidx::calib {

// Driftless (forward-measure) square-root stochastic variance for the index:
//
//   dS = S sqrt(v) dW,   dv = kappa (theta - v) dt + chi sqrt(v) dZ,
//   d<W, Z> = rho dt,
//
// so S is a martingale with S_0 = forward.  Semi-analytic call prices feed
// the index-variance calibration before any leverage is layered on top.
struct HestonParams {
    double kappa = 1.0;
    double theta = 0.04;
    double chi = 0.0;
    double rho = 0.0;
    double v0 = 0.04;
};

// E[ integral_0^T v_t dt ] = theta T + (v0 - theta)(1 - e^{-kappa T})/kappa.
double heston_integrated_variance(const HestonParams& p, double expiry);

// Two-probability characteristic-function price (trap-free formulation,
// adaptive quadrature).  Degenerate vol-of-vol prices as Black with the
// integrated variance; so does the far corner where the transform tail
// decays too slowly to integrate (|rho| ~ 1 with chi far above the variance
// level) - `cf_converged`, when given, reports false there.  Results are
// clamped to the arbitrage band [df (F-K)^+, df F].
double heston_call(double forward, double strike, double expiry, const HestonParams& p,
                   double df, bool* cf_converged = nullptr);

// Same expiry, many strikes: characteristic-function evaluations are shared
// across strikes, which is what calibration objectives want.  cf_converged,
// when given, is the AND over strikes.
std::vector<double> heston_calls(double forward, const std::vector<double>& strikes,
                                 double expiry, const HestonParams& p, double df,
                                 bool* cf_converged = nullptr);

} // namespace rollidx::calib
