#pragma once

namespace rollidx::market {

// Undiscounted standard normal CDF/PDF used by the Black-76 formulas.
double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;

// Black-76 call on a futures price: df * (F N(d1) - K N(d2)).
// Degenerate total volatility (sigma*sqrt(T) == 0) returns the discounted
// intrinsic value df * max(F - K, 0).
double black76_call(double forward, double strike, double vol, double expiry, double df);

// dPrice/dVol of the Black-76 call (absolute vol units).
double black76_vega(double forward, double strike, double vol, double expiry, double df);

// Inverts black76_call in the vol argument by bracketed bisection to an
// absolute price tolerance of 1e-10.  Prices at the intrinsic lower bound
// return exactly 0; prices outside [df*(F-K)^+, df*F) throw NumericalError
// naming the violated bound.
double implied_vol_black76(double price, double forward, double strike, double expiry, double df);

// True when price is attainable by some vol in [0, inf): within
// [df*(F-K)^+, df*F).  Used by calibration loops to route unattainable
// quotes to penalty handling instead of throwing.
bool black76_price_in_bounds(double price, double forward, double strike, double df) noexcept;

} // namespace rollidx::market
