#pragma once

#include <cstddef>
#include <vector>

namespace rollidx::mc {

using Matrix = std::vector<std::vector<double>>;

// Futures-futures correlation: exp(-beta |T_i - T_j|) over the curve's
// maturities (in years).  beta = 0 collapses to perfect correlation.
Matrix futures_correlation(double beta, const std::vector<double>& maturity_times);

// Joint correlation of the M price shocks and M variance shocks.  A naive
// choice - variance shocks correlated rho with their own price shock and
// nothing else - is not positive semi-definite once the price block is as
// tightly coupled as exp(-beta |dT|) makes it.  Instead the variance shocks
// share the price shocks' factor structure:
//
//   W_i^v = rho Z_i^F + sqrt(1 - rho^2) Z_i^perp,   Z^perp ~ same R, indep.
//
// which gives the Gram (always PSD) block form [[R, rho R], [rho R,
// rho^2 R + (1 - rho^2) I]] with exactly rho on the cross diagonal.
Matrix joint_price_variance_correlation(const Matrix& r, double rho_fv);

// Lower-triangular Cholesky factor.  Semi-definite inputs are accepted
// (perfect correlation has legitimate zero pivots); genuinely indefinite
// matrices throw NumericalError.
Matrix cholesky_lower(const Matrix& m);

} // namespace rollidx::mc
