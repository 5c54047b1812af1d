#include "rollidx/mc/correlation.hpp"

#include "rollidx/core/errors.hpp"

#include <cmath>

namespace rollidx::mc {

Matrix futures_correlation(double beta, const std::vector<double>& maturity_times) {
    if (beta < 0.0 || !std::isfinite(beta))
        throw ValidationError("futures_correlation: beta must be finite and non-negative");
    if (maturity_times.empty())
        throw ValidationError("futures_correlation: need at least one maturity");
    const std::size_t m = maturity_times.size();
    Matrix r(m, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            r[i][j] = std::exp(-beta * std::abs(maturity_times[i] - maturity_times[j]));
    return r;
}

Matrix joint_price_variance_correlation(const Matrix& r, double rho_fv) {
    if (!(rho_fv >= -1.0 && rho_fv <= 1.0))
        throw ValidationError("joint correlation: rho must lie in [-1, 1]");
    const std::size_t m = r.size();
    Matrix full(2 * m, std::vector<double>(2 * m));
    const double rho2 = rho_fv * rho_fv;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            full[i][j] = r[i][j];
            full[i][m + j] = rho_fv * r[i][j];
            full[m + i][j] = rho_fv * r[i][j];
            full[m + i][m + j] = rho2 * r[i][j] + (i == j ? 1.0 - rho2 : 0.0);
        }
    }
    return full;
}

Matrix cholesky_lower(const Matrix& m) {
    const std::size_t n = m.size();
    if (n == 0) throw ValidationError("cholesky: empty matrix");
    for (const auto& row : m)
        if (row.size() != n) throw ValidationError("cholesky: matrix must be square");

    // Semi-definite variant: perfectly correlated shocks (beta = 0, or
    // |rho| = 1 in the joint matrix) give legitimate zero pivots, so those
    // columns are zeroed instead of rejected.  Only a genuinely negative
    // pivot - or mass left against a zero pivot - means "not a correlation
    // matrix" and throws.
    const double tol = 1e-10;
    Matrix l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                if (s < -tol)
                    throw NumericalError("cholesky: matrix is not positive semi-definite "
                                         "(pivot " + std::to_string(s) + " at row " +
                                         std::to_string(i) + ")");
                l[i][i] = s > tol ? std::sqrt(s) : 0.0;
            } else if (l[j][j] > 0.0) {
                l[i][j] = s / l[j][j];
            } else {
                if (std::abs(s) > tol)
                    throw NumericalError("cholesky: matrix is not positive semi-definite "
                                         "(residual " + std::to_string(s) +
                                         " against a zero pivot at row " + std::to_string(i) +
                                         ")");
                l[i][j] = 0.0;
            }
        }
    }
    return l;
}

} // namespace rollidx::mc
