#include "rollidx/calib/heston.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>

#include "rollidx/core/errors.hpp"
#include "rollidx/market/black76.hpp"

namespace rollidx::calib {
namespace {

using cplx = std::complex<double>;

void validate(double forward, double expiry, const HestonParams& p, double df) {
    if (!(forward > 0.0)) throw ValidationError("heston: forward must be positive");
    if (!(expiry >= 0.0)) throw ValidationError("heston: expiry must be non-negative");
    if (!(df > 0.0)) throw ValidationError("heston: discount factor must be positive");
    if (!(p.kappa > 0.0)) throw ValidationError("heston: kappa must be positive");
    if (!(p.theta >= 0.0)) throw ValidationError("heston: theta must be non-negative");
    if (!(p.chi >= 0.0)) throw ValidationError("heston: chi must be non-negative");
    if (!(p.v0 >= 0.0)) throw ValidationError("heston: v0 must be non-negative");
    if (!(p.rho >= -1.0 && p.rho <= 1.0))
        throw ValidationError("heston: rho must lie in [-1, 1]");
}

// Characteristic-function pair f_1, f_2 evaluated once per abscissa and
// shared across every strike of the expiry.  Uses the formulation that keeps
// the complex logarithm on its principal branch for all maturities.
struct CfPair {
    const HestonParams& p;
    double expiry;
    double log_forward;
    std::map<double, std::array<cplx, 2>> memo;

    std::array<cplx, 2> operator()(double u) {
        auto it = memo.find(u);
        if (it != memo.end()) return it->second;

        const cplx iu(0.0, u);
        const double chi2 = p.chi * p.chi;
        std::array<cplx, 2> f;
        for (int j = 0; j < 2; ++j) {
            const double uj = (j == 0) ? 0.5 : -0.5;
            const double b = (j == 0) ? p.kappa - p.rho * p.chi : p.kappa;
            const cplx e = p.rho * p.chi * iu - b; // -(b - i rho chi u)
            const cplx x = 2.0 * uj * iu - u * u;
            const cplx d = std::sqrt(e * e - chi2 * x);
            // b - i rho chi u - d cancels catastrophically for small chi when
            // formed by subtraction; (e^2 - d^2) / (-e + d) is exact algebra
            // and stays well conditioned because Re(-e + d) never vanishes.
            const cplx den = -e + d;
            const cplx ratio = x / den; // (b - i rho chi u - d) / chi^2
            const cplx c = chi2 * ratio / den;
            const cplx ed = std::exp(-d * expiry);
            const cplx big_d = ratio * (1.0 - ed) / (1.0 - c * ed);
            // log((1 - c ed)/(1 - c)) / chi^2 = log(1 + z) / chi^2: the direct
            // log also loses every digit as chi -> 0, so expand when z is tiny.
            const cplx z = c * (1.0 - ed) / (1.0 - c);
            cplx log_term;
            if (std::abs(z) < 1e-4) {
                const cplx z_over_chi2 = ratio * (1.0 - ed) / ((1.0 - c) * den);
                log_term = z_over_chi2 * (1.0 - z * (0.5 - z / 3.0));
            } else {
                log_term = std::log((1.0 - c * ed) / (1.0 - c)) / chi2;
            }
            const cplx big_c = p.kappa * p.theta * (ratio * expiry - 2.0 * log_term);
            f[j] = std::exp(big_c + big_d * p.v0 + iu * log_forward);
        }
        memo.emplace(u, f);
        return f;
    }
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(F& g, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = g(lm);
    const double frm = g(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    // The relative floor keeps residual evaluation noise in the integrand
    // from forcing the recursion to full depth: refining past it only chases
    // roundoff.
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol ||
        std::abs(delta) <= 1e-15 * (1.0 + std::abs(left) + std::abs(right)))
        return left + right + delta / 15.0;
    return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate_panel(F& g, double a, double b, double tol) {
    const double fa = g(a);
    const double m = 0.5 * (a + b);
    const double fm = g(m);
    const double fb = g(b);
    return adaptive_simpson(g, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 20);
}

constexpr double kUStart = 1e-3;  // integrand is finite at 0+ but cancels badly below this
constexpr double kUMax = 1024.0;  // transform tail cap; slower decay falls back to Black

// Gil-Pelaez tail probability P_j = 1/2 + (1/pi) int_0^inf Re(e^{-iux} f_j / (iu)) du.
double tail_probability(CfPair& cf, int j, double log_strike, bool& converged) {
    auto g = [&](double u) {
        const cplx f = cf(u)[j];
        const cplx val = std::exp(cplx(0.0, -u * log_strike)) * f / cplx(0.0, u);
        const double re = val.real();
        return std::isfinite(re) ? re : 0.0;
    };

    // [0, kUStart] by midpoint: g extends continuously to u = 0.
    double total = kUStart * g(0.5 * kUStart);
    double lo = kUStart;
    double hi = 1.0;
    int quiet = 0;
    bool tail_done = false;
    while (lo < kUMax) {
        const double piece = integrate_panel(g, lo, hi, 1e-12);
        total += piece;
        if (std::abs(piece) < 1e-13 * (1.0 + std::abs(total))) {
            if (++quiet >= 2) {
                tail_done = true;
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        hi = std::min(2.0 * hi, kUMax);
    }
    if (!tail_done) converged = false;
    return 0.5 + total / M_PI;
}

double black_with_integrated_variance(double forward, double strike, double expiry,
                                      const HestonParams& p, double df) {
    const double w = std::max(heston_integrated_variance(p, expiry), 0.0);
    const double vol = expiry > 0.0 ? std::sqrt(w / expiry) : 0.0;
    return market::black76_call(forward, strike, vol, expiry, df);
}

} // namespace

double heston_integrated_variance(const HestonParams& p, double expiry) {
    if (!(p.kappa > 0.0)) throw ValidationError("heston: kappa must be positive");
    if (!(expiry >= 0.0)) throw ValidationError("heston: expiry must be non-negative");
    return p.theta * expiry + (p.v0 - p.theta) * (1.0 - std::exp(-p.kappa * expiry)) / p.kappa;
}

std::vector<double> heston_calls(double forward, const std::vector<double>& strikes, double expiry,
                                 const HestonParams& p, double df, bool* cf_converged) {
    validate(forward, expiry, p, df);
    for (double k : strikes)
        if (!(k > 0.0)) throw ValidationError("heston: strikes must be positive");
    if (cf_converged != nullptr) *cf_converged = true;

    std::vector<double> prices(strikes.size());
    const double w = heston_integrated_variance(p, expiry);
    const bool degenerate = expiry <= 0.0 || p.chi < 1e-8 || w < 1e-10;

    CfPair cf{p, expiry, std::log(forward), {}};
    for (std::size_t i = 0; i < strikes.size(); ++i) {
        const double strike = strikes[i];
        double price;
        if (degenerate) {
            price = black_with_integrated_variance(forward, strike, expiry, p, df);
        } else {
            bool ok = true;
            const double x = std::log(strike);
            const double p1 = tail_probability(cf, 0, x, ok);
            const double p2 = tail_probability(cf, 1, x, ok);
            if (ok) {
                price = df * (forward * p1 - strike * p2);
            } else {
                // Transform tail would not converge by kUMax; price the moment-
                // matched lognormal instead of returning a truncated integral.
                price = black_with_integrated_variance(forward, strike, expiry, p, df);
                if (cf_converged != nullptr) *cf_converged = false;
            }
        }
        const double intrinsic = std::max(df * (forward - strike), 0.0);
        prices[i] = std::min(std::max(price, intrinsic), df * forward);
    }
    return prices;
}

double heston_call(double forward, double strike, double expiry, const HestonParams& p, double df,
                   bool* cf_converged) {
    return heston_calls(forward, {strike}, expiry, p, df, cf_converged)[0];
}

} // namespace rollidx::calib
