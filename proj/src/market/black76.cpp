#include "rollidx/market/black76.hpp"

#include "rollidx/core/csv.hpp"
#include "rollidx/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rollidx::market {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

void validate_black_inputs(double forward, double strike, double vol, double expiry, double df) {
    if (!(forward > 0.0)) throw ValidationError("black76: forward must be positive, got " + format_double(forward));
    if (!(strike >= 0.0)) throw ValidationError("black76: strike must be non-negative, got " + format_double(strike));
    if (!(vol >= 0.0)) throw ValidationError("black76: vol must be non-negative, got " + format_double(vol));
    if (!(expiry >= 0.0)) throw ValidationError("black76: expiry must be non-negative, got " + format_double(expiry));
    if (!(df > 0.0)) throw ValidationError("black76: discount factor must be positive, got " + format_double(df));
}

} // namespace

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double black76_call(double forward, double strike, double vol, double expiry, double df) {
    validate_black_inputs(forward, strike, vol, expiry, df);
    const double stddev = vol * std::sqrt(expiry);
    if (stddev <= 0.0 || strike == 0.0) return df * std::max(forward - strike, 0.0);
    const double d1 = std::log(forward / strike) / stddev + 0.5 * stddev;
    const double d2 = d1 - stddev;
    return df * (forward * normal_cdf(d1) - strike * normal_cdf(d2));
}

double black76_vega(double forward, double strike, double vol, double expiry, double df) {
    validate_black_inputs(forward, strike, vol, expiry, df);
    const double sqrt_t = std::sqrt(expiry);
    const double stddev = vol * sqrt_t;
    if (stddev <= 0.0 || strike == 0.0) return 0.0;
    const double d1 = std::log(forward / strike) / stddev + 0.5 * stddev;
    return df * forward * normal_pdf(d1) * sqrt_t;
}

bool black76_price_in_bounds(double price, double forward, double strike, double df) noexcept {
    const double intrinsic = df * std::max(forward - strike, 0.0);
    return price >= intrinsic && price < df * forward;
}

double implied_vol_black76(double price, double forward, double strike, double expiry, double df) {
    validate_black_inputs(forward, strike, 0.0, expiry, df);
    const double intrinsic = df * std::max(forward - strike, 0.0);
    const double upper = df * forward;
    if (price < intrinsic)
        throw NumericalError("implied vol: price " + format_double(price) +
                             " below intrinsic bound " + format_double(intrinsic));
    if (price >= upper)
        throw NumericalError("implied vol: price " + format_double(price) +
                             " at or above upper bound df*F = " + format_double(upper));
    if (price == intrinsic) return 0.0;
    if (!(expiry > 0.0))
        throw NumericalError("implied vol: non-intrinsic price at zero expiry");

    constexpr double kPriceTol = 1e-10;
    double lo = 0.0, hi = 1.0;
    while (black76_call(forward, strike, hi, expiry, df) < price) {
        hi *= 2.0;
        if (hi > 16.0)
            throw NumericalError("implied vol: price not attained below vol = 16");
    }
    // Bisection: price is monotone increasing in vol, so the bracket is safe.
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double value = black76_call(forward, strike, mid, expiry, df);
        if (std::abs(value - price) <= kPriceTol) return mid;
        (value < price ? lo : hi) = mid;
        if (hi - lo < 1e-16 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace rollidx::market
