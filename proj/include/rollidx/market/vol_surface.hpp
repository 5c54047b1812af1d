#pragma once

#include "rollidx/core/dates.hpp"

#include <vector>

namespace rollidx::market {

struct VolQuote {
    Date expiry;
    double strike;
    double vol; // Black-76 implied, absolute (0.20 = 20%)
};

// Implied-vol surface for one underlying (a futures contract or the index).
// Quotes are stored per expiry slice; lookups interpolate linearly in strike
// within a slice, linearly in total variance sigma^2 * T across expiries at
// fixed strike, and extrapolate flat in both directions.
class VolSurface {
public:
    VolSurface() = default;
    VolSurface(Date reference, std::vector<VolQuote> quotes);

    Date reference() const noexcept { return reference_; }
    bool empty() const noexcept { return expiries_.empty(); }
    const std::vector<Date>& expiries() const noexcept { return expiries_; }
    const std::vector<VolQuote>& quotes() const noexcept { return quotes_; }

    // Quotes of one expiry slice, ascending in strike.
    std::vector<VolQuote> slice(Date expiry) const;

    double vol(Date expiry, double strike) const;
    double vol(double expiry_yf, double strike) const;

    // Copy with every quote shifted by an absolute vol amount.
    VolSurface bumped(double abs_vol_bump) const;

private:
    double slice_vol(std::size_t slice_index, double strike) const;

    Date reference_;
    std::vector<VolQuote> quotes_;       // sorted by (expiry, strike)
    std::vector<Date> expiries_;         // distinct, ascending
    std::vector<double> expiry_times_;   // ACT/365F from reference
    std::vector<std::size_t> slice_begin_; // quotes_ offsets, size expiries_+1
};

} // namespace rollidx::market
