#include "rollidx/market/vol_surface.hpp"

#include "rollidx/core/csv.hpp"
#include "rollidx/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rollidx::market {

VolSurface::VolSurface(Date reference, std::vector<VolQuote> quotes)
    : reference_(reference), quotes_(std::move(quotes)) {
    if (quotes_.empty())
        throw ValidationError("vol surface: no quotes");
    std::stable_sort(quotes_.begin(), quotes_.end(), [](const VolQuote& a, const VolQuote& b) {
        if (a.expiry != b.expiry) return a.expiry < b.expiry;
        return a.strike < b.strike;
    });
    for (std::size_t i = 0; i < quotes_.size(); ++i) {
        const VolQuote& q = quotes_[i];
        if (q.expiry <= reference_)
            throw ValidationError("vol surface: expiry " + q.expiry.to_iso() +
                                  " not after reference " + reference_.to_iso());
        if (!(q.strike > 0.0))
            throw ValidationError("vol surface: non-positive strike " + format_double(q.strike) +
                                  " at " + q.expiry.to_iso());
        if (!(q.vol > 0.0) || q.vol >= 5.0)
            throw ValidationError("vol surface: vol " + format_double(q.vol) + " at " +
                                  q.expiry.to_iso() + " outside (0, 5)");
        if (i > 0 && quotes_[i - 1].expiry == q.expiry && quotes_[i - 1].strike == q.strike)
            throw ValidationError("vol surface: duplicate quote at expiry " + q.expiry.to_iso() +
                                  " strike " + format_double(q.strike));
    }
    slice_begin_.push_back(0);
    for (std::size_t i = 0; i < quotes_.size(); ++i) {
        if (expiries_.empty() || quotes_[i].expiry != expiries_.back()) {
            expiries_.push_back(quotes_[i].expiry);
            expiry_times_.push_back(year_fraction(reference_, quotes_[i].expiry));
            if (i > 0) slice_begin_.push_back(i);
        }
    }
    slice_begin_.push_back(quotes_.size());
}

std::vector<VolQuote> VolSurface::slice(Date expiry) const {
    for (std::size_t s = 0; s < expiries_.size(); ++s)
        if (expiries_[s] == expiry)
            return {quotes_.begin() + slice_begin_[s], quotes_.begin() + slice_begin_[s + 1]};
    throw ValidationError("vol surface: no slice at expiry " + expiry.to_iso());
}

double VolSurface::slice_vol(std::size_t s, double strike) const {
    const std::size_t begin = slice_begin_[s];
    const std::size_t end = slice_begin_[s + 1];
    if (strike <= quotes_[begin].strike) return quotes_[begin].vol;      // flat left
    if (strike >= quotes_[end - 1].strike) return quotes_[end - 1].vol;  // flat right
    for (std::size_t i = begin + 1; i < end; ++i) {
        if (strike <= quotes_[i].strike) {
            const double k0 = quotes_[i - 1].strike, k1 = quotes_[i].strike;
            const double w = (strike - k0) / (k1 - k0);
            return quotes_[i - 1].vol + w * (quotes_[i].vol - quotes_[i - 1].vol);
        }
    }
    return quotes_[end - 1].vol; // unreachable
}

double VolSurface::vol(Date expiry, double strike) const {
    return vol(year_fraction(reference_, expiry), strike);
}

double VolSurface::vol(double t, double strike) const {
    if (empty()) throw ValidationError("vol surface: empty");
    if (!(t > 0.0))
        throw ValidationError("vol surface: query expiry must be after reference");
    // Flat in vol outside the quoted expiry range, linear in total variance
    // sigma^2 * T between quoted expiries.
    if (t <= expiry_times_.front()) return slice_vol(0, strike);
    if (t >= expiry_times_.back()) return slice_vol(expiries_.size() - 1, strike);
    std::size_t hi = 1;
    while (expiry_times_[hi] < t) ++hi;
    const std::size_t lo = hi - 1;
    const double v_lo = slice_vol(lo, strike);
    const double v_hi = slice_vol(hi, strike);
    const double w = (t - expiry_times_[lo]) / (expiry_times_[hi] - expiry_times_[lo]);
    const double total_var = (1.0 - w) * v_lo * v_lo * expiry_times_[lo] +
                             w * v_hi * v_hi * expiry_times_[hi];
    return std::sqrt(std::max(total_var, 0.0) / t);
}

VolSurface VolSurface::bumped(double abs_vol_bump) const {
    std::vector<VolQuote> quotes = quotes_;
    for (auto& q : quotes) q.vol += abs_vol_bump;
    return VolSurface(reference_, std::move(quotes));
}

} // namespace rollidx::market
