#include "rollidx/market/curves.hpp"

#include "rollidx/core/csv.hpp"
#include "rollidx/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rollidx::market {

FuturesCurve::FuturesCurve(Date reference, std::vector<Date> maturities, std::vector<double> prices)
    : reference_(reference), maturities_(std::move(maturities)), prices_(std::move(prices)) {
    if (maturities_.empty())
        throw ValidationError("futures curve: no maturities");
    if (maturities_.size() != prices_.size())
        throw ValidationError("futures curve: " + std::to_string(maturities_.size()) +
                              " maturities vs " + std::to_string(prices_.size()) + " prices");
    for (std::size_t i = 0; i < maturities_.size(); ++i) {
        if (maturities_[i] <= reference_)
            throw ValidationError("futures curve: maturity " + maturities_[i].to_iso() +
                                  " not after reference " + reference_.to_iso());
        if (i > 0 && maturities_[i] <= maturities_[i - 1])
            throw ValidationError("futures curve: maturities not strictly increasing at " +
                                  maturities_[i].to_iso());
        if (!(prices_[i] > 0.0))
            throw ValidationError("futures curve: non-positive price " + format_double(prices_[i]) +
                                  " at " + maturities_[i].to_iso());
    }
}

std::size_t FuturesCurve::first_maturity_after(Date d) const {
    for (std::size_t i = 0; i < maturities_.size(); ++i)
        if (maturities_[i] > d) return i;
    throw ValidationError("futures curve: no contract matures after " + d.to_iso());
}

FuturesCurve FuturesCurve::bumped(std::size_t i, double rel_bump) const {
    std::vector<double> prices = prices_;
    prices.at(i) *= (1.0 + rel_bump);
    return FuturesCurve(reference_, maturities_, std::move(prices));
}

DiscountCurve::DiscountCurve(Date reference, std::vector<Date> dates, std::vector<double> dfs)
    : reference_(reference), dates_(std::move(dates)), dfs_(std::move(dfs)) {
    if (dates_.empty())
        throw ValidationError("discount curve: no pillars");
    if (dates_.size() != dfs_.size())
        throw ValidationError("discount curve: pillar/df count mismatch");
    double prev_df = 1.0;
    Date prev_date = reference_;
    for (std::size_t i = 0; i < dates_.size(); ++i) {
        if (dates_[i] <= prev_date)
            throw ValidationError("discount curve: pillar dates not strictly increasing after " +
                                  prev_date.to_iso());
        if (!(dfs_[i] > 0.0))
            throw ValidationError("discount curve: non-positive df at " + dates_[i].to_iso());
        if (dfs_[i] > prev_df + 1e-12)
            throw ValidationError("discount curve: df increases at " + dates_[i].to_iso() +
                                  " (negative implied rate beyond tolerance)");
        prev_df = dfs_[i];
        prev_date = dates_[i];
    }
    times_.reserve(dates_.size() + 1);
    log_dfs_.reserve(dates_.size() + 1);
    times_.push_back(0.0);
    log_dfs_.push_back(0.0); // P(reference) = 1 anchor
    for (std::size_t i = 0; i < dates_.size(); ++i) {
        times_.push_back(year_fraction(reference_, dates_[i]));
        log_dfs_.push_back(std::log(dfs_[i]));
    }
}

DiscountCurve DiscountCurve::flat(Date reference, double rate, Date horizon) {
    if (horizon <= reference)
        throw ValidationError("flat discount curve: horizon must be after reference");
    std::vector<Date> dates{horizon};
    std::vector<double> dfs{std::exp(-rate * year_fraction(reference, horizon))};
    return DiscountCurve(reference, std::move(dates), std::move(dfs));
}

double DiscountCurve::df(Date d) const { return df(year_fraction(reference_, d)); }

double DiscountCurve::df(double t) const {
    if (t < 0.0)
        throw ValidationError("discount curve: query before reference date");
    if (t == 0.0) return 1.0;
    // Log-linear between pillars; beyond the last pillar the final segment's
    // forward rate is extended.
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    if (hi >= times_.size()) hi = times_.size() - 1;
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return std::exp(log_dfs_[lo] + w * (log_dfs_[hi] - log_dfs_[lo]));
}

} // namespace rollidx::market
