#pragma once

#include "rollidx/core/dates.hpp"

#include <vector>

namespace rollidx::market {

// Futures curve: strictly increasing maturities with positive settlement
// prices, all strictly after the reference date.
class FuturesCurve {
public:
    FuturesCurve(Date reference, std::vector<Date> maturities, std::vector<double> prices);

    Date reference() const noexcept { return reference_; }
    std::size_t size() const noexcept { return maturities_.size(); }
    const std::vector<Date>& maturities() const noexcept { return maturities_; }
    const std::vector<double>& prices() const noexcept { return prices_; }

    Date maturity(std::size_t i) const { return maturities_.at(i); }
    double price(std::size_t i) const { return prices_.at(i); }

    // Index of the first maturity strictly after d; throws ValidationError
    // when the curve has run out of contracts.
    std::size_t first_maturity_after(Date d) const;

    // Copy with one pillar price scaled by (1 + rel_bump).
    FuturesCurve bumped(std::size_t i, double rel_bump) const;

private:
    Date reference_;
    std::vector<Date> maturities_;
    std::vector<double> prices_;
};

// Discount curve P(reference, t): pillar discount factors, log-linearly
// interpolated in ACT/365F time, P(reference) = 1, positive and
// non-increasing.  Queries beyond the last pillar extend its forward rate.
class DiscountCurve {
public:
    DiscountCurve(Date reference, std::vector<Date> dates, std::vector<double> dfs);

    // Flat curve P = exp(-rate * t), handy for tests and defaults.
    static DiscountCurve flat(Date reference, double rate, Date horizon);

    Date reference() const noexcept { return reference_; }
    const std::vector<Date>& dates() const noexcept { return dates_; }
    const std::vector<double>& dfs() const noexcept { return dfs_; }

    double df(Date d) const;
    double df(double year_frac) const;

private:
    Date reference_;
    std::vector<Date> dates_;
    std::vector<double> dfs_;
    std::vector<double> times_;
    std::vector<double> log_dfs_;
};

} // namespace rollidx::market
