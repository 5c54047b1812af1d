#include "rollidx/market/snapshot.hpp"

#include "rollidx/core/csv.hpp"
#include "rollidx/core/errors.hpp"

#include <algorithm>
#include <map>

namespace rollidx::market {

const VolSurface& MarketSnapshot::futures_vol(std::size_t maturity_index) const {
    if (maturity_index >= futures_vols.size())
        throw ValidationError("no futures vol surface for maturity index " +
                              std::to_string(maturity_index));
    return futures_vols[maturity_index];
}

MarketSnapshot MarketSnapshot::with_futures_curve(FuturesCurve bumped) const {
    MarketSnapshot out = *this;
    out.futures = std::move(bumped);
    return out;
}

MarketSnapshot MarketSnapshot::with_futures_vols_bumped(double abs_bump) const {
    MarketSnapshot out = *this;
    for (auto& surface : out.futures_vols)
        if (!surface.empty()) surface = surface.bumped(abs_bump);
    return out;
}

MarketSnapshot MarketSnapshot::with_futures_vol_bumped(std::size_t maturity_index,
                                                       double abs_bump) const {
    MarketSnapshot out = *this;
    if (maturity_index >= out.futures_vols.size())
        throw ValidationError("no futures vol surface for maturity index " +
                              std::to_string(maturity_index));
    out.futures_vols[maturity_index] = out.futures_vols[maturity_index].bumped(abs_bump);
    return out;
}

MarketSnapshot MarketSnapshot::with_index_vols(VolSurface target) const {
    MarketSnapshot out = *this;
    out.index_vols = std::move(target);
    return out;
}

MarketSnapshot load_market(Date reference, const MarketPaths& paths) {
    // Futures curve.
    const CsvTable curve_csv = read_csv(paths.futures_curve);
    const std::size_t c_mat = csv_column(curve_csv, "maturity");
    const std::size_t c_px = csv_column(curve_csv, "price");
    std::vector<Date> maturities;
    std::vector<double> prices;
    for (std::size_t r = 0; r < curve_csv.rows.size(); ++r) {
        maturities.push_back(Date::parse_iso(csv_string(curve_csv, r, c_mat)));
        prices.push_back(csv_double(curve_csv, r, c_px));
    }
    FuturesCurve futures(reference, std::move(maturities), std::move(prices));

    // Discount curve.
    const CsvTable disc_csv = read_csv(paths.discount);
    const std::size_t d_date = csv_column(disc_csv, "date");
    const std::size_t d_df = csv_column(disc_csv, "df");
    std::vector<Date> disc_dates;
    std::vector<double> dfs;
    for (std::size_t r = 0; r < disc_csv.rows.size(); ++r) {
        disc_dates.push_back(Date::parse_iso(csv_string(disc_csv, r, d_date)));
        dfs.push_back(csv_double(disc_csv, r, d_df));
    }
    DiscountCurve discount(reference, std::move(disc_dates), std::move(dfs));

    // Futures vol quotes, grouped by underlying maturity.
    const CsvTable fv_csv = read_csv(paths.vols_futures);
    const std::size_t f_mat = csv_column(fv_csv, "futures_maturity");
    const std::size_t f_exp = csv_column(fv_csv, "expiry");
    const std::size_t f_k = csv_column(fv_csv, "strike");
    const std::size_t f_vol = csv_column(fv_csv, "vol");
    std::map<Date, std::vector<VolQuote>> by_maturity;
    for (std::size_t r = 0; r < fv_csv.rows.size(); ++r) {
        const Date maturity = Date::parse_iso(csv_string(fv_csv, r, f_mat));
        const Date expiry = Date::parse_iso(csv_string(fv_csv, r, f_exp));
        const double strike = csv_double(fv_csv, r, f_k);
        const double vol = csv_double(fv_csv, r, f_vol);
        bool known = false;
        for (std::size_t i = 0; i < futures.size(); ++i) known |= (futures.maturity(i) == maturity);
        if (!known)
            throw ValidationError(paths.vols_futures + ":" +
                                  std::to_string(fv_csv.line_numbers[r]) +
                                  ": futures_maturity " + maturity.to_iso() + " not on the curve");
        if (expiry > maturity)
            throw ValidationError(paths.vols_futures + ":" +
                                  std::to_string(fv_csv.line_numbers[r]) + ": expiry " +
                                  expiry.to_iso() + " after futures maturity " + maturity.to_iso());
        by_maturity[maturity].push_back({expiry, strike, vol});
    }
    std::vector<VolSurface> futures_vols(futures.size());
    for (std::size_t i = 0; i < futures.size(); ++i) {
        const auto it = by_maturity.find(futures.maturity(i));
        if (it != by_maturity.end())
            futures_vols[i] = VolSurface(reference, it->second);
    }

    // Index smile (optional input).
    VolSurface index_vols;
    if (!paths.vols_index.empty()) {
        const CsvTable iv_csv = read_csv(paths.vols_index);
        const std::size_t i_exp = csv_column(iv_csv, "expiry");
        const std::size_t i_k = csv_column(iv_csv, "strike");
        const std::size_t i_vol = csv_column(iv_csv, "vol");
        std::vector<VolQuote> quotes;
        for (std::size_t r = 0; r < iv_csv.rows.size(); ++r)
            quotes.push_back({Date::parse_iso(csv_string(iv_csv, r, i_exp)),
                              csv_double(iv_csv, r, i_k), csv_double(iv_csv, r, i_vol)});
        index_vols = VolSurface(reference, std::move(quotes));
    }

    return MarketSnapshot{reference, std::move(futures), std::move(discount),
                          std::move(futures_vols), std::move(index_vols)};
}

std::string serialize_futures_curve(const FuturesCurve& curve) {
    std::string out = "maturity,price\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        out += curve.maturity(i).to_iso() + "," + format_double(curve.price(i)) + "\n";
    return out;
}

std::string serialize_discount(const DiscountCurve& curve) {
    std::string out = "date,df\n";
    for (std::size_t i = 0; i < curve.dates().size(); ++i)
        out += curve.dates()[i].to_iso() + "," + format_double(curve.dfs()[i]) + "\n";
    return out;
}

std::string serialize_futures_vols(const FuturesCurve& curve,
                                   const std::vector<VolSurface>& surfaces) {
    std::string out = "futures_maturity,expiry,strike,vol\n";
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        if (surfaces[i].empty()) continue;
        for (const VolQuote& q : surfaces[i].quotes())
            out += curve.maturity(i).to_iso() + "," + q.expiry.to_iso() + "," +
                   format_double(q.strike) + "," + format_double(q.vol) + "\n";
    }
    return out;
}

std::string serialize_index_vols(const VolSurface& surface) {
    std::string out = "expiry,strike,vol\n";
    if (!surface.empty())
        for (const VolQuote& q : surface.quotes())
            out += q.expiry.to_iso() + "," + format_double(q.strike) + "," +
                   format_double(q.vol) + "\n";
    return out;
}

} // namespace rollidx::market
