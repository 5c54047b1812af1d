#pragma once

#include "rollidx/market/curves.hpp"
#include "rollidx/market/vol_surface.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rollidx::market {

// Full market snapshot as of one reference date: futures curve, discount
// curve, one futures vol surface per curve maturity, and the index smile.
struct MarketSnapshot {
    Date reference;
    FuturesCurve futures;
    DiscountCurve discount;
    std::vector<VolSurface> futures_vols; // aligned with futures.maturities()
    VolSurface index_vols;                // may be empty (micro-only work)

    const VolSurface& futures_vol(std::size_t maturity_index) const;

    // Copies with scenario shifts applied (leverage recalibration is the
    // caller's responsibility).
    MarketSnapshot with_futures_curve(FuturesCurve bumped) const;
    MarketSnapshot with_futures_vols_bumped(double abs_bump) const;                  // all smiles
    MarketSnapshot with_futures_vol_bumped(std::size_t maturity_index, double abs_bump) const;
    MarketSnapshot with_index_vols(VolSurface target) const;
};

struct MarketPaths {
    std::string futures_curve;  // maturity,price
    std::string discount;       // date,df
    std::string vols_futures;   // futures_maturity,expiry,strike,vol
    std::string vols_index;     // expiry,strike,vol (optional: empty path)
};

// Loads and cross-validates the four CSV inputs.  Every quote must reference
// a curve maturity, expire after the reference date and at or before its
// underlying's maturity; offending file/line is named in the error.
MarketSnapshot load_market(Date reference, const MarketPaths& paths);

// Serializers emitting the same schemas (shortest round-trip numbers, LF
// line endings) so parse -> serialize -> parse is the identity.
std::string serialize_futures_curve(const FuturesCurve& curve);
std::string serialize_discount(const DiscountCurve& curve);
std::string serialize_futures_vols(const FuturesCurve& curve,
                                   const std::vector<VolSurface>& surfaces);
std::string serialize_index_vols(const VolSurface& surface);

} // namespace rollidx::market
