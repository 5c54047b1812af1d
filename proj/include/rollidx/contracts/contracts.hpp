#pragma once

#include "rollidx/core/dates.hpp"
#include "rollidx/market/curves.hpp"
#include "rollidx/mc/engine.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rollidx::contracts {

// Every inclusive/exclusive barrier decision in this module goes through one
// of these predicates, so the conventions live in exactly one place:
//   - autocall / final-redemption / Athena triggers are inclusive (>=),
//   - survival is the strict complement (<),
//   - digital coupon conditions are strict (>),
//   - down-and-in breaches are inclusive (<=), with barrier == 0 meaning the
//     option is unconditionally knocked in (a plain vanilla); a literal
//     min <= 0 test would never fire on positive paths.
struct BarrierPolicy {
    static bool at_or_above(double level, double barrier) { return level >= barrier; }
    static bool survives(double level, double barrier) { return level < barrier; }
    static bool digital_pays(double level, double strike) { return level > strike; }
    static bool down_breach(double low, double barrier) {
        return barrier == 0.0 || low <= barrier;
    }
};

enum class CouponStyle { bullet, digital, snowball };

// Autocallable note on the index: on each observation date an alive contract
// pays its style coupon; at or above the barrier (before the last date) it
// additionally repays principal plus a rebate equal to that date's coupon and
// terminates; on the last date it redeems par at or above the final barrier
// and level / barrier below it.  Barrier and strike levels are absolute.
struct AutocallableSpec {
    std::vector<Date> dates;      // observation schedule, strictly increasing
    std::vector<double> barriers; // autocall barriers H_i; last entry is the final barrier
    std::vector<double> strikes;  // coupon strikes K_i (digital / snowball conditions)
    double coupon = 0.0;          // per-period coupon rate on unit notional
    CouponStyle style = CouponStyle::bullet;

    void validate() const;
};

// One-year certificate with a single six-month autocall observation: called
// at or above the initial level it redeems 1 + autocall_premium; otherwise a
// fallback coupon is paid at the observation date and maturity redeems
// 1 + participation * (performance - 1) above the initial level, par between
// the protection barrier and the initial level, and the raw performance
// below the barrier.  The barrier is a fraction of the initial level.
struct AthenaSpec {
    Date autocall_date;
    Date maturity;
    double autocall_premium = 0.05;
    double fallback_coupon = 0.025;
    double participation = 1.5;
    double protection_barrier = 0.7;

    void validate() const;
};

enum class OptionSide { put, call };

// Daily-monitored knock-in: a vanilla payoff at expiry that is alive only if
// the index touched the barrier (from above) on some monitoring day in
// [window_start, expiry].  Barrier and strike are absolute levels.
struct KnockInSpec {
    Date window_start;
    Date expiry;
    double barrier = 0.0; // 0 = unconditionally knocked in
    double strike = 1.0;
    OptionSide side = OptionSide::put;

    void validate() const;
};

using ContractSpec = std::variant<AutocallableSpec, AthenaSpec, KnockInSpec>;

// Non-owning view of simulated index paths: per-date cross-sections plus the
// optional running minima the engine tracks for barrier monitoring.  The
// simulation result (or whatever storage backs the spans) must outlive the
// bundle.
struct PathBundle {
    std::vector<Date> dates;                     // ascending observation dates
    std::vector<std::span<const double>> levels; // [date][path]
    std::span<const double> path_min;            // per-path minima, may be empty
    Date min_from, min_to;                       // span covered by path_min
    double initial_level = 1.0;

    std::size_t paths() const;
    bool has_observation(Date d) const;
    // Cross-section at d; throws ValidationError naming the date when the
    // bundle has no observation there.
    std::span<const double> at(Date d) const;
    // Structural consistency: sorted unique dates, equal-length
    // cross-sections, minima sized like the paths.  Called by the pricers.
    void validate() const;
};

// Views into a simulation result.  The overload taking the Observables used
// for the run records which date span the extrema actually cover; the plain
// overload assumes the whole grid.
PathBundle make_path_bundle(const mc::SimResult& sim, double initial_level);
PathBundle make_path_bundle(const mc::SimResult& sim, double initial_level,
                            const mc::Observables& observables);

// The observations a simulation must record so the given contract can be
// priced from its PathBundle (observation dates, plus extrema tracking over
// the monitoring window for knock-ins).
mc::Observables required_observables(const ContractSpec& spec);

struct ContractPrice {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
};

// One autocallable path, decomposed for tests and diagnostics: the contract
// ends exactly once, either by autocall (before the last date) or at
// maturity, and pv = coupon_pv + termination_pv.
struct AutocallOutcome {
    std::size_t termination_index = 0; // observation index where the contract ended
    bool autocalled = false;
    double coupon_pv = 0.0;      // coupons paid while alive, incl. the final date's
    double termination_pv = 0.0; // principal + rebate at autocall, redemption at maturity

    double pv() const { return coupon_pv + termination_pv; }
};

// levels and discounts are per observation date (same length as spec.dates).
AutocallOutcome evaluate_autocallable_path(const AutocallableSpec& spec,
                                           std::span<const double> levels,
                                           std::span<const double> discounts);

ContractPrice price_autocallable(const AutocallableSpec& spec, const PathBundle& paths,
                                 const market::DiscountCurve& discount);
ContractPrice price_athena(const AthenaSpec& spec, const PathBundle& paths,
                           const market::DiscountCurve& discount);
ContractPrice price_knock_in(const KnockInSpec& spec, const PathBundle& paths,
                             const market::DiscountCurve& discount);
ContractPrice price_contract(const ContractSpec& spec, const PathBundle& paths,
                             const market::DiscountCurve& discount);

// Per-path discounted cash-flows (the mean of which is the price).  Risk
// bumps difference these pathwise under common random numbers, so noise that
// is shared between base and bumped runs cancels before the error estimate.
std::vector<double> pathwise_present_values(const ContractSpec& spec, const PathBundle& paths,
                                            const market::DiscountCurve& discount);

struct ValueWithError {
    double value = 0.0;
    double std_error = 0.0;
};

struct RatioEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool reliable = false; // |denominator| >= 5 x its std error
    bool relevant = false; // reliable and |ratio| >= 0.5
};

// Normalised model difference (V_micro - V_macro) divided by each model's
// 1% vega-bump price move, with first-order error propagation.  A ratio with
// a denominator smaller than five of its standard errors is flagged
// unreliable and never relevant.
struct DifferenceRatio {
    RatioEstimate vs_macro_bump;
    RatioEstimate vs_micro_bump;
    bool relevant = false; // either ratio relevant
};

DifferenceRatio model_difference_ratio(ValueWithError micro_price, ValueWithError macro_price,
                                       ValueWithError micro_bump_move,
                                       ValueWithError macro_bump_move);

// JSON round trip for contract files:
//   {"type":"autocallable","style":"bullet","dates":[...],"barriers":[...],
//    "strikes":[...],"coupon":0.005}
//   {"type":"athena","dates":[call,maturity],"barriers":[0.7],"coupon":0.025,
//    "autocall_premium":0.05,"participation":1.5}
//   {"type":"knockin","style":"put","dates":[start,expiry],"barriers":[0.7],
//    "strikes":[1.0]}
// Dates are ISO strings.  Malformed input throws ValidationError.
ContractSpec parse_contract_json(const std::string& text);
ContractSpec load_contract(const std::string& path);
std::string contract_to_json(const ContractSpec& spec);

} // namespace rollidx::contracts
