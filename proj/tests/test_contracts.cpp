#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rollidx/contracts/contracts.hpp"
#include "rollidx/core/errors.hpp"
#include "rollidx/core/parallel.hpp"
#include "rollidx/core/stats.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace rollidx;
using namespace rollidx::contracts;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

market::DiscountCurve flat_discount(Date reference, double rate) {
    return market::DiscountCurve::flat(reference, rate, reference + 3650);
}

// Wraps test-owned level storage ([date][path]) in a bundle of views.
PathBundle bundle_over(const std::vector<Date>& dates,
                       const std::vector<std::vector<double>>& levels, double initial = 1.0) {
    PathBundle bundle;
    bundle.dates = dates;
    for (const auto& cross_section : levels) bundle.levels.emplace_back(cross_section);
    bundle.initial_level = initial;
    return bundle;
}

// Nine monthly observations with barriers stepping down from 110% to 70% and
// coupon strikes trailing below them; the shape of a real one-year note.
AutocallableSpec nine_date_note(CouponStyle style) {
    AutocallableSpec spec;
    spec.dates = {Date(2020, 1, 17), Date(2020, 2, 17), Date(2020, 3, 17),
                  Date(2020, 4, 17), Date(2020, 5, 19), Date(2020, 6, 18),
                  Date(2020, 7, 17), Date(2020, 8, 17), Date(2020, 9, 16)};
    spec.barriers = {1.1, 1.1, 1.075, 1.075, 1.075, 1.025, 0.95, 0.85, 0.7};
    spec.strikes = {1.0, 1.0, 0.975, 0.95, 0.925, 0.875, 0.775, 0.675, 0.5};
    spec.coupon = 0.005;
    spec.style = style;
    return spec;
}

// Multiplicative random-walk paths across the given dates, wide enough to
// exercise autocall, coupon and downside branches.
std::vector<std::vector<double>> random_walk_levels(const std::vector<Date>& dates,
                                                    std::size_t paths, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> levels(dates.size(), std::vector<double>(paths));
    for (std::size_t p = 0; p < paths; ++p) {
        double level = 1.0;
        for (std::size_t i = 0; i < dates.size(); ++i) {
            level *= std::exp(0.25 * normal(gen) - 0.03125);
            levels[i][p] = level;
        }
    }
    return levels;
}

} // namespace

TEST_CASE("flat path autocalls on the first observation date") {
    const Date ref(2020, 1, 2);
    const auto discount = flat_discount(ref, 0.015);
    AutocallableSpec spec;
    spec.dates = {Date(2020, 2, 3), Date(2020, 3, 2), Date(2020, 4, 1)};
    spec.barriers = {0.9, 0.9, 0.9};
    spec.strikes = {0.5, 0.5, 0.5};
    spec.coupon = 0.02;
    spec.style = CouponStyle::bullet;

    const std::vector<std::vector<double>> levels(3, std::vector<double>{1.0});
    const auto bundle = bundle_over(spec.dates, levels);
    const auto price = price_autocallable(spec, bundle, discount);

    // Coupon, rebate of the same size, and principal, all at the first date.
    const double df1 = discount.df(spec.dates[0]);
    CHECK(price.value == df1 * spec.coupon + df1 * (spec.coupon + 1.0));
    CHECK(price.std_error == 0.0);
    CHECK(price.paths == 1);

    const std::vector<double> path{1.0, 1.0, 1.0};
    const std::vector<double> dfs{df1, discount.df(spec.dates[1]), discount.df(spec.dates[2])};
    const auto outcome = evaluate_autocallable_path(spec, path, dfs);
    CHECK(outcome.autocalled);
    CHECK(outcome.termination_index == 0);
    CHECK(outcome.coupon_pv == df1 * spec.coupon);
    CHECK(outcome.termination_pv == df1 * (spec.coupon + 1.0));
}

TEST_CASE("unreachable barriers and strikes leave only the final redemption") {
    const Date ref(2020, 1, 2);
    const auto discount = flat_discount(ref, 0.01);
    AutocallableSpec spec;
    spec.dates = {Date(2020, 2, 3), Date(2020, 3, 2), Date(2020, 4, 1)};
    spec.barriers = {kInf, kInf, kInf};
    spec.strikes = {kInf, kInf, kInf};
    spec.coupon = 0.02;
    spec.style = CouponStyle::digital;

    const std::vector<Date> dates = spec.dates;
    const auto levels = random_walk_levels(dates, 64, 11);
    const auto bundle = bundle_over(dates, levels);

    // No coupon can trigger and no autocall can fire, so each path pays only
    // the downside redemption S/H at maturity; with an infinite final
    // barrier that is exactly zero.
    const auto price = price_autocallable(spec, bundle, discount);
    CHECK(price.value == 0.0);

    // With a large finite final barrier the identity is S/H pathwise.
    AutocallableSpec finite = spec;
    finite.barriers = {1e9, 1e9, 1e9};
    finite.strikes = {1e9, 1e9, 1e9};
    const auto fp = price_autocallable(finite, bundle, discount);
    std::vector<double> expected(64);
    const double df = discount.df(dates.back());
    for (std::size_t p = 0; p < 64; ++p) expected[p] = df * (levels.back()[p] / 1e9);
    CHECK(fp.value == mean_std_error(expected).mean);
}

TEST_CASE("snowball coupon pays every period missed since the last hit") {
    const Date ref(2020, 1, 2);
    const auto discount = flat_discount(ref, 0.0);
    AutocallableSpec spec;
    spec.dates = {Date(2020, 2, 3), Date(2020, 3, 2), Date(2020, 4, 1), Date(2020, 5, 4)};
    spec.barriers = {1e9, 1e9, 1e9, 1e9};
    spec.strikes = {1.0, 1.0, 1.0, 1.0};
    spec.coupon = 0.01;
    spec.style = CouponStyle::snowball;
    const std::vector<double> dfs(4, 1.0);

    // Condition first met on the third date: three accumulated coupons.
    const auto once = evaluate_autocallable_path(spec, std::vector<double>{0.9, 0.95, 1.2, 0.9}, dfs);
    CHECK(once.coupon_pv == doctest::Approx(3 * spec.coupon).epsilon(1e-15));
    CHECK_FALSE(once.autocalled);
    CHECK(once.termination_index == 3);

    // Hits on the second and fourth dates: two coupons each time, since the
    // counter restarts after a hit.
    const auto twice = evaluate_autocallable_path(spec, std::vector<double>{0.9, 1.2, 0.9, 1.2}, dfs);
    CHECK(twice.coupon_pv == doctest::Approx(2 * spec.coupon + 2 * spec.coupon).epsilon(1e-15));

    // A path that never exceeds the strike accrues nothing.
    const auto never = evaluate_autocallable_path(spec, std::vector<double>{0.9, 0.9, 0.9, 0.9}, dfs);
    CHECK(never.coupon_pv == 0.0);
}

TEST_CASE("the autocall rebate equals the coupon actually earned that date") {
    AutocallableSpec spec;
    spec.dates = {Date(2020, 2, 3), Date(2020, 3, 2)};
    spec.barriers = {1.0, 1.0};
    spec.strikes = {1.0, 1.0};
    spec.coupon = 0.03;
    spec.style = CouponStyle::digital;
    const std::vector<double> dfs{1.0, 1.0};

    // At the barrier with a strict digital condition: the coupon is zero and
    // so is the rebate; only principal is repaid.
    const auto at_strike = evaluate_autocallable_path(spec, std::vector<double>{1.0, 0.5}, dfs);
    CHECK(at_strike.autocalled);
    CHECK(at_strike.coupon_pv == 0.0);
    CHECK(at_strike.termination_pv == 1.0);

    // Above it both the coupon and the equal-size rebate are paid.
    const auto above = evaluate_autocallable_path(spec, std::vector<double>{1.01, 0.5}, dfs);
    CHECK(above.autocalled);
    CHECK(above.coupon_pv == spec.coupon);
    CHECK(above.termination_pv == spec.coupon + 1.0);
}

TEST_CASE("every path terminates exactly once and the price is the outcome mean") {
    const Date ref(2019, 12, 16);
    const auto discount = flat_discount(ref, 0.015);
    const auto spec = nine_date_note(CouponStyle::snowball);
    const auto levels = random_walk_levels(spec.dates, 500, 7);
    const auto bundle = bundle_over(spec.dates, levels);

    std::vector<double> dfs;
    for (Date d : spec.dates) dfs.push_back(discount.df(d));

    std::vector<double> pvs(500);
    std::size_t autocalled = 0;
    for (std::size_t p = 0; p < 500; ++p) {
        std::vector<double> path(spec.dates.size());
        for (std::size_t i = 0; i < path.size(); ++i) path[i] = levels[i][p];
        const auto outcome = evaluate_autocallable_path(spec, path, dfs);
        // Exactly one termination cash-flow: autocall strictly before the
        // last date or redemption on it, never both, always one.
        if (outcome.autocalled) {
            ++autocalled;
            CHECK(outcome.termination_index < spec.dates.size() - 1);
        } else {
            CHECK(outcome.termination_index == spec.dates.size() - 1);
        }
        CHECK(outcome.termination_pv > 0.0);
        CHECK(outcome.pv() == outcome.coupon_pv + outcome.termination_pv);
        pvs[p] = outcome.pv();
    }
    // The walk is wide enough that both fates occur.
    CHECK(autocalled > 50);
    CHECK(autocalled < 450);

    const auto price = price_autocallable(spec, bundle, discount);
    CHECK(price.value == mean_std_error(pvs).mean);
    CHECK(price.std_error == mean_std_error(pvs).std_error);
}

TEST_CASE("raising barriers delays termination and raising strikes cheapens digitals") {
    const Date ref(2019, 12, 16);
    const auto discount = flat_discount(ref, 0.015);
    const auto base = nine_date_note(CouponStyle::bullet);
    auto lifted = base;
    for (double& h : lifted.barriers) h += 0.1;

    const auto levels = random_walk_levels(base.dates, 400, 21);
    std::vector<double> dfs;
    for (Date d : base.dates) dfs.push_back(discount.df(d));

    for (std::size_t p = 0; p < 400; ++p) {
        std::vector<double> path(base.dates.size());
        for (std::size_t i = 0; i < path.size(); ++i) path[i] = levels[i][p];
        const auto before = evaluate_autocallable_path(base, path, dfs);
        const auto after = evaluate_autocallable_path(lifted, path, dfs);
        CHECK(after.termination_index >= before.termination_index);
    }

    const auto bundle = bundle_over(base.dates, levels);
    auto digital = nine_date_note(CouponStyle::digital);
    auto pricier = digital;
    for (double& k : pricier.strikes) k += 0.05;
    CHECK(price_autocallable(pricier, bundle, discount).value <=
          price_autocallable(digital, bundle, discount).value);
}

TEST_CASE("athena certificate hand-evaluated fixtures") {
    const Date ref(2020, 1, 2);
    const auto discount = flat_discount(ref, 0.02);
    AthenaSpec spec;
    spec.autocall_date = Date(2020, 7, 2);
    spec.maturity = Date(2021, 1, 4);
    const double df6 = discount.df(spec.autocall_date);
    const double df1 = discount.df(spec.maturity);
    const std::vector<Date> dates{spec.autocall_date, spec.maturity};

    // Frozen at the initial level: the inclusive comparison calls it.
    {
        const std::vector<std::vector<double>> levels(2, std::vector<double>{1.0});
        const auto price = price_athena(spec, bundle_over(dates, levels), discount);
        CHECK(price.value == df6 * 1.05);
    }
    // Deep downside on both dates: fallback coupon plus raw performance.
    {
        const std::vector<std::vector<double>> levels(2, std::vector<double>{0.5});
        const auto price = price_athena(spec, bundle_over(dates, levels), discount);
        CHECK(price.value == 0.025 * df6 + 0.5 * df1);
    }
    // Missed call, strong finish: participation on the performance.
    {
        const std::vector<std::vector<double>> levels{{0.9}, {1.2}};
        const auto price = price_athena(spec, bundle_over(dates, levels), discount);
        const double redemption = 1.0 + spec.participation * (1.2 / 1.0 - 1.0);
        CHECK(price.value == 0.025 * df6 + redemption * df1);
    }
    // Exactly on the protection barrier: capital is preserved.
    {
        const std::vector<std::vector<double>> levels{{0.9}, {0.7}};
        const auto price = price_athena(spec, bundle_over(dates, levels), discount);
        CHECK(price.value == 0.025 * df6 + 1.0 * df1);
    }
    // Relative barrier: the same shape scaled by the initial level.
    {
        const std::vector<std::vector<double>> levels{{1.8}, {1.39}};
        const auto price = price_athena(spec, bundle_over(dates, levels, 2.0), discount);
        CHECK(price.value == 0.025 * df6 + (1.39 / 2.0) * df1);
    }
}

TEST_CASE("knock-in degenerate barriers") {
    const Date ref(2020, 1, 2);
    const auto discount = flat_discount(ref, 0.01);
    const std::vector<Date> dates = business_day_grid(ref, Date(2020, 1, 31));
    const auto levels = random_walk_levels(dates, 128, 3);

    KnockInSpec spec;
    spec.window_start = dates.front();
    spec.expiry = dates.back();
    spec.strike = 1.0;
    spec.side = OptionSide::put;

    auto bundle = bundle_over(dates, levels);

    // A barrier below every simulated low never knocks in.
    spec.barrier = 1e-6;
    CHECK(price_knock_in(spec, bundle, discount).value == 0.0);

    // Barrier zero means unconditionally knocked in: the plain vanilla.
    spec.barrier = 0.0;
    const double df = discount.df(spec.expiry);
    std::vector<double> vanilla(128);
    for (std::size_t p = 0; p < 128; ++p)
        vanilla[p] = df * std::max(spec.strike - levels.back()[p], 0.0);
    const auto knocked = price_knock_in(spec, bundle, discount);
    CHECK(knocked.value == mean_std_error(vanilla).mean);

    // Stored per-path minima over the same window give bit-identical prices.
    spec.barrier = 0.95;
    const auto scanned = price_knock_in(spec, bundle, discount);
    std::vector<double> lows(128);
    for (std::size_t p = 0; p < 128; ++p) {
        double low = levels.front()[p];
        for (const auto& cross_section : levels) low = std::min(low, cross_section[p]);
        lows[p] = low;
    }
    auto with_min = bundle;
    with_min.path_min = lows;
    with_min.min_from = dates.front();
    with_min.min_to = dates.back();
    const auto direct = price_knock_in(spec, with_min, discount);
    CHECK(direct.value == scanned.value);
    CHECK(direct.std_error == scanned.std_error);

    // A gap in the daily coverage is a specification error.
    auto gappy_dates = dates;
    auto gappy_levels = levels;
    gappy_dates.erase(gappy_dates.begin() + 5);
    gappy_levels.erase(gappy_levels.begin() + 5);
    const auto gappy = bundle_over(gappy_dates, gappy_levels);
    CHECK_THROWS_WITH_AS(price_knock_in(spec, gappy, discount),
                         doctest::Contains("no observation on"), ValidationError);
}

TEST_CASE("daily down-and-in put matches the barrier-shifted closed form") {
    // Driftless lognormal paths, 252 daily fixings over one year, zero
    // rates.  The reference value integrates the reflected terminal density
    // against the put payoff with the barrier moved down by the
    // exp(-0.5826 sigma sqrt(dt)) discrete-monitoring factor.
    const double sigma = 0.3;
    const std::size_t steps = 252;
    const std::size_t paths = 30000;
    const double dt = 1.0 / static_cast<double>(steps);

    const Date start(2020, 1, 2);
    const std::vector<Date> dates = business_day_grid(start, add_business_days(start, steps));
    REQUIRE(dates.size() == steps + 1);

    std::vector<std::vector<double>> levels(dates.size(), std::vector<double>(paths));
    std::mt19937_64 gen(20200102);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t p = 0; p < paths; ++p) {
        double level = 1.0;
        levels[0][p] = level;
        for (std::size_t i = 1; i <= steps; ++i) {
            level *= std::exp(sigma * std::sqrt(dt) * normal(gen) - 0.5 * sigma * sigma * dt);
            levels[i][p] = level;
        }
    }

    KnockInSpec spec;
    spec.window_start = dates.front();
    spec.expiry = dates.back();
    spec.barrier = 0.7;
    spec.strike = 1.0;
    spec.side = OptionSide::put;

    const auto discount = flat_discount(start, 0.0);
    const auto price = price_knock_in(spec, bundle_over(dates, levels), discount);

    const double reference = 0.08162547711489819;
    CHECK(price.std_error < 1.5e-3);
    CHECK(std::abs(price.value - reference) <= 3.0 * price.std_error);
}

TEST_CASE("model difference ratios and their reliability gate") {
    // Identical prices: both ratios vanish and nothing is relevant.
    {
        const auto same = model_difference_ratio({1.0, 0.01}, {1.0, 0.01}, {0.01, 0.001},
                                                 {0.01, 0.001});
        CHECK(same.vs_macro_bump.value == 0.0);
        CHECK(same.vs_micro_bump.value == 0.0);
        CHECK_FALSE(same.relevant);
        CHECK(same.vs_macro_bump.reliable);
    }
    // One-year note, bullet coupon: a difference far below the vega move.
    {
        const auto r = model_difference_ratio({1.00988, 0.00019}, {1.00996, 0.00018},
                                              {-0.002246, 0.000024}, {-0.002183, 0.000021});
        CHECK(std::abs(r.vs_macro_bump.value - 0.034) < 0.005);
        CHECK(r.vs_macro_bump.std_error == doctest::Approx(0.121).epsilon(0.02));
        CHECK(std::abs(r.vs_micro_bump.value - 0.033) < 0.005);
        CHECK(r.vs_micro_bump.std_error == doctest::Approx(0.117).epsilon(0.02));
        CHECK(r.vs_macro_bump.reliable);
        CHECK_FALSE(r.relevant);
    }
    // Daily knock-in: the difference crosses the one-half threshold.
    {
        const auto r = model_difference_ratio({0.03828, 0.00029}, {0.03656, 0.00026},
                                              {0.003425, 0.000027}, {0.003305, 0.000021});
        CHECK(r.vs_macro_bump.value == doctest::Approx(0.52).epsilon(0.02));
        CHECK(r.vs_macro_bump.std_error == doctest::Approx(0.12).epsilon(0.05));
        CHECK(r.vs_micro_bump.value == doctest::Approx(0.50).epsilon(0.02));
        CHECK(r.relevant);
    }
    // A bump move smaller than five of its standard errors is unreliable and
    // can never flag relevance, however large the ratio.
    {
        const auto r = model_difference_ratio({1.1, 0.0}, {1.0, 0.0}, {1e-5, 1e-5}, {1e-5, 1e-5});
        CHECK_FALSE(r.vs_macro_bump.reliable);
        CHECK_FALSE(r.relevant);
        CHECK(r.vs_macro_bump.value == doctest::Approx(1e4));
    }
    // Zero moves yield no ratio at all.
    {
        const auto r = model_difference_ratio({1.1, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0});
        CHECK(std::isnan(r.vs_macro_bump.value));
        CHECK_FALSE(r.vs_macro_bump.reliable);
    }
}

TEST_CASE("contract json round trips and rejects malformed input") {
    AutocallableSpec note = nine_date_note(CouponStyle::snowball);
    const auto note_round = parse_contract_json(contract_to_json(note));
    const auto& note_back = std::get<AutocallableSpec>(note_round);
    CHECK(note_back.dates == note.dates);
    CHECK(note_back.barriers == note.barriers);
    CHECK(note_back.strikes == note.strikes);
    CHECK(note_back.coupon == note.coupon);
    CHECK(note_back.style == CouponStyle::snowball);

    AthenaSpec athena;
    athena.autocall_date = Date(2020, 7, 2);
    athena.maturity = Date(2021, 1, 4);
    const auto athena_back =
        std::get<AthenaSpec>(parse_contract_json(contract_to_json(ContractSpec{athena})));
    CHECK(athena_back.autocall_date == athena.autocall_date);
    CHECK(athena_back.maturity == athena.maturity);
    CHECK(athena_back.protection_barrier == athena.protection_barrier);
    CHECK(athena_back.participation == athena.participation);

    KnockInSpec knock;
    knock.window_start = Date(2020, 1, 2);
    knock.expiry = Date(2021, 1, 4);
    knock.barrier = 0.7;
    knock.strike = 1.0;
    knock.side = OptionSide::put;
    const auto knock_back =
        std::get<KnockInSpec>(parse_contract_json(contract_to_json(ContractSpec{knock})));
    CHECK(knock_back.window_start == knock.window_start);
    CHECK(knock_back.barrier == knock.barrier);
    CHECK(knock_back.side == OptionSide::put);

    // A literal document in the external schema parses to the same contract.
    const std::string text = R"({
      "type": "knockin", "style": "put",
      "dates": ["2020-01-02", "2021-01-04"],
      "barriers": [0.7], "strikes": [1.0]
    })";
    const auto parsed = std::get<KnockInSpec>(parse_contract_json(text));
    CHECK(parsed.expiry == knock.expiry);
    CHECK(parsed.strike == 1.0);

    CHECK_THROWS_WITH_AS(parse_contract_json("{"), doctest::Contains("malformed"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(parse_contract_json(R"({"type":"swap"})"),
                         doctest::Contains("unknown contract type"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_contract_json(R"({"type":"autocallable","style":"bullet",
        "dates":["2020-02-03"],"barriers":[1.0],"strikes":[1.0]})"),
                         doctest::Contains("missing field 'coupon'"), ValidationError);
    CHECK_THROWS_WITH_AS(
        parse_contract_json(
            R"({"type":"athena","dates":["2020-07-02","2021-01-04"],"barriers":[0.7,0.8],
            "coupon":0.025,"autocall_premium":0.05,"participation":1.5})"),
        doctest::Contains("exactly one protection barrier"), ValidationError);
    CHECK_THROWS_AS(load_contract("/nonexistent/contract.json"), ValidationError);
}

TEST_CASE("spec validation rejects inconsistent contracts") {
    AutocallableSpec note = nine_date_note(CouponStyle::bullet);
    note.barriers[3] = -1.0;
    CHECK_THROWS_AS(note.validate(), ValidationError);

    AutocallableSpec unordered = nine_date_note(CouponStyle::bullet);
    std::swap(unordered.dates[2], unordered.dates[3]);
    CHECK_THROWS_WITH_AS(unordered.validate(), doctest::Contains("strictly increasing"),
                         ValidationError);

    AutocallableSpec lopsided = nine_date_note(CouponStyle::bullet);
    lopsided.strikes.pop_back();
    CHECK_THROWS_AS(lopsided.validate(), ValidationError);

    AthenaSpec athena;
    athena.autocall_date = Date(2021, 1, 4);
    athena.maturity = Date(2020, 7, 2);
    CHECK_THROWS_AS(athena.validate(), ValidationError);
    athena.autocall_date = Date(2020, 7, 2);
    athena.maturity = Date(2021, 1, 4);
    athena.protection_barrier = 1.2;
    CHECK_THROWS_AS(athena.validate(), ValidationError);

    KnockInSpec knock;
    knock.window_start = Date(2020, 1, 2);
    knock.expiry = Date(2020, 1, 1);
    CHECK_THROWS_AS(knock.validate(), ValidationError);
    knock.expiry = Date(2021, 1, 4);
    knock.barrier = -0.1;
    CHECK_THROWS_AS(knock.validate(), ValidationError);

    // Bundles are checked structurally before any pricing.
    const std::vector<Date> dates{Date(2020, 2, 3), Date(2020, 3, 2)};
    std::vector<std::vector<double>> levels{{1.0, 1.0}, {1.0}};
    const auto ragged = bundle_over(dates, levels);
    CHECK_THROWS_WITH_AS(ragged.validate(), doctest::Contains("differ in length"),
                         ValidationError);
}

TEST_CASE("required observables cover each contract's needs") {
    const auto note = nine_date_note(CouponStyle::bullet);
    const auto note_obs = required_observables(ContractSpec{note});
    CHECK(note_obs.index_dates == note.dates);
    CHECK_FALSE(note_obs.track_extrema);

    KnockInSpec knock;
    knock.window_start = Date(2020, 1, 2);
    knock.expiry = Date(2021, 1, 4);
    const auto knock_obs = required_observables(ContractSpec{knock});
    CHECK(knock_obs.index_dates == std::vector<Date>{knock.expiry});
    CHECK(knock_obs.track_extrema);
    CHECK(knock_obs.extrema_from == knock.window_start);
    CHECK(knock_obs.extrema_to == knock.expiry);
}

TEST_CASE("bundles built from simulation results keep dates, views and extrema") {
    mc::SimResult sim;
    sim.grid = business_day_grid(Date(2020, 1, 2), Date(2020, 1, 10));
    sim.index_obs_dates = {Date(2020, 1, 6), Date(2020, 1, 10)};
    sim.index_obs = {{1.0, 1.1}, {0.9, 1.2}};
    sim.index_min = {0.85, 1.0};

    const auto bundle = make_path_bundle(sim, 1.0);
    CHECK(bundle.paths() == 2);
    CHECK(bundle.at(Date(2020, 1, 10))[1] == 1.2);
    CHECK(bundle.path_min[0] == 0.85);
    CHECK(bundle.min_from == sim.grid.front());
    CHECK(bundle.min_to == sim.grid.back());
    CHECK_THROWS_WITH_AS(bundle.at(Date(2020, 1, 7)), doctest::Contains("no observation on"),
                         ValidationError);

    mc::Observables obs;
    obs.track_extrema = true;
    obs.extrema_from = Date(2020, 1, 3);
    obs.extrema_to = Date(2020, 1, 9);
    const auto windowed = make_path_bundle(sim, 1.0, obs);
    CHECK(windowed.min_from == Date(2020, 1, 3));
    CHECK(windowed.min_to == Date(2020, 1, 9));
}

TEST_CASE("prices are bit-identical across thread counts") {
    const Date ref(2019, 12, 16);
    const auto discount = flat_discount(ref, 0.015);
    const auto spec = nine_date_note(CouponStyle::digital);
    const auto levels = random_walk_levels(spec.dates, 1000, 99);
    const auto bundle = bundle_over(spec.dates, levels);

    set_worker_threads(1);
    const auto note_single = price_autocallable(spec, bundle, discount);
    set_worker_threads(5);
    const auto note_many = price_autocallable(spec, bundle, discount);
    set_worker_threads(0);
    CHECK(note_single.value == note_many.value);
    CHECK(note_single.std_error == note_many.std_error);

    // Same bundle, same spec, repeated call: identical bits.
    const auto again = price_autocallable(spec, bundle, discount);
    CHECK(again.value == note_many.value);
}
