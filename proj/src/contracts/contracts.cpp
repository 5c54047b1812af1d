#include "rollidx/contracts/contracts.hpp"

#include "rollidx/core/errors.hpp"
#include "rollidx/core/parallel.hpp"
#include "rollidx/core/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace rollidx::contracts {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

void require_increasing(const std::vector<Date>& dates, const std::string& label) {
    for (std::size_t i = 1; i < dates.size(); ++i)
        require(dates[i - 1] < dates[i], label + " dates must be strictly increasing");
}

ContractPrice priced(std::vector<double>& pathwise) {
    const MeanStdErr ms = mean_std_error(pathwise);
    return ContractPrice{ms.mean, ms.std_error, pathwise.size()};
}

} // namespace

void AutocallableSpec::validate() const {
    require(!dates.empty(), "autocallable needs at least one observation date");
    require(barriers.size() == dates.size() && strikes.size() == dates.size(),
            "autocallable needs one barrier and one strike per observation date");
    require_increasing(dates, "autocallable");
    for (double h : barriers) require(h > 0.0, "autocall barriers must be positive");
    for (double k : strikes) require(k > 0.0, "coupon strikes must be positive");
    require(coupon >= 0.0 && std::isfinite(coupon), "coupon rate must be non-negative");
}

void AthenaSpec::validate() const {
    require(autocall_date < maturity, "autocall observation must precede maturity");
    require(protection_barrier > 0.0 && protection_barrier < 1.0,
            "protection barrier must be a fraction of the initial level in (0,1)");
    require(participation >= 0.0, "participation must be non-negative");
    require(autocall_premium >= 0.0 && fallback_coupon >= 0.0,
            "premium and fallback coupon must be non-negative");
}

void KnockInSpec::validate() const {
    require(window_start <= expiry, "monitoring window must not end before it starts");
    require(barrier >= 0.0, "knock-in barrier must be non-negative");
    require(strike > 0.0, "strike must be positive");
}

std::size_t PathBundle::paths() const {
    if (!levels.empty()) return levels.front().size();
    return path_min.size();
}

bool PathBundle::has_observation(Date d) const {
    return std::binary_search(dates.begin(), dates.end(), d);
}

std::span<const double> PathBundle::at(Date d) const {
    const auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d)
        throw ValidationError("path bundle has no observation on " + d.to_iso());
    return levels[static_cast<std::size_t>(it - dates.begin())];
}

void PathBundle::validate() const {
    require(levels.size() == dates.size(), "path bundle has mismatched dates and levels");
    require_increasing(dates, "path bundle");
    const std::size_t n = paths();
    require(n > 0, "path bundle is empty");
    for (const auto& cross_section : levels)
        require(cross_section.size() == n, "path bundle cross-sections differ in length");
    if (!path_min.empty()) {
        require(path_min.size() == n, "path bundle minima sized unlike the paths");
        require(min_from <= min_to, "path bundle extrema window is inverted");
    }
    require(initial_level > 0.0, "initial index level must be positive");
}

PathBundle make_path_bundle(const mc::SimResult& sim, double initial_level) {
    PathBundle bundle;
    bundle.dates = sim.index_obs_dates;
    bundle.levels.reserve(sim.index_obs.size());
    for (const auto& cross_section : sim.index_obs) bundle.levels.emplace_back(cross_section);
    if (!sim.index_min.empty()) {
        bundle.path_min = std::span<const double>(sim.index_min);
        bundle.min_from = sim.grid.front();
        bundle.min_to = sim.grid.back();
    }
    bundle.initial_level = initial_level;
    return bundle;
}

PathBundle make_path_bundle(const mc::SimResult& sim, double initial_level,
                            const mc::Observables& observables) {
    PathBundle bundle = make_path_bundle(sim, initial_level);
    if (!bundle.path_min.empty()) {
        if (observables.extrema_from) bundle.min_from = *observables.extrema_from;
        if (observables.extrema_to) bundle.min_to = *observables.extrema_to;
    }
    return bundle;
}

mc::Observables required_observables(const ContractSpec& spec) {
    mc::Observables obs;
    if (const auto* autocall = std::get_if<AutocallableSpec>(&spec)) {
        obs.index_dates = autocall->dates;
    } else if (const auto* athena = std::get_if<AthenaSpec>(&spec)) {
        obs.index_dates = {athena->autocall_date, athena->maturity};
    } else {
        const auto& knock_in = std::get<KnockInSpec>(spec);
        obs.index_dates = {knock_in.expiry};
        obs.track_extrema = true;
        obs.extrema_from = knock_in.window_start;
        obs.extrema_to = knock_in.expiry;
    }
    return obs;
}

AutocallOutcome evaluate_autocallable_path(const AutocallableSpec& spec,
                                           std::span<const double> levels,
                                           std::span<const double> discounts) {
    const std::size_t m = spec.dates.size();
    AutocallOutcome outcome;
    std::size_t last_hit = 0; // 1-based index of the latest coupon-condition hit
    for (std::size_t i = 0; i < m; ++i) {
        const double level = levels[i];
        const bool condition = BarrierPolicy::digital_pays(level, spec.strikes[i]);
        double coupon = 0.0;
        switch (spec.style) {
        case CouponStyle::bullet:
            coupon = spec.coupon;
            break;
        case CouponStyle::digital:
            coupon = condition ? spec.coupon : 0.0;
            break;
        case CouponStyle::snowball:
            // Missed periods accumulate: the coupon covers every date since
            // the last one whose condition was met.
            if (condition) coupon = static_cast<double>(i + 1 - last_hit) * spec.coupon;
            break;
        }
        if (condition) last_hit = i + 1;
        outcome.coupon_pv += discounts[i] * coupon;
        outcome.termination_index = i;
        if (i + 1 < m) {
            if (!BarrierPolicy::survives(level, spec.barriers[i])) {
                // Early redemption repays principal plus a rebate equal to
                // the coupon just earned.
                outcome.autocalled = true;
                outcome.termination_pv = discounts[i] * (coupon + 1.0);
                return outcome;
            }
        } else {
            const double redemption = BarrierPolicy::at_or_above(level, spec.barriers[i])
                                          ? 1.0
                                          : level / spec.barriers[i];
            outcome.termination_pv = discounts[i] * redemption;
        }
    }
    return outcome;
}

namespace {

std::vector<double> pathwise_autocallable(const AutocallableSpec& spec, const PathBundle& paths,
                                          const market::DiscountCurve& discount) {
    spec.validate();
    paths.validate();
    const std::size_t m = spec.dates.size();
    std::vector<std::span<const double>> obs(m);
    std::vector<double> dfs(m);
    for (std::size_t i = 0; i < m; ++i) {
        obs[i] = paths.at(spec.dates[i]);
        dfs[i] = discount.df(spec.dates[i]);
    }
    const std::size_t n = paths.paths();
    std::vector<double> pv(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> levels(m);
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t i = 0; i < m; ++i) levels[i] = obs[i][p];
            pv[p] = evaluate_autocallable_path(spec, levels, dfs).pv();
        }
    });
    return pv;
}

std::vector<double> pathwise_athena(const AthenaSpec& spec, const PathBundle& paths,
                                    const market::DiscountCurve& discount) {
    spec.validate();
    paths.validate();
    const auto at_call = paths.at(spec.autocall_date);
    const auto at_maturity = paths.at(spec.maturity);
    const double df_call = discount.df(spec.autocall_date);
    const double df_maturity = discount.df(spec.maturity);
    const double initial = paths.initial_level;
    const double barrier = spec.protection_barrier * initial;
    const std::size_t n = paths.paths();
    std::vector<double> pv(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            if (BarrierPolicy::at_or_above(at_call[p], initial)) {
                pv[p] = df_call * (1.0 + spec.autocall_premium);
                continue;
            }
            const double performance = at_maturity[p] / initial;
            double redemption;
            if (BarrierPolicy::at_or_above(at_maturity[p], initial))
                redemption = 1.0 + spec.participation * (performance - 1.0);
            else if (BarrierPolicy::at_or_above(at_maturity[p], barrier))
                redemption = 1.0;
            else
                redemption = performance;
            pv[p] = df_call * spec.fallback_coupon + df_maturity * redemption;
        }
    });
    return pv;
}

std::vector<double> pathwise_knock_in(const KnockInSpec& spec, const PathBundle& paths,
                                      const market::DiscountCurve& discount) {
    spec.validate();
    paths.validate();
    const auto terminal = paths.at(spec.expiry);
    const double df = discount.df(spec.expiry);
    const std::size_t n = paths.paths();

    // Per-path low over the monitoring window: the engine's running minima
    // when they cover exactly a sub-span of the window, otherwise a scan of
    // business-daily observations (which must all be present).
    std::vector<double> low(n);
    const bool min_usable = !paths.path_min.empty() && spec.window_start <= paths.min_from &&
                            paths.min_to <= spec.expiry;
    if (min_usable) {
        std::copy(paths.path_min.begin(), paths.path_min.end(), low.begin());
    } else {
        const std::vector<Date> window = business_day_grid(spec.window_start, spec.expiry);
        require(!window.empty(), "monitoring window contains no business day");
        std::vector<std::span<const double>> obs;
        obs.reserve(window.size());
        for (Date d : window) obs.push_back(paths.at(d));
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                double m = obs.front()[p];
                for (const auto& cross_section : obs) m = std::min(m, cross_section[p]);
                low[p] = m;
            }
        });
    }

    const bool is_put = spec.side == OptionSide::put;
    std::vector<double> pv(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            if (!BarrierPolicy::down_breach(low[p], spec.barrier)) {
                pv[p] = 0.0;
                continue;
            }
            const double intrinsic = is_put ? spec.strike - terminal[p] : terminal[p] - spec.strike;
            pv[p] = df * std::max(intrinsic, 0.0);
        }
    });
    return pv;
}

} // namespace

ContractPrice price_autocallable(const AutocallableSpec& spec, const PathBundle& paths,
                                 const market::DiscountCurve& discount) {
    auto pv = pathwise_autocallable(spec, paths, discount);
    return priced(pv);
}

ContractPrice price_athena(const AthenaSpec& spec, const PathBundle& paths,
                           const market::DiscountCurve& discount) {
    auto pv = pathwise_athena(spec, paths, discount);
    return priced(pv);
}

ContractPrice price_knock_in(const KnockInSpec& spec, const PathBundle& paths,
                             const market::DiscountCurve& discount) {
    auto pv = pathwise_knock_in(spec, paths, discount);
    return priced(pv);
}

ContractPrice price_contract(const ContractSpec& spec, const PathBundle& paths,
                             const market::DiscountCurve& discount) {
    auto pv = pathwise_present_values(spec, paths, discount);
    return priced(pv);
}

std::vector<double> pathwise_present_values(const ContractSpec& spec, const PathBundle& paths,
                                            const market::DiscountCurve& discount) {
    return std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AutocallableSpec>)
                return pathwise_autocallable(s, paths, discount);
            else if constexpr (std::is_same_v<T, AthenaSpec>)
                return pathwise_athena(s, paths, discount);
            else
                return pathwise_knock_in(s, paths, discount);
        },
        spec);
}

namespace {

RatioEstimate ratio_against(double diff, double diff_var, ValueWithError move) {
    RatioEstimate ratio;
    ratio.reliable = move.value != 0.0 && std::abs(move.value) >= 5.0 * move.std_error;
    if (move.value == 0.0) {
        ratio.value = std::numeric_limits<double>::quiet_NaN();
        ratio.std_error = std::numeric_limits<double>::quiet_NaN();
        return ratio;
    }
    const double d2 = move.value * move.value;
    ratio.value = diff / move.value;
    ratio.std_error =
        std::sqrt(diff_var / d2 + diff * diff * move.std_error * move.std_error / (d2 * d2));
    ratio.relevant = ratio.reliable && std::abs(ratio.value) >= 0.5;
    return ratio;
}

} // namespace

DifferenceRatio model_difference_ratio(ValueWithError micro_price, ValueWithError macro_price,
                                       ValueWithError micro_bump_move,
                                       ValueWithError macro_bump_move) {
    const double diff = micro_price.value - macro_price.value;
    const double diff_var = micro_price.std_error * micro_price.std_error +
                            macro_price.std_error * macro_price.std_error;
    DifferenceRatio out;
    out.vs_macro_bump = ratio_against(diff, diff_var, macro_bump_move);
    out.vs_micro_bump = ratio_against(diff, diff_var, micro_bump_move);
    out.relevant = out.vs_macro_bump.relevant || out.vs_micro_bump.relevant;
    return out;
}

namespace {

using nlohmann::ordered_json;

std::vector<Date> parse_dates(const ordered_json& node, std::size_t expected,
                              const std::string& label) {
    if (!node.is_array() || (expected > 0 && node.size() != expected))
        throw ValidationError("contract field 'dates' must list " +
                              (expected > 0 ? std::to_string(expected) : std::string("the")) +
                              " ISO dates for " + label);
    std::vector<Date> dates;
    dates.reserve(node.size());
    for (const auto& item : node) {
        if (!item.is_string()) throw ValidationError("contract dates must be ISO strings");
        dates.push_back(Date::parse_iso(item.get<std::string>()));
    }
    return dates;
}

std::vector<double> parse_numbers(const ordered_json& node, const std::string& field) {
    if (!node.is_array() || node.empty())
        throw ValidationError("contract field '" + field + "' must be a non-empty array");
    std::vector<double> values;
    values.reserve(node.size());
    for (const auto& item : node) {
        if (!item.is_number())
            throw ValidationError("contract field '" + field + "' must hold numbers");
        values.push_back(item.get<double>());
    }
    return values;
}

const ordered_json& field(const ordered_json& doc, const std::string& name) {
    const auto it = doc.find(name);
    if (it == doc.end()) throw ValidationError("contract is missing field '" + name + "'");
    return *it;
}

double number_field(const ordered_json& doc, const std::string& name) {
    const auto& node = field(doc, name);
    if (!node.is_number())
        throw ValidationError("contract field '" + name + "' must be a number");
    return node.get<double>();
}

CouponStyle parse_style(const std::string& text) {
    if (text == "bullet") return CouponStyle::bullet;
    if (text == "digital") return CouponStyle::digital;
    if (text == "snowball") return CouponStyle::snowball;
    throw ValidationError("unknown coupon style '" + text + "'");
}

std::string style_name(CouponStyle style) {
    switch (style) {
    case CouponStyle::bullet: return "bullet";
    case CouponStyle::digital: return "digital";
    case CouponStyle::snowball: return "snowball";
    }
    return "bullet";
}

ContractSpec parse_contract(const ordered_json& doc) {
    const auto& type_node = field(doc, "type");
    if (!type_node.is_string()) throw ValidationError("contract field 'type' must be a string");
    const std::string type = type_node.get<std::string>();

    if (type == "autocallable") {
        AutocallableSpec spec;
        spec.dates = parse_dates(field(doc, "dates"), 0, "an autocallable");
        spec.barriers = parse_numbers(field(doc, "barriers"), "barriers");
        spec.strikes = parse_numbers(field(doc, "strikes"), "strikes");
        spec.coupon = number_field(doc, "coupon");
        const auto& style_node = field(doc, "style");
        if (!style_node.is_string())
            throw ValidationError("contract field 'style' must be a string");
        spec.style = parse_style(style_node.get<std::string>());
        spec.validate();
        return spec;
    }
    if (type == "athena") {
        AthenaSpec spec;
        const auto dates = parse_dates(field(doc, "dates"), 2, "an athena certificate");
        spec.autocall_date = dates[0];
        spec.maturity = dates[1];
        const auto barriers = parse_numbers(field(doc, "barriers"), "barriers");
        if (barriers.size() != 1)
            throw ValidationError("athena takes exactly one protection barrier");
        spec.protection_barrier = barriers[0];
        spec.fallback_coupon = number_field(doc, "coupon");
        spec.autocall_premium = number_field(doc, "autocall_premium");
        spec.participation = number_field(doc, "participation");
        spec.validate();
        return spec;
    }
    if (type == "knockin") {
        KnockInSpec spec;
        const auto dates = parse_dates(field(doc, "dates"), 2, "a knock-in");
        spec.window_start = dates[0];
        spec.expiry = dates[1];
        const auto barriers = parse_numbers(field(doc, "barriers"), "barriers");
        const auto strikes = parse_numbers(field(doc, "strikes"), "strikes");
        if (barriers.size() != 1 || strikes.size() != 1)
            throw ValidationError("knock-in takes exactly one barrier and one strike");
        spec.barrier = barriers[0];
        spec.strike = strikes[0];
        const auto& style_node = field(doc, "style");
        if (!style_node.is_string())
            throw ValidationError("contract field 'style' must be a string");
        const std::string side = style_node.get<std::string>();
        if (side == "put")
            spec.side = OptionSide::put;
        else if (side == "call")
            spec.side = OptionSide::call;
        else
            throw ValidationError("unknown option side '" + side + "'");
        spec.validate();
        return spec;
    }
    throw ValidationError("unknown contract type '" + type + "'");
}

ordered_json dates_to_json(std::initializer_list<Date> dates) {
    ordered_json list = ordered_json::array();
    for (Date d : dates) list.push_back(d.to_iso());
    return list;
}

} // namespace

ContractSpec parse_contract_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& err) {
        throw ValidationError(std::string("contract JSON is malformed: ") + err.what());
    }
    if (!doc.is_object()) throw ValidationError("contract JSON must be an object");
    return parse_contract(doc);
}

ContractSpec load_contract(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open contract file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_contract_json(buffer.str());
}

std::string contract_to_json(const ContractSpec& spec) {
    ordered_json doc;
    if (const auto* autocall = std::get_if<AutocallableSpec>(&spec)) {
        doc["type"] = "autocallable";
        doc["style"] = style_name(autocall->style);
        ordered_json dates = ordered_json::array();
        for (Date d : autocall->dates) dates.push_back(d.to_iso());
        doc["dates"] = std::move(dates);
        doc["barriers"] = autocall->barriers;
        doc["strikes"] = autocall->strikes;
        doc["coupon"] = autocall->coupon;
    } else if (const auto* athena = std::get_if<AthenaSpec>(&spec)) {
        doc["type"] = "athena";
        doc["dates"] = dates_to_json({athena->autocall_date, athena->maturity});
        doc["barriers"] = ordered_json::array({athena->protection_barrier});
        doc["coupon"] = athena->fallback_coupon;
        doc["autocall_premium"] = athena->autocall_premium;
        doc["participation"] = athena->participation;
    } else {
        const auto& knock_in = std::get<KnockInSpec>(spec);
        doc["type"] = "knockin";
        doc["style"] = knock_in.side == OptionSide::put ? "put" : "call";
        doc["dates"] = dates_to_json({knock_in.window_start, knock_in.expiry});
        doc["barriers"] = ordered_json::array({knock_in.barrier});
        doc["strikes"] = ordered_json::array({knock_in.strike});
    }
    return doc.dump(2) + "\n";
}

} // namespace rollidx::contracts
