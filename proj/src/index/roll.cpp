#include "rollidx/index/roll.hpp"

#include "rollidx/core/csv.hpp"
#include "rollidx/core/errors.hpp"

namespace rollidx::index_engine {

std::array<Date, 5> roll_days(int year, unsigned month) {
    std::array<Date, 5> days;
    Date d = nth_business_day_of_month(year, month, 5);
    for (int k = 0; k < 5; ++k) {
        days[static_cast<std::size_t>(k)] = d;
        if (k < 4) d = next_business_day(d);
    }
    // 5th..9th business day of one month always stays inside the month
    // (at most 9 business days ~ 13 calendar days), so no overflow check.
    return days;
}

int roll_day_number(Date d) {
    if (!is_business_day(d)) return 0;
    const auto days = roll_days(d.year(), d.month());
    for (int k = 0; k < 5; ++k)
        if (days[static_cast<std::size_t>(k)] == d) return k + 1;
    return 0;
}

RollState initial_roll_state(const market::FuturesCurve& curve, Date t) {
    RollState state;
    state.front = curve.first_maturity_after(t);
    const auto days = roll_days(t.year(), t.month());
    int completed = 0;
    for (const Date& rd : days)
        if (rd < t) ++completed;
    // Mid-roll start: the nearest maturity is the contract being rolled out
    // of, with the weight left after `completed` roll days.  A finished roll
    // (or none yet) means full weight on the nearest maturity.
    state.alpha = (completed >= 5) ? 1.0 : 1.0 - 0.2 * completed;
    return state;
}

bool advance_roll_state_eod(RollState& state, Date d, std::size_t num_contracts) {
    const int k = roll_day_number(d);
    if (k == 0) return false;
    if (k < 5) {
        state.alpha = 1.0 - 0.2 * k;
        return false;
    }
    // Fifth roll day: the old front is fully rolled out; the next maturity
    // takes over with full weight.
    if (state.front + 1 >= num_contracts)
        throw ValidationError("roll on " + d.to_iso() + " needs a contract beyond the curve end");
    state.front += 1;
    state.alpha = 1.0;
    return true;
}

double step_non_rolling(double level, double front_today, double front_next) {
    return level * front_next / front_today;
}

double step_rolling(double level, double alpha, double front_today, double second_today,
                    double front_next, double second_next) {
    const double basket_today = alpha * front_today + (1.0 - alpha) * second_today;
    const double basket_next = alpha * front_next + (1.0 - alpha) * second_next;
    return level * basket_next / basket_today;
}

IndexFuturesSensitivity index_futures_sensitivity(double level, double alpha,
                                                  double front_price, double second_price) {
    const double basket = alpha * front_price + (1.0 - alpha) * second_price;
    if (!(basket > 0.0))
        throw NumericalError("index basket value must be positive, got " + format_double(basket));
    const double quantity = level / basket;
    return {alpha * quantity, (1.0 - alpha) * quantity};
}

namespace detail {

void check_replay_preconditions(double initial_level, const std::vector<Date>& grid) {
    if (!(initial_level > 0.0))
        throw ValidationError("index replay: initial level must be positive, got " +
                              format_double(initial_level));
    if (grid.size() < 2)
        throw ValidationError("index replay: grid needs at least two dates");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!is_business_day(grid[i]))
            throw ValidationError("index replay: " + grid[i].to_iso() + " is not a business day");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw ValidationError("index replay: grid not strictly increasing at " +
                                  grid[i].to_iso());
    }
}

void check_contract_alive(const market::FuturesCurve& curve, std::size_t contract, Date needed) {
    if (contract >= curve.size())
        throw ValidationError("index replay: roll requires a contract beyond the last curve "
                              "maturity (needed on " + needed.to_iso() + ")");
    if (curve.maturity(contract) < needed)
        throw ValidationError("index replay: contract maturing " +
                              curve.maturity(contract).to_iso() +
                              " still held on " + needed.to_iso() +
                              " (front must leave the index before its maturity)");
}

double checked_price(double value, Date d, std::size_t contract) {
    if (!(value > 0.0))
        throw NumericalError("index replay: non-positive futures price " + format_double(value) +
                             " for contract " + std::to_string(contract) + " on " + d.to_iso());
    return value;
}

} // namespace detail

} // namespace rollidx::index_engine
