#pragma once

#include "rollidx/core/dates.hpp"
#include "rollidx/market/curves.hpp"

#include <array>

namespace rollidx::index_engine {

// Monthly roll window: the 5th through 9th business day of each calendar
// month.  At the end of roll day k the front weight drops to 1 - 0.2k
// (0.8, 0.6, 0.4, 0.2, 0.0); after the fifth roll day the next maturity
// becomes the front contract with full weight.
std::array<Date, 5> roll_days(int year, unsigned month);

// 1..5 when d is a roll day of its month, 0 otherwise.
int roll_day_number(Date d);

// Front contract and its weight for the NEXT daily step.  Weights change at
// end of day: the return earned over (t, t+1] uses the state fixed at the
// close of t, so a step across roll day k uses alpha = 1 - 0.2(k-1).
struct RollState {
    std::size_t front = 0; // curve index of the front contract
    double alpha = 1.0;    // weight on the front contract, in [0, 1]
};

// State as of date t (start of day).  The front is the first maturity
// strictly after t; if t sits inside its month's roll window the weight
// reflects the roll days already completed.  Rolls completing later are
// applied by advance_roll_state_eod, which is what keeps the front on the
// *new* contract between a completed roll and the old contract's maturity.
RollState initial_roll_state(const market::FuturesCurve& curve, Date t);

// End-of-day transition.  Returns true when the front contract advanced
// (fifth roll day).  Throws ValidationError if the roll needs a contract
// beyond the end of the curve.
bool advance_roll_state_eod(RollState& state, Date d, std::size_t num_contracts);

// One-day index returns.
// Non-roll step: the index tracks the front contract's return.
double step_non_rolling(double level, double front_today, double front_next);
// Roll step: value-weighted basket of front and second contract returns,
// weights fixed the previous evening.
double step_rolling(double level, double alpha, double front_today, double second_today,
                    double front_next, double second_next);

// dIndex/dFront and dIndex/dSecond at the current state: the index holds
// quantity Q = level / (alpha*front + (1-alpha)*second) of the basket, so
// the sensitivities are alpha*Q and (1-alpha)*Q.
struct IndexFuturesSensitivity {
    double to_front = 0.0;
    double to_second = 0.0;
};
IndexFuturesSensitivity index_futures_sensitivity(double level, double alpha,
                                                  double front_price, double second_price);

// Replays the index over a business-day grid given per-contract price paths.
// prices(step, contract) must be positive for every contract the roll state
// touches.  Front contracts must remain alive (maturity strictly after the
// ninth roll business day of their final month); violations throw
// ValidationError naming the date.
template <class Prices>
std::vector<double> replay_index(double initial_level, const std::vector<Date>& grid,
                                 const market::FuturesCurve& curve, const Prices& prices);

// Implementation ---------------------------------------------------------

namespace detail {

void check_replay_preconditions(double initial_level, const std::vector<Date>& grid);
// Contract must exist and still trade at the date its price is needed.
void check_contract_alive(const market::FuturesCurve& curve, std::size_t contract, Date needed);
double checked_price(double value, Date d, std::size_t contract);

} // namespace detail

template <class Prices>
std::vector<double> replay_index(double initial_level, const std::vector<Date>& grid,
                                 const market::FuturesCurve& curve, const Prices& prices) {
    detail::check_replay_preconditions(initial_level, grid);
    RollState state = initial_roll_state(curve, grid.front());
    std::vector<double> levels(grid.size());
    levels[0] = initial_level;
    for (std::size_t m = 0; m + 1 < grid.size(); ++m) {
        // Close-of-day rebalance at grid[m]: the step to grid[m+1] earns the
        // return of the basket fixed this evening.
        advance_roll_state_eod(state, grid[m], curve.size());
        detail::check_contract_alive(curve, state.front, grid[m + 1]);
        const double f0 = detail::checked_price(prices(m, state.front), grid[m], state.front);
        const double f1 = detail::checked_price(prices(m + 1, state.front), grid[m + 1], state.front);
        if (state.alpha >= 1.0) {
            levels[m + 1] = step_non_rolling(levels[m], f0, f1);
        } else {
            const std::size_t second = state.front + 1;
            detail::check_contract_alive(curve, second, grid[m + 1]);
            const double g0 = detail::checked_price(prices(m, second), grid[m], second);
            const double g1 = detail::checked_price(prices(m + 1, second), grid[m + 1], second);
            levels[m + 1] = step_rolling(levels[m], state.alpha, f0, g0, f1, g1);
        }
    }
    return levels;
}

} // namespace rollidx::index_engine
