#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rollidx/core/errors.hpp"
#include "rollidx/core/parallel.hpp"
#include "rollidx/core/stats.hpp"
#include "rollidx/index/roll.hpp"
#include "rollidx/lvcalib/lv_calibration.hpp"
#include "rollidx/market/black76.hpp"
#include "rollidx/mc/correlation.hpp"
#include "rollidx/mc/engine.hpp"
#include "rollidx/mc/particle.hpp"
#include "rollidx/pde/dupire.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace rollidx;
using namespace rollidx::mc;

namespace {

const double kNan = std::numeric_limits<double>::quiet_NaN();

// Four WTI-style maturities around the turn of 2020, mildly backwardated.
market::MarketSnapshot four_contract_snapshot() {
    const Date ref(2019, 12, 16);
    market::FuturesCurve curve(ref,
                               {Date(2020, 1, 21), Date(2020, 2, 20), Date(2020, 3, 20),
                                Date(2020, 4, 21)},
                               {55.0, 54.5, 54.0, 53.6});
    return {ref, curve, market::DiscountCurve::flat(ref, 0.015, Date(2021, 12, 31)), {}, {}};
}

market::MarketSnapshot two_contract_snapshot() {
    const Date ref(2019, 12, 16);
    market::FuturesCurve curve(ref, {Date(2020, 1, 21), Date(2020, 2, 20)}, {55.0, 54.5});
    return {ref, curve, market::DiscountCurve::flat(ref, 0.015, Date(2021, 12, 31)), {}, {}};
}

pde::LocalVolGrid flat_lv(double value) {
    return pde::LocalVolGrid::constant({0.0}, {0.0, 3.0}, value);
}

void check_within_se(double value, double target, double se, double mult = 3.0) {
    CAPTURE(value);
    CAPTURE(target);
    CAPTURE(se);
    CHECK(std::abs(value - target) <= mult * se);
}

} // namespace

TEST_CASE("futures correlation decays exponentially in maturity distance") {
    const std::vector<double> t{0.1, 0.35, 0.6, 1.1};
    const Matrix r = futures_correlation(0.8, t);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r[i][i] == 1.0);
        for (std::size_t j = 0; j < 4; ++j) CHECK(r[i][j] == r[j][i]);
    }
    CHECK(r[0][1] == doctest::Approx(std::exp(-0.8 * 0.25)).epsilon(1e-15));
    CHECK(r[0][3] == doctest::Approx(std::exp(-0.8 * 1.0)).epsilon(1e-15));
    // Correlation weakens monotonically with distance along the curve.
    CHECK(r[0][1] > r[0][2]);
    CHECK(r[0][2] > r[0][3]);

    const Matrix ones = futures_correlation(0.0, t);
    for (const auto& row : ones)
        for (double v : row) CHECK(v == 1.0);

    CHECK_THROWS_AS(futures_correlation(-0.1, t), ValidationError);
    CHECK_THROWS_AS(futures_correlation(0.5, {}), ValidationError);
}

TEST_CASE("variance shocks must share the price factor structure to stay PSD") {
    // ACT/365 times of the four-contract curve above.
    const std::vector<double> t{36.0 / 365, 66.0 / 365, 95.0 / 365, 127.0 / 365};
    const double rho = 0.40985;
    const Matrix r = futures_correlation(0.172338, t);
    const std::size_t m = t.size();

    const Matrix joint = joint_price_variance_correlation(r, rho);
    REQUIRE(joint.size() == 2 * m);
    for (std::size_t i = 0; i < 2 * m; ++i) CHECK(joint[i][i] == 1.0);
    // Each variance shock correlates exactly rho with its own price shock.
    for (std::size_t i = 0; i < m; ++i) CHECK(joint[i][m + i] == rho);

    const Matrix l = cholesky_lower(joint);
    for (std::size_t i = 0; i < 2 * m; ++i) {
        for (std::size_t j = 0; j < 2 * m; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 2 * m; ++k) acc += l[i][k] * l[j][k];
            CHECK(acc == doctest::Approx(joint[i][j]).epsilon(1e-12));
        }
    }

    // The tempting alternative - correlate each variance shock rho with its
    // own price shock and nothing else - is indefinite for exactly these
    // parameters (most negative eigenvalue is about -0.14), so the factor
    // construction is not a convenience but a requirement.
    Matrix naive(2 * m, std::vector<double>(2 * m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) naive[i][j] = r[i][j];
        naive[m + i][m + i] = 1.0;
        naive[i][m + i] = naive[m + i][i] = rho;
    }
    CHECK_THROWS_AS(cholesky_lower(naive), NumericalError);

    CHECK_THROWS_AS(joint_price_variance_correlation(r, 1.5), ValidationError);
    CHECK_THROWS_AS(cholesky_lower(Matrix{}), ValidationError);
    CHECK_THROWS_AS(cholesky_lower(Matrix{{1.0, 0.0}}), ValidationError);
}

TEST_CASE("perfect correlation factorizes as a semi-definite edge case") {
    const std::vector<double> t{36.0 / 365, 66.0 / 365, 95.0 / 365};
    // beta = 0: every price shock is the same shock.
    const Matrix ones = futures_correlation(0.0, t);
    const Matrix l = cholesky_lower(ones);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 3; ++k) acc += l[i][k] * l[j][k];
            CHECK(acc == doctest::Approx(1.0).epsilon(1e-14));
        }
    }

    // |rho| = 1: variance shocks coincide with price shocks.
    const Matrix r = futures_correlation(0.172338, t);
    const Matrix joint = joint_price_variance_correlation(r, 1.0);
    const Matrix lj = cholesky_lower(joint);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 6; ++k) acc += lj[i][k] * lj[j][k];
            CHECK(acc == doctest::Approx(joint[i][j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("particle estimator agrees with a direct kernel regression") {
    std::mt19937 gen(42);
    std::normal_distribution<double> nd(0.0, 1.0);
    const std::size_t n = 5000;
    std::vector<double> x(n), v(n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = 50.0 + 8.0 * nd(gen);
        // Includes negative outcomes so the positive-part handling matters.
        v[j] = 1.0 + 0.8 * std::sin(0.17 * x[j]) + 0.6 * nd(gen) - 0.4;
    }

    const ParticleOptions opt;
    const ParticleEstimate fast = estimate_conditional_expectation(x, v, opt);
    REQUIRE(fast.nodes.size() == opt.nodes);
    CHECK_FALSE(fast.degenerate);

    // Direct O(N * nodes) evaluation of the same quartic-kernel regression.
    double mean_x = 0.0, mean_v = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        mean_x += x[j];
        mean_v += std::max(v[j], 0.0);
    }
    mean_x /= static_cast<double>(n);
    mean_v /= static_cast<double>(n);
    double var_x = 0.0;
    for (double xj : x) var_x += (xj - mean_x) * (xj - mean_x);
    const double sd_x = std::sqrt(var_x / static_cast<double>(n));
    std::vector<double> y(n);
    for (std::size_t j = 0; j < n; ++j) y[j] = (x[j] - mean_x) / sd_x;
    const double eps = opt.bandwidth_mult * std::pow(static_cast<double>(n), -0.2);
    const double y_lo = *std::min_element(y.begin(), y.end());
    const double y_hi = *std::max_element(y.begin(), y.end());

    for (std::size_t g = 0; g < opt.nodes; ++g) {
        const double yg =
            y_lo + (y_hi - y_lo) * static_cast<double>(g) / static_cast<double>(opt.nodes - 1);
        CHECK(fast.nodes[g] == doctest::Approx(mean_x + sd_x * yg).epsilon(1e-14));
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = (y[j] - yg) / eps;
            if (std::abs(u) <= 1.0) {
                const double w = (1.0 - u * u) * (1.0 - u * u);
                den += w;
                num += std::max(v[j], 0.0) * w;
            }
        }
        const double expected = den <= opt.denominator_floor
                                    ? std::clamp(mean_v, opt.clamp_lo, opt.clamp_hi)
                                    : std::clamp(num / den, opt.clamp_lo, opt.clamp_hi);
        CHECK(fast.values[g] == doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("particle estimator conditions on the price where it matters") {
    std::mt19937 gen(7);
    std::normal_distribution<double> nd(0.0, 1.0);

    SUBCASE("separated clusters recover cluster means") {
        std::vector<double> x, v;
        for (int j = 0; j < 2500; ++j) {
            x.push_back(0.0 + 0.01 * nd(gen));
            v.push_back(1.0 + 0.02 * nd(gen));
            x.push_back(10.0 + 0.01 * nd(gen));
            v.push_back(4.0 + 0.02 * nd(gen));
        }
        const ParticleEstimate est = estimate_conditional_expectation(x, v);
        CHECK(est(0.0) == doctest::Approx(1.0).epsilon(2e-3));
        CHECK(est(10.0) == doctest::Approx(4.0).epsilon(2e-3));
        CHECK(est(-100.0) == est(est.nodes.front()));
        CHECK(est(100.0) == est(est.nodes.back()));
    }

    SUBCASE("independent variance flattens to the mean") {
        std::vector<double> x(6000), v(6000);
        std::uniform_real_distribution<double> ud(0.0, 1.0);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = ud(gen);
            v[j] = 2.5 + 0.5 * nd(gen);
        }
        const ParticleEstimate est = estimate_conditional_expectation(x, v);
        double worst = 0.0;
        for (double value : est.values) worst = std::max(worst, std::abs(value - 2.5));
        CHECK(worst < 0.3);
        CHECK(est(0.5) == doctest::Approx(2.5).epsilon(0.04));
    }

    SUBCASE("zero spread falls back to the plain mean") {
        const std::vector<double> x(100, 7.0);
        std::vector<double> v(100);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = 0.5 + 0.01 * static_cast<double>(j);
        const ParticleEstimate est = estimate_conditional_expectation(x, v);
        CHECK(est.degenerate);
        double mean = 0.0;
        for (double w : v) mean += w;
        mean /= static_cast<double>(v.size());
        CHECK(est(7.0) == doctest::Approx(mean).epsilon(1e-14));
        CHECK(est(123.0) == est(7.0));
    }

    SUBCASE("estimates are clamped on both sides") {
        std::vector<double> x(500), v(500);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = nd(gen);

        std::fill(v.begin(), v.end(), -3.0); // positive part is identically 0
        ParticleEstimate est = estimate_conditional_expectation(x, v);
        for (double value : est.values) CHECK(value == 1e-8);

        std::fill(v.begin(), v.end(), 1e9);
        est = estimate_conditional_expectation(x, v);
        for (double value : est.values) CHECK(value == 1e3);
    }

    SUBCASE("node interpolation is linear and flat beyond the ends") {
        std::vector<double> x(400), v(400);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = nd(gen);
            v[j] = 1.0 + 0.5 * x[j] * x[j];
        }
        const ParticleEstimate est = estimate_conditional_expectation(x, v);
        const std::size_t mid = est.nodes.size() / 2;
        CHECK(est(est.nodes[mid]) == doctest::Approx(est.values[mid]).epsilon(1e-12));
        const double between = 0.5 * (est.nodes[mid] + est.nodes[mid + 1]);
        CHECK(est(between) ==
              doctest::Approx(0.5 * (est.values[mid] + est.values[mid + 1])).epsilon(1e-12));
    }

    SUBCASE("input validation") {
        CHECK_THROWS_AS(estimate_conditional_expectation({}, {}), ValidationError);
        CHECK_THROWS_AS(estimate_conditional_expectation({1.0, 2.0}, {1.0}), ValidationError);
        ParticleOptions bad;
        bad.nodes = 1;
        CHECK_THROWS_AS(estimate_conditional_expectation({1.0, 2.0}, {1.0, 1.0}, bad),
                        ValidationError);
        bad = {};
        bad.clamp_hi = bad.clamp_lo;
        CHECK_THROWS_AS(estimate_conditional_expectation({1.0, 2.0}, {1.0, 1.0}, bad),
                        ValidationError);
        CHECK_THROWS_AS(ParticleEstimate{}(1.0), NumericalError);
    }
}

TEST_CASE("simulated index is the deterministic replay of the simulated futures book") {
    const auto snapshot = four_contract_snapshot();
    const auto grid = business_day_grid(snapshot.reference, Date(2020, 3, 18));

    MicroParams params;
    params.a = 0.338619;
    params.beta = 0.172338;
    params.rho_fv = 0.40985;
    params.variance = {1.0, 1.0, 0.5, 1.0};

    Observables obs;
    obs.index_dates = grid;
    for (const Date& d : grid)
        for (std::size_t c = 0; c < snapshot.futures.size(); ++c)
            if (d <= snapshot.futures.maturity(c)) obs.futures_dates.push_back({d, c});

    SimOptions options;
    options.paths = 8;
    options.seed = 11;
    const pde::LocalVolGrid lv = flat_lv(0.3);
    const SimResult res = simulate_micro(snapshot, 1.0, params, lv, grid, obs, options);

    REQUIRE(res.index_obs.size() == grid.size());
    REQUIRE(res.futures_obs.size() == obs.futures_dates.size());
    CHECK(res.degenerate_baskets == 0);
    CHECK(res.leverage.per_step.size() == grid.size() - 1);
    // Step zero has every path at the same price: estimator must fall back.
    CHECK(res.leverage.per_step[0][0].degenerate);

    for (std::size_t p = 0; p < options.paths; ++p) {
        // Rebuild this path's futures book, then replay the index through the
        // production roll machinery.  Untouched cells stay NaN so any read
        // outside a contract's lifetime fails loudly inside the replay.
        std::vector<std::vector<double>> table(
            grid.size(), std::vector<double>(snapshot.futures.size(), kNan));
        for (std::size_t slot = 0; slot < obs.futures_dates.size(); ++slot) {
            const auto& [date, asset] = obs.futures_dates[slot];
            const auto it = std::lower_bound(grid.begin(), grid.end(), date);
            table[static_cast<std::size_t>(it - grid.begin())][asset] =
                res.futures_obs[slot][p];
            CHECK(res.futures_obs[slot][p] > 0.0);
        }
        const auto levels = index_engine::replay_index(
            1.0, grid, snapshot.futures,
            [&](std::size_t m, std::size_t c) { return table[m][c]; });
        for (std::size_t m = 0; m < grid.size(); ++m) CHECK(levels[m] == res.index_obs[m][p]);
    }
}

TEST_CASE("futures and the index stay martingales under particle leverage") {
    const auto snapshot = four_contract_snapshot();
    const auto grid = business_day_grid(snapshot.reference, Date(2020, 3, 18));

    MicroParams params;
    params.a = 0.338619;
    params.beta = 0.172338;
    params.rho_fv = 0.40985;
    params.variance = {1.0, 1.0, 1.4, 1.0};

    Observables obs;
    // Last grid date each contract is still alive on.
    obs.futures_dates = {{Date(2020, 1, 21), 0},
                         {Date(2020, 2, 20), 1},
                         {Date(2020, 3, 18), 2},
                         {Date(2020, 3, 18), 3}};
    obs.index_dates = {Date(2020, 3, 18)};

    SimOptions options;
    options.paths = 16384;
    options.seed = 2024;
    const pde::LocalVolGrid lv = flat_lv(0.3);
    const SimResult res = simulate_micro(snapshot, 1.0, params, lv, grid, obs, options);

    for (std::size_t slot = 0; slot < obs.futures_dates.size(); ++slot) {
        const auto stats = mean_std_error(res.futures_obs[slot]);
        check_within_se(stats.mean, snapshot.futures.price(obs.futures_dates[slot].second),
                        stats.std_error);
    }
    const auto idx = mean_std_error(res.index_obs[0]);
    check_within_se(idx.mean, 1.0, idx.std_error);
}

TEST_CASE("variance discretization follows its exact mean recursion") {
    const Date ref(2019, 12, 16);
    const auto grid = business_day_grid(ref, Date(2020, 3, 18));

    MacroParams params;
    params.rho = -0.5;
    params.variance = {1.0, 1.0, 0.3, 0.6};

    Observables obs;
    obs.index_dates = {grid.back()};
    obs.record_final_variance = true;

    SimOptions options;
    options.paths = 32768;
    options.seed = 5;
    options.mode = LeverageMode::pure_sv;
    const pde::LocalVolGrid lv = flat_lv(1.0);
    const SimResult res = simulate_macro(ref, 1.0, params, lv, grid, obs, options);
    REQUIRE(res.final_variance.size() == 1);

    // The Euler mean obeys m_{k+1} = m_k + kappa (theta - m_k) dt exactly as
    // long as trajectories stay positive (overwhelmingly true here), because
    // the diffusion term has conditional mean zero.
    double mean = params.variance.v0;
    for (std::size_t s = 0; s + 1 < grid.size(); ++s) {
        const double dt = year_fraction(grid[s], grid[s + 1]);
        mean += params.variance.kappa * (params.variance.theta - mean) * dt;
    }
    const auto stats = mean_std_error(res.final_variance[0]);
    check_within_se(stats.mean, mean, stats.std_error);
}

TEST_CASE("constant-variance index reproduces exact lognormal marginals") {
    const Date ref(2019, 12, 16);
    const auto grid = business_day_grid(ref, Date(2020, 3, 18));
    const double horizon = year_fraction(grid.front(), grid.back());

    MacroParams params;
    params.rho = 0.0;
    params.variance = {1.0, 0.09, 0.0, 0.09}; // chi = 0, v0 = theta: v is 0.09 forever

    Observables obs;
    obs.index_dates = {grid.back()};
    obs.record_final_variance = true;

    SimOptions options;
    options.paths = 32768;
    options.seed = 77;
    options.mode = LeverageMode::pure_sv;
    const SimResult res = simulate_macro(ref, 1.0, params, flat_lv(1.0), grid, obs, options);

    for (double v : res.final_variance[0]) CHECK(v == 0.09);

    const auto& terminal = res.index_obs[0];
    const auto level = mean_std_error(terminal);
    check_within_se(level.mean, 1.0, level.std_error);

    std::vector<double> logs(terminal.size());
    std::transform(terminal.begin(), terminal.end(), logs.begin(),
                   [](double s) { return std::log(s); });
    const auto log_stats = mean_std_error(logs);
    check_within_se(log_stats.mean, -0.5 * 0.09 * horizon, log_stats.std_error);

    // Log-variance: each step adds an independent N(-v dt / 2, v dt), so the
    // terminal log is exactly normal with variance v * T.
    const double sample_var = sample_std(logs) * sample_std(logs);
    const double target_var = 0.09 * horizon;
    const double se_var = target_var * std::sqrt(2.0 / (static_cast<double>(logs.size()) - 1));
    check_within_se(sample_var, target_var, se_var, 4.0);

    // And option prices are exactly Black-76 up to Monte Carlo noise.
    for (const double strike : {0.95, 1.0, 1.05}) {
        std::vector<double> payoff(terminal.size());
        std::transform(terminal.begin(), terminal.end(), payoff.begin(),
                       [&](double s) { return std::max(s - strike, 0.0); });
        const auto pay = mean_std_error(payoff);
        const double exact = market::black76_call(1.0, strike, 0.3, horizon, 1.0);
        check_within_se(pay.mean, exact, pay.std_error);
    }
}

TEST_CASE("particle leverage glues curve marginals to the one-factor local vol") {
    // Four contracts so the February roll has somewhere to go; the two
    // front contracts carry the marginal checks.
    const auto snapshot = four_contract_snapshot();
    const auto grid = business_day_grid(snapshot.reference, Date(2020, 2, 14));

    // Skewed factor lattice so the strike mapping is genuinely exercised.
    const pde::LocalVolGrid lv({0.0}, {0.0, 0.5, 1.0, 1.5, 3.0},
                               {{0.45, 0.40, 0.35, 0.30, 0.15}});

    MicroParams params;
    params.a = 0.338619;
    params.beta = 0.172338;
    params.rho_fv = -0.3;
    params.variance = {1.0, 1.0, 0.5, 1.0};

    Observables obs;
    obs.futures_dates = {{Date(2020, 1, 21), 0}, {Date(2020, 2, 14), 1}};

    SimOptions options;
    options.paths = 20000;
    options.seed = 31;
    const SimResult res = simulate_micro(snapshot, 1.0, params, lv, grid, obs, options);

    // One-factor prices from the forward PDE on a matching daily grid.
    const auto sol = pde::solve_forward_call_pde(params.a, lv, pde::make_daily_time_grid(66),
                                                 pde::make_space_grid(400, 3.0));

    for (std::size_t slot = 0; slot < obs.futures_dates.size(); ++slot) {
        const auto& [date, asset] = obs.futures_dates[slot];
        const double t_obs = year_fraction(snapshot.reference, date);
        const double t_mat =
            year_fraction(snapshot.reference, snapshot.futures.maturity(asset));
        const double f0 = snapshot.futures.price(asset);
        for (const double moneyness : {0.9, 1.0, 1.1}) {
            const double strike = moneyness * f0;
            std::vector<double> payoff(res.futures_obs[slot].size());
            std::transform(res.futures_obs[slot].begin(), res.futures_obs[slot].end(),
                           payoff.begin(),
                           [&](double f) { return std::max(f - strike, 0.0); });
            const auto mc = mean_std_error(payoff);
            const double pde_price =
                lvcalib::futures_call_from_pde(sol, params.a, t_obs, t_mat, strike, f0);
            check_within_se(mc.mean, pde_price, mc.std_error);
        }
    }
}

TEST_CASE("frozen leverage replays the calibrating run bit for bit") {
    SUBCASE("curve simulation") {
        const auto snapshot = two_contract_snapshot();
        const auto grid = business_day_grid(snapshot.reference, Date(2020, 1, 31));

        MicroParams params;
        params.a = 0.338619;
        params.beta = 0.172338;
        params.rho_fv = 0.40985;
        params.variance = {1.0, 1.0, 0.8, 1.0};

        Observables obs;
        obs.index_dates = {Date(2020, 1, 15), grid.back()};
        obs.futures_dates = {{grid.back(), 1}};

        SimOptions options;
        options.paths = 4096;
        options.seed = 9;
        const pde::LocalVolGrid lv = flat_lv(0.32);
        const SimResult live = simulate_micro(snapshot, 1.0, params, lv, grid, obs, options);

        SimOptions replay = options;
        replay.mode = LeverageMode::frozen;
        replay.frozen = &live.leverage;
        const SimResult again = simulate_micro(snapshot, 1.0, params, lv, grid, obs, replay);

        CHECK(again.index_obs == live.index_obs);
        CHECK(again.futures_obs == live.futures_obs);
        CHECK(again.leverage.empty());
        CHECK(again.estimator_fallbacks == 0);

        SimOptions other = options;
        other.seed = 10;
        const SimResult shifted = simulate_micro(snapshot, 1.0, params, lv, grid, obs, other);
        CHECK(shifted.index_obs != live.index_obs);
    }

    SUBCASE("index simulation") {
        const Date ref(2019, 12, 16);
        const auto grid = business_day_grid(ref, Date(2020, 2, 14));

        MacroParams params;
        params.rho = -0.6;
        params.variance = {1.0, 0.0625, 0.4, 0.0625};

        Observables obs;
        obs.index_dates = {grid.back()};
        obs.track_extrema = true;

        SimOptions options;
        options.paths = 4096;
        options.seed = 13;
        const pde::LocalVolGrid lv = flat_lv(0.25);
        const SimResult live = simulate_macro(ref, 1.0, params, lv, grid, obs, options);

        SimOptions replay = options;
        replay.mode = LeverageMode::frozen;
        replay.frozen = &live.leverage;
        const SimResult again = simulate_macro(ref, 1.0, params, lv, grid, obs, replay);

        CHECK(again.index_obs == live.index_obs);
        CHECK(again.index_min == live.index_min);
        CHECK(again.index_max == live.index_max);
    }
}

TEST_CASE("results are identical for any worker thread count") {
    const auto snapshot = two_contract_snapshot();
    const auto grid = business_day_grid(snapshot.reference, Date(2020, 1, 31));

    MicroParams params;
    params.a = 0.338619;
    params.beta = 0.172338;
    params.rho_fv = 0.40985;
    params.variance = {1.0, 1.0, 0.8, 1.0};

    Observables obs;
    obs.index_dates = {grid.back()};
    obs.futures_dates = {{grid.back(), 1}};

    SimOptions options;
    options.paths = 4096;
    options.seed = 21;
    const pde::LocalVolGrid lv = flat_lv(0.3);

    set_worker_threads(1);
    const SimResult serial = simulate_micro(snapshot, 1.0, params, lv, grid, obs, options);
    set_worker_threads(5);
    const SimResult parallel = simulate_micro(snapshot, 1.0, params, lv, grid, obs, options);
    set_worker_threads(0);

    CHECK(serial.index_obs == parallel.index_obs);
    CHECK(serial.futures_obs == parallel.futures_obs);
}

TEST_CASE("extrema tracking matches a per-date reconstruction") {
    const Date ref(2019, 12, 16);
    const auto grid = business_day_grid(ref, Date(2020, 2, 14));

    MacroParams params;
    params.rho = 0.0;
    params.variance = {1.0, 0.09, 0.0, 0.09};

    Observables obs;
    obs.index_dates = grid;
    obs.track_extrema = true;
    obs.extrema_from = grid[10];
    obs.extrema_to = grid[30];

    SimOptions options;
    options.paths = 512;
    options.seed = 3;
    options.mode = LeverageMode::pure_sv;
    const SimResult res = simulate_macro(ref, 1.0, params, flat_lv(1.0), grid, obs, options);

    for (std::size_t p = 0; p < options.paths; ++p) {
        double lo = res.index_obs[10][p], hi = lo;
        for (std::size_t m = 11; m <= 30; ++m) {
            lo = std::min(lo, res.index_obs[m][p]);
            hi = std::max(hi, res.index_obs[m][p]);
        }
        CHECK(res.index_min[p] == lo);
        CHECK(res.index_max[p] == hi);
    }

    // Default window spans the whole grid, including the initial level.
    Observables whole = obs;
    whole.extrema_from.reset();
    whole.extrema_to.reset();
    const SimResult full = simulate_macro(ref, 1.0, params, flat_lv(1.0), grid, whole, options);
    for (std::size_t p = 0; p < 16; ++p) {
        double lo = 1.0, hi = 1.0;
        for (std::size_t m = 0; m < grid.size(); ++m) {
            lo = std::min(lo, full.index_obs[m][p]);
            hi = std::max(hi, full.index_obs[m][p]);
        }
        CHECK(full.index_min[p] == lo);
        CHECK(full.index_max[p] == hi);
    }
}

TEST_CASE("simulation input validation") {
    const auto snapshot = two_contract_snapshot();
    const auto grid = business_day_grid(snapshot.reference, Date(2020, 1, 17));
    const pde::LocalVolGrid lv = flat_lv(0.3);
    MicroParams micro;
    micro.variance = {1.0, 1.0, 0.5, 1.0};
    MacroParams macro;
    macro.variance = {1.0, 1.0, 0.5, 1.0};
    Observables obs;
    SimOptions options;
    options.paths = 16;

    SUBCASE("grid must start at the reference") {
        const auto late = business_day_grid(Date(2019, 12, 17), Date(2020, 1, 17));
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, micro, lv, late, obs, options),
                             doctest::Contains("must start at the market reference"),
                             ValidationError);
    }
    SUBCASE("grid dates must be business days and increasing") {
        auto bad = grid;
        bad[3] = Date(2020, 1, 4); // a Saturday
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, micro, lv, bad, obs, options),
                             doctest::Contains("not a business day"), ValidationError);
        bad = grid;
        std::swap(bad[3], bad[4]);
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, micro, lv, bad, obs, options),
                             doctest::Contains("not strictly increasing"), ValidationError);
    }
    SUBCASE("observations must sit on the grid and respect maturities") {
        Observables off;
        off.index_dates = {Date(2020, 1, 18)}; // a Saturday, certainly not on the grid
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, micro, lv, grid, off, options),
                             doctest::Contains("not on the simulation grid"), ValidationError);
        const auto deep = four_contract_snapshot();
        const auto long_grid = business_day_grid(deep.reference, Date(2020, 2, 14));
        Observables dead;
        dead.futures_dates = {{Date(2020, 2, 14), 0}}; // contract 0 matured Jan 21
        CHECK_THROWS_WITH_AS(simulate_micro(deep, 1.0, micro, lv, long_grid, dead, options),
                             doctest::Contains("past the contract maturity"), ValidationError);
        Observables wide;
        wide.futures_dates = {{Date(2020, 1, 17), 7}};
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, micro, lv, grid, wide, options),
                             doctest::Contains("beyond the curve"), ValidationError);
        CHECK_THROWS_WITH_AS(
            simulate_macro(snapshot.reference, 1.0, macro, lv, grid, wide, options),
            doctest::Contains("index-only"), ValidationError);
    }
    SUBCASE("mode and parameter checks") {
        SimOptions sv = options;
        sv.mode = LeverageMode::pure_sv;
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, micro, lv, grid, obs, sv),
                             doctest::Contains("pure-SV"), ValidationError);
        SimOptions frozen = options;
        frozen.mode = LeverageMode::frozen;
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, micro, lv, grid, obs, frozen),
                             doctest::Contains("frozen"), ValidationError);
        CHECK_THROWS_WITH_AS(
            simulate_macro(snapshot.reference, 1.0, macro, lv, grid, obs, frozen),
            doctest::Contains("frozen"), ValidationError);

        MicroParams bad = micro;
        bad.rho_fv = 1.5;
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, bad, lv, grid, obs, options),
                             doctest::Contains("rho_fv"), ValidationError);
        bad = micro;
        bad.a = -0.1;
        CHECK_THROWS_AS(simulate_micro(snapshot, 1.0, bad, lv, grid, obs, options),
                        ValidationError);
        bad = micro;
        bad.variance.kappa = 0.0;
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, bad, lv, grid, obs, options),
                             doctest::Contains("kappa"), ValidationError);
        MacroParams mbad = macro;
        mbad.rho = -2.0;
        CHECK_THROWS_WITH_AS(
            simulate_macro(snapshot.reference, 1.0, mbad, lv, grid, obs, options),
            doctest::Contains("rho"), ValidationError);

        SimOptions tiny = options;
        tiny.paths = 1;
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 1.0, micro, lv, grid, obs, tiny),
                             doctest::Contains("two paths"), ValidationError);
        CHECK_THROWS_WITH_AS(simulate_micro(snapshot, 0.0, micro, lv, grid, obs, options),
                             doctest::Contains("index level"), ValidationError);
    }
}
