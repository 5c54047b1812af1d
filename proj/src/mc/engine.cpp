#include "rollidx/mc/engine.hpp"

#include "rollidx/core/errors.hpp"
#include "rollidx/core/parallel.hpp"
#include "rollidx/core/rng.hpp"
#include "rollidx/index/roll.hpp"
#include "rollidx/lvcalib/lv_calibration.hpp"
#include "rollidx/mc/correlation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace rollidx::mc {

namespace {

void validate_cir(const CirParams& p) {
    if (!(p.kappa > 0.0) || !(p.theta > 0.0) || p.chi < 0.0 || p.v0 < 0.0)
        throw ValidationError("variance process: need kappa > 0, theta > 0, chi >= 0, v0 >= 0");
}

void validate_grid(Date reference, const std::vector<Date>& grid) {
    if (grid.size() < 2)
        throw ValidationError("simulation grid needs at least two dates");
    if (grid.front() != reference)
        throw ValidationError("simulation grid must start at the market reference date " +
                              reference.to_iso());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!is_business_day(grid[i]))
            throw ValidationError("simulation grid: " + grid[i].to_iso() +
                                  " is not a business day");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw ValidationError("simulation grid not strictly increasing at " +
                                  grid[i].to_iso());
    }
}

std::size_t grid_position(const std::vector<Date>& grid, Date d, const char* what) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), d);
    if (it == grid.end() || *it != d)
        throw ValidationError(std::string(what) + " date " + d.to_iso() +
                              " is not on the simulation grid");
    return static_cast<std::size_t>(it - grid.begin());
}

// Per-step recording plan: which observation slots fire after stepping onto
// grid[s].
struct Recording {
    std::size_t slot;  // row in index_obs / futures_obs
    std::size_t asset; // only for futures observations
};

struct ObservationPlan {
    std::vector<std::vector<Recording>> index_at;   // [grid pos] -> slots
    std::vector<std::vector<Recording>> futures_at; // [grid pos] -> slots
    std::size_t extrema_from = 0, extrema_to = 0;
    bool track = false;
};

ObservationPlan build_plan(const Observables& obs, const std::vector<Date>& grid,
                           const market::FuturesCurve* curve) {
    ObservationPlan plan;
    plan.index_at.resize(grid.size());
    plan.futures_at.resize(grid.size());
    for (std::size_t i = 0; i < obs.index_dates.size(); ++i)
        plan.index_at[grid_position(grid, obs.index_dates[i], "index observation")].push_back(
            {i, 0});
    for (std::size_t i = 0; i < obs.futures_dates.size(); ++i) {
        const auto& [date, asset] = obs.futures_dates[i];
        if (curve == nullptr)
            throw ValidationError("futures observations are not available in an index-only "
                                  "simulation");
        if (asset >= curve->size())
            throw ValidationError("futures observation references maturity index " +
                                  std::to_string(asset) + " beyond the curve");
        if (curve->maturity(asset) < date)
            throw ValidationError("futures observation on " + date.to_iso() +
                                  " is past the contract maturity " +
                                  curve->maturity(asset).to_iso());
        plan.futures_at[grid_position(grid, date, "futures observation")].push_back({i, asset});
    }
    plan.track = obs.track_extrema;
    if (plan.track) {
        plan.extrema_from =
            obs.extrema_from ? grid_position(grid, *obs.extrema_from, "extrema window") : 0;
        plan.extrema_to = obs.extrema_to ? grid_position(grid, *obs.extrema_to, "extrema window")
                                         : grid.size() - 1;
        if (plan.extrema_to < plan.extrema_from)
            throw ValidationError("extrema window ends before it starts");
    }
    return plan;
}

long surface_fallbacks(const ParticleEstimate& est) {
    return (est.degenerate ? 1 : 0) + est.floored_nodes;
}

} // namespace

SimResult simulate_micro(const market::MarketSnapshot& snapshot, double index_level,
                         const MicroParams& params, const pde::LocalVolGrid& spot_lv,
                         const std::vector<Date>& grid, const Observables& observables,
                         const SimOptions& options) {
    validate_grid(snapshot.reference, grid);
    validate_cir(params.variance);
    if (!(params.a >= 0.0) || !(params.beta >= 0.0))
        throw ValidationError("micro simulation: a and beta must be non-negative");
    if (!(params.rho_fv >= -1.0 && params.rho_fv <= 1.0))
        throw ValidationError("micro simulation: rho_fv must lie in [-1, 1]");
    if (!(index_level > 0.0))
        throw ValidationError("micro simulation: index level must be positive");
    if (options.paths < 2)
        throw ValidationError("micro simulation: need at least two paths");
    if (options.mode == LeverageMode::pure_sv)
        throw ValidationError("micro simulation: pure-SV mode is only defined for the index "
                              "model");
    if (options.mode == LeverageMode::frozen &&
        (options.frozen == nullptr || options.frozen->grid != grid))
        throw ValidationError("micro simulation: frozen mode needs a leverage surface built on "
                              "this exact grid");

    const market::FuturesCurve& curve = snapshot.futures;
    const std::size_t m_assets = curve.size();
    if (options.mode == LeverageMode::frozen) {
        if (options.frozen->per_step.size() != grid.size() - 1)
            throw ValidationError("micro simulation: frozen leverage surface has the wrong "
                                  "number of steps");
        for (const auto& row : options.frozen->per_step)
            if (row.size() != m_assets)
                throw ValidationError("micro simulation: frozen leverage surface was built for "
                                      "a different curve");
    }
    const std::size_t n = options.paths;
    const std::size_t steps = grid.size() - 1;

    std::vector<double> t_mat(m_assets), f0(m_assets);
    for (std::size_t i = 0; i < m_assets; ++i) {
        t_mat[i] = year_fraction(snapshot.reference, curve.maturity(i));
        f0[i] = curve.price(i);
    }
    const Matrix chol = cholesky_lower(futures_correlation(params.beta, t_mat));

    // Deterministic end-of-day roll schedule, validated up front.
    std::vector<std::size_t> front(steps);
    std::vector<double> alpha(steps);
    {
        index_engine::RollState state = index_engine::initial_roll_state(curve, grid.front());
        for (std::size_t s = 0; s < steps; ++s) {
            index_engine::advance_roll_state_eod(state, grid[s], m_assets);
            index_engine::detail::check_contract_alive(curve, state.front, grid[s + 1]);
            if (state.alpha < 1.0)
                index_engine::detail::check_contract_alive(curve, state.front + 1, grid[s + 1]);
            front[s] = state.front;
            alpha[s] = state.alpha;
        }
    }

    // Asset i is stepped while the next grid date is at or before maturity.
    std::vector<std::size_t> last_step(m_assets);
    for (std::size_t i = 0; i < m_assets; ++i) {
        std::size_t s = 0;
        while (s < steps && grid[s + 1] <= curve.maturity(i)) ++s;
        last_step[i] = s; // steps [0, last_step) are simulated
    }

    const ObservationPlan plan = build_plan(observables, grid, &curve);

    SimResult result;
    result.grid = grid;
    result.index_obs_dates = observables.index_dates;
    result.index_obs.assign(observables.index_dates.size(), std::vector<double>(n));
    result.futures_obs.assign(observables.futures_dates.size(), std::vector<double>(n));
    if (plan.track) {
        result.index_min.assign(n, 0.0);
        result.index_max.assign(n, 0.0);
    }
    if (options.mode == LeverageMode::particle) {
        result.leverage.grid = grid;
        result.leverage.per_step.assign(steps, std::vector<ParticleEstimate>(m_assets));
    }

    // State, path-major.
    std::vector<double> fut(n * m_assets), var(n * m_assets), index(n, index_level);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t i = 0; i < m_assets; ++i) {
            fut[p * m_assets + i] = f0[i];
            var[p * m_assets + i] = params.variance.v0;
        }

    const NormalSource normals(options.seed);
    const double rho = params.rho_fv;
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const CirParams& cir = params.variance;
    std::atomic<long> degenerate_baskets{0};

    // Observations dated at the reference itself.
    for (const Recording& rec : plan.index_at[0])
        std::fill(result.index_obs[rec.slot].begin(), result.index_obs[rec.slot].end(),
                  index_level);
    for (const Recording& rec : plan.futures_at[0])
        std::fill(result.futures_obs[rec.slot].begin(), result.futures_obs[rec.slot].end(),
                  f0[rec.asset]);
    if (plan.track && plan.extrema_from == 0) {
        std::fill(result.index_min.begin(), result.index_min.end(), index_level);
        std::fill(result.index_max.begin(), result.index_max.end(), index_level);
    }

    std::vector<double> cross_x(n), cross_v(n);
    std::vector<const ParticleEstimate*> estimate(m_assets, nullptr);

    for (std::size_t s = 0; s < steps; ++s) {
        const double t = year_fraction(snapshot.reference, grid[s]);
        const double dt = year_fraction(grid[s], grid[s + 1]);
        const double sq_dt = std::sqrt(dt);

        // Per-asset precomputes for the factor mapping at time t.
        std::vector<double> floor_price(m_assets), emat(m_assets);
        for (std::size_t i = 0; i < m_assets; ++i) {
            floor_price[i] = f0[i] * (1.0 - std::exp(-params.a * (t_mat[i] - t)));
            emat[i] = std::exp(params.a * (t_mat[i] - t));
        }

        for (std::size_t i = 0; i < m_assets; ++i) {
            estimate[i] = nullptr;
            if (s >= last_step[i]) continue;
            if (options.mode == LeverageMode::particle) {
                for (std::size_t p = 0; p < n; ++p) {
                    cross_x[p] = fut[p * m_assets + i];
                    cross_v[p] = var[p * m_assets + i];
                }
                ParticleEstimate est =
                    estimate_conditional_expectation(cross_x, cross_v, options.particle);
                result.estimator_fallbacks += surface_fallbacks(est);
                result.leverage.per_step[s][i] = std::move(est);
                estimate[i] = &result.leverage.per_step[s][i];
            } else {
                const ParticleEstimate& est = options.frozen->per_step[s][i];
                if (est.nodes.empty())
                    throw ValidationError("frozen leverage surface is missing step " +
                                          std::to_string(s) + ", asset " + std::to_string(i));
                estimate[i] = &est;
            }
        }

        const std::size_t fr = front[s];
        const double al = alpha[s];

        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            std::vector<double> eta(m_assets), zeta(m_assets), zf(m_assets);
            for (std::size_t p = begin; p < end; ++p) {
                double* f_row = fut.data() + p * m_assets;
                double* v_row = var.data() + p * m_assets;

                for (std::size_t i = 0; i < m_assets; ++i) {
                    const auto pair = normals.normal_pair(static_cast<std::uint32_t>(p),
                                                          static_cast<std::uint32_t>(s),
                                                          static_cast<std::uint32_t>(i));
                    eta[i] = pair[0];
                    zeta[i] = pair[1];
                }
                for (std::size_t i = 0; i < m_assets; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j <= i; ++j) acc += chol[i][j] * eta[j];
                    zf[i] = acc;
                }

                const double old_front = f_row[fr];
                const double old_second = al >= 1.0 ? 0.0 : f_row[fr + 1];

                for (std::size_t i = 0; i < m_assets; ++i) {
                    if (s >= last_step[i]) continue;
                    const double fi = f_row[i];
                    const double vplus = std::max(v_row[i], 0.0);

                    const double k = 1.0 - emat[i] * (1.0 - fi / f0[i]);
                    const double lhat = std::max((fi - floor_price[i]) * spot_lv(t, k), 1e-8);
                    const double cond_var = (*estimate[i])(fi);
                    f_row[i] = fi + lhat * std::sqrt(vplus / cond_var) * sq_dt * zf[i];

                    const double zv = rho * zf[i] + rho_perp * zeta[i];
                    v_row[i] += cir.kappa * (cir.theta - vplus) * dt +
                                cir.chi * std::sqrt(vplus) * sq_dt * zv;
                }

                // Same step functions as the deterministic replay, so a
                // simulated futures book replays to the simulated index
                // bit for bit.
                if (al >= 1.0) {
                    if (old_front > 0.0 && f_row[fr] > 0.0) {
                        index[p] =
                            index_engine::step_non_rolling(index[p], old_front, f_row[fr]);
                    } else {
                        degenerate_baskets.fetch_add(1, std::memory_order_relaxed);
                    }
                } else {
                    const double basket0 = al * old_front + (1.0 - al) * old_second;
                    const double basket1 = al * f_row[fr] + (1.0 - al) * f_row[fr + 1];
                    if (basket0 > 0.0 && basket1 > 0.0) {
                        index[p] = index_engine::step_rolling(index[p], al, old_front,
                                                              old_second, f_row[fr],
                                                              f_row[fr + 1]);
                    } else {
                        degenerate_baskets.fetch_add(1, std::memory_order_relaxed);
                    }
                }

                if (plan.track) {
                    const std::size_t pos = s + 1;
                    if (pos == plan.extrema_from) {
                        result.index_min[p] = result.index_max[p] = index[p];
                    } else if (pos > plan.extrema_from && pos <= plan.extrema_to) {
                        result.index_min[p] = std::min(result.index_min[p], index[p]);
                        result.index_max[p] = std::max(result.index_max[p], index[p]);
                    }
                }
                for (const Recording& rec : plan.index_at[s + 1])
                    result.index_obs[rec.slot][p] = index[p];
                for (const Recording& rec : plan.futures_at[s + 1])
                    result.futures_obs[rec.slot][p] = f_row[rec.asset];
            }
        });
    }

    result.degenerate_baskets = degenerate_baskets.load();
    if (observables.record_final_variance) {
        result.final_variance.assign(m_assets, std::vector<double>(n));
        for (std::size_t i = 0; i < m_assets; ++i)
            for (std::size_t p = 0; p < n; ++p)
                result.final_variance[i][p] = var[p * m_assets + i];
    }
    return result;
}

SimResult simulate_macro(Date reference, double index_level, const MacroParams& params,
                         const pde::LocalVolGrid& index_lv, const std::vector<Date>& grid,
                         const Observables& observables, const SimOptions& options) {
    validate_grid(reference, grid);
    validate_cir(params.variance);
    if (!(params.rho >= -1.0 && params.rho <= 1.0))
        throw ValidationError("macro simulation: rho must lie in [-1, 1]");
    if (!(index_level > 0.0))
        throw ValidationError("macro simulation: index level must be positive");
    if (options.paths < 2)
        throw ValidationError("macro simulation: need at least two paths");
    if (options.mode == LeverageMode::frozen &&
        (options.frozen == nullptr || options.frozen->grid != grid))
        throw ValidationError("macro simulation: frozen mode needs a leverage surface built on "
                              "this exact grid");
    if (options.mode == LeverageMode::frozen) {
        if (options.frozen->per_step.size() != grid.size() - 1)
            throw ValidationError("macro simulation: frozen leverage surface has the wrong "
                                  "number of steps");
        for (const auto& row : options.frozen->per_step)
            if (row.empty())
                throw ValidationError("macro simulation: frozen leverage surface has an empty "
                                      "step");
    }

    const std::size_t n = options.paths;
    const std::size_t steps = grid.size() - 1;
    const ObservationPlan plan = build_plan(observables, grid, nullptr);

    SimResult result;
    result.grid = grid;
    result.index_obs_dates = observables.index_dates;
    result.index_obs.assign(observables.index_dates.size(), std::vector<double>(n));
    if (plan.track) {
        result.index_min.assign(n, 0.0);
        result.index_max.assign(n, 0.0);
    }
    if (options.mode == LeverageMode::particle) {
        result.leverage.grid = grid;
        result.leverage.per_step.assign(steps, std::vector<ParticleEstimate>(1));
    }

    std::vector<double> index(n, index_level), var(n, params.variance.v0);

    const NormalSource normals(options.seed);
    const double rho = params.rho;
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const CirParams& cir = params.variance;

    for (const Recording& rec : plan.index_at[0])
        std::fill(result.index_obs[rec.slot].begin(), result.index_obs[rec.slot].end(),
                  index_level);
    if (plan.track && plan.extrema_from == 0) {
        std::fill(result.index_min.begin(), result.index_min.end(), index_level);
        std::fill(result.index_max.begin(), result.index_max.end(), index_level);
    }

    const ParticleEstimate* estimate = nullptr;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = year_fraction(reference, grid[s]);
        const double dt = year_fraction(grid[s], grid[s + 1]);
        const double sq_dt = std::sqrt(dt);

        estimate = nullptr;
        if (options.mode == LeverageMode::particle) {
            ParticleEstimate est = estimate_conditional_expectation(index, var, options.particle);
            result.estimator_fallbacks += surface_fallbacks(est);
            result.leverage.per_step[s][0] = std::move(est);
            estimate = &result.leverage.per_step[s][0];
        } else if (options.mode == LeverageMode::frozen) {
            estimate = &options.frozen->per_step[s][0];
            if (estimate->nodes.empty())
                throw ValidationError("frozen leverage surface is missing step " +
                                      std::to_string(s));
        }

        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto pair = normals.normal_pair(static_cast<std::uint32_t>(p),
                                                      static_cast<std::uint32_t>(s), 0);
                const double z = pair[0];
                const double vplus = std::max(var[p], 0.0);

                double sigma;
                if (options.mode == LeverageMode::pure_sv) {
                    sigma = std::sqrt(vplus);
                } else {
                    const double lv = index_lv(t, index[p] / index_level);
                    sigma = lv * std::sqrt(vplus / (*estimate)(index[p]));
                }
                // Log step: exactly driftless for any sigma known at the
                // start of the step, and the level stays positive.
                index[p] *= std::exp(sigma * sq_dt * z - 0.5 * sigma * sigma * dt);

                const double zv = rho * z + rho_perp * pair[1];
                var[p] += cir.kappa * (cir.theta - vplus) * dt +
                          cir.chi * std::sqrt(vplus) * sq_dt * zv;

                if (plan.track) {
                    const std::size_t pos = s + 1;
                    if (pos == plan.extrema_from) {
                        result.index_min[p] = result.index_max[p] = index[p];
                    } else if (pos > plan.extrema_from && pos <= plan.extrema_to) {
                        result.index_min[p] = std::min(result.index_min[p], index[p]);
                        result.index_max[p] = std::max(result.index_max[p], index[p]);
                    }
                }
                for (const Recording& rec : plan.index_at[s + 1])
                    result.index_obs[rec.slot][p] = index[p];
            }
        });
    }
    if (observables.record_final_variance) result.final_variance.assign(1, var);
    return result;
}

} // namespace rollidx::mc
