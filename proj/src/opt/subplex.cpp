#include "rollidx/opt/optimizers.hpp"

#include "rollidx/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rollidx::opt {

namespace {

double guarded(double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

struct BudgetExhausted {};

class Evaluator {
public:
    Evaluator(const Objective& f, long budget) : f_(f), budget_(budget) {}

    double operator()(const std::vector<double>& x) {
        if (count_ >= budget_) throw BudgetExhausted{};
        ++count_;
        return guarded(f_(x));
    }

    long count() const noexcept { return count_; }

private:
    const Objective& f_;
    long budget_;
    long count_ = 0;
};

struct Vertex {
    std::vector<double> coords; // subspace coordinates only
    double value;
};

// Bounded Nelder-Mead restricted to the coordinates in `subspace`.  The
// starting simplex is the current point plus one trust step per coordinate;
// the search stops once the simplex diameter has shrunk below `target` (or
// the budget throws).  Updates x/fx in place.
void nelder_mead_subspace(Evaluator& eval, const Bounds& bounds,
                          const std::vector<std::size_t>& subspace,
                          const std::vector<double>& steps, double reduction,
                          std::vector<double>& x, double& fx) {
    const std::size_t m = subspace.size();
    constexpr double alpha = 1.0; // reflection
    constexpr double beta = 0.5;  // contraction
    constexpr double gamma = 2.0; // expansion
    constexpr double delta = 0.5; // shrink

    auto clamp_coord = [&](std::size_t sub_i, double v) {
        const std::size_t j = subspace[sub_i];
        return std::min(std::max(v, bounds.lower[j]), bounds.upper[j]);
    };
    auto to_full = [&](const std::vector<double>& sub) {
        std::vector<double> full = x;
        for (std::size_t i = 0; i < m; ++i) full[subspace[i]] = sub[i];
        return full;
    };

    std::vector<Vertex> simplex;
    simplex.reserve(m + 1);
    {
        std::vector<double> base(m);
        for (std::size_t i = 0; i < m; ++i) base[i] = x[subspace[i]];
        simplex.push_back({base, fx});
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<double> v = base;
            v[i] = clamp_coord(i, v[i] + steps[subspace[i]]);
            if (v[i] == base[i]) // step left the box entirely; try the other side
                v[i] = clamp_coord(i, base[i] - steps[subspace[i]]);
            simplex.push_back({v, eval(to_full(v))});
        }
    }

    auto diameter = [&]() {
        double d = 0.0;
        for (std::size_t a = 1; a < simplex.size(); ++a) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                s += std::abs(simplex[a].coords[i] - simplex[0].coords[i]);
            d = std::max(d, s);
        }
        return d;
    };
    auto order = [&]() {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
    };

    order();
    const double initial_diameter = diameter();
    const double target = reduction * initial_diameter;

    // The simplex geometry bounds the iteration count on its own; this cap
    // only guards degenerate landscapes (plateaus of identical values).
    for (int it = 0; it < 200 * static_cast<int>(m) + 50; ++it) {
        if (diameter() <= target) break;

        std::vector<double> centroid(m, 0.0);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t i = 0; i < m; ++i) centroid[i] += simplex[a].coords[i] / double(m);
        const Vertex& worst = simplex[m];

        auto along = [&](double t) {
            std::vector<double> p(m);
            for (std::size_t i = 0; i < m; ++i)
                p[i] = clamp_coord(i, centroid[i] + t * (centroid[i] - worst.coords[i]));
            return p;
        };

        const std::vector<double> xr = along(alpha);
        const double fr = eval(to_full(xr));
        if (fr < simplex[0].value) {
            const std::vector<double> xe = along(gamma);
            const double fe = eval(to_full(xe));
            simplex[m] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        } else if (fr < simplex[m - 1].value) {
            simplex[m] = {xr, fr};
        } else {
            const bool outside = fr < worst.value;
            const std::vector<double> xc = along(outside ? beta : -beta);
            const double fc = eval(to_full(xc));
            if (fc < std::min(fr, worst.value)) {
                simplex[m] = {xc, fc};
            } else {
                // Shrink everything toward the best vertex.
                for (std::size_t a = 1; a <= m; ++a) {
                    for (std::size_t i = 0; i < m; ++i)
                        simplex[a].coords[i] = clamp_coord(
                            i, simplex[0].coords[i] +
                                   delta * (simplex[a].coords[i] - simplex[0].coords[i]));
                    simplex[a].value = eval(to_full(simplex[a].coords));
                }
            }
        }
        order();
    }

    if (simplex[0].value < fx) {
        for (std::size_t i = 0; i < m; ++i) x[subspace[i]] = simplex[0].coords[i];
        fx = simplex[0].value;
    }
}

// Greedy partition of the progress-ordered coordinates into blocks of
// [min_subspace, max_subspace], never leaving a remainder smaller than
// min_subspace (unless the whole problem is smaller than that).
std::vector<std::vector<std::size_t>> partition(const std::vector<std::size_t>& ordered,
                                                int min_ns, int max_ns) {
    std::vector<std::vector<std::size_t>> blocks;
    std::size_t pos = 0;
    const std::size_t n = ordered.size();
    while (pos < n) {
        std::size_t remaining = n - pos;
        std::size_t take;
        if (remaining <= static_cast<std::size_t>(max_ns)) {
            take = remaining;
        } else if (remaining - static_cast<std::size_t>(max_ns) >=
                   static_cast<std::size_t>(min_ns)) {
            take = static_cast<std::size_t>(max_ns);
        } else {
            take = remaining - static_cast<std::size_t>(min_ns);
        }
        blocks.emplace_back(ordered.begin() + static_cast<std::ptrdiff_t>(pos),
                            ordered.begin() + static_cast<std::ptrdiff_t>(pos + take));
        pos += take;
    }
    return blocks;
}

} // namespace

OptResult subplex_minimize(const Objective& f, const Bounds& bounds,
                           const std::vector<double>& start, const SubplexOptions& opt) {
    bounds.validate();
    const std::size_t n = bounds.dimension();
    if (start.size() != n)
        throw ValidationError("subplex_minimize: start point dimension mismatch");
    if (opt.max_evaluations < 1 || opt.initial_step_rel <= 0.0 || opt.x_tolerance <= 0.0 ||
        opt.min_subspace < 1 || opt.max_subspace < opt.min_subspace ||
        !(opt.inner_reduction > 0.0 && opt.inner_reduction < 1.0))
        throw ValidationError("subplex_minimize: invalid options");

    std::vector<double> width(n), steps(n);
    double width_l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        width[i] = bounds.upper[i] - bounds.lower[i];
        steps[i] = opt.initial_step_rel * width[i];
        width_l1 += width[i];
    }

    Evaluator eval(f, opt.max_evaluations);
    std::vector<double> x = bounds.clamp(start);
    double fx = std::numeric_limits<double>::infinity();
    std::string stop_reason = "step_tolerance";

    try {
        fx = eval(x);
        std::vector<double> delta_x(n, 0.0);
        for (;;) {
            // Coordinates that moved most recently lead the decomposition.
            std::vector<std::size_t> ordered(n);
            std::iota(ordered.begin(), ordered.end(), std::size_t{0});
            std::stable_sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(delta_x[a]) > std::abs(delta_x[b]);
            });

            const std::vector<double> x_before = x;
            for (const auto& block : partition(ordered, opt.min_subspace, opt.max_subspace))
                nelder_mead_subspace(eval, bounds, block, steps, opt.inner_reduction, x, fx);

            double progress_l1 = 0.0, step_l1 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                delta_x[i] = x[i] - x_before[i];
                progress_l1 += std::abs(delta_x[i]);
                step_l1 += std::abs(steps[i]);
            }

            if (progress_l1 == 0.0) {
                // Nothing moved: tighten the trust region and try again.
                // Termination is left to the step-size test below, so a
                // stalled sweep can never strand the search at coarse steps.
                for (double& s : steps) s *= opt.inner_reduction;
            } else {
                const double scale =
                    std::min(std::max(progress_l1 / step_l1, 0.1), 10.0);
                for (std::size_t i = 0; i < n; ++i) {
                    steps[i] = std::abs(steps[i]) * scale;
                    if (delta_x[i] < 0.0) steps[i] = -steps[i]; // lead with the winning side
                }
            }

            double step_scale = 0.0;
            for (std::size_t i = 0; i < n; ++i) step_scale += std::abs(steps[i]);
            if (step_scale <= opt.x_tolerance * width_l1) {
                stop_reason = "step_tolerance";
                break;
            }
        }
    } catch (const BudgetExhausted&) {
        stop_reason = "budget";
    }

    return {x, fx, eval.count(), stop_reason};
}

OptResult hybrid_minimize(const Objective& f, const Bounds& bounds, const HybridOptions& options,
                          HybridReport* report) {
    const OptResult global = esch_minimize(f, bounds, options.global);
    const OptResult local = subplex_minimize(f, bounds, global.x, options.local);
    // The polish stage starts from the champion, so it can only improve it;
    // still, keep whichever point actually measured best.
    const OptResult& final_leg = local.value <= global.value ? local : global;
    if (report != nullptr) {
        report->global = global;
        report->local = local;
    }
    OptResult out = final_leg;
    out.evaluations = global.evaluations + local.evaluations;
    return out;
}

} // namespace rollidx::opt
