#include "rollidx/opt/optimizers.hpp"

#include "rollidx/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rollidx::opt {

void Bounds::validate() const {
    if (lower.empty() || lower.size() != upper.size())
        throw ValidationError("optimizer bounds: lower/upper must be non-empty and equal length");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw ValidationError("optimizer bounds: need finite lower < upper per coordinate");
}

std::vector<double> Bounds::clamp(std::vector<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::min(std::max(x[i], lower[i]), upper[i]);
    return x;
}

namespace {

double guarded(double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

struct Individual {
    std::vector<double> x;
    double value;
    long birth; // stable tie-break: earlier individuals win ties
};

} // namespace

OptResult esch_minimize(const Objective& f, const Bounds& bounds, const EschOptions& opt) {
    bounds.validate();
    const std::size_t n = bounds.dimension();
    if (opt.population < 1 || opt.offspring < 1 || opt.max_evaluations < 1 ||
        opt.mutation_scale <= 0.0)
        throw ValidationError("esch_minimize: population, offspring, budget and mutation scale "
                              "must be positive");

    std::mt19937_64 gen(opt.seed);
    auto unif = [&gen]() {
        // Fixed 53-bit mapping; keeps the draw sequence independent of any
        // library distribution internals.
        return static_cast<double>(gen() >> 11) * 0x1p-53;
    };
    auto pick_index = [&](std::size_t count) {
        return std::min(count - 1, static_cast<std::size_t>(unif() * static_cast<double>(count)));
    };

    std::vector<double> width(n);
    for (std::size_t i = 0; i < n; ++i) width[i] = bounds.upper[i] - bounds.lower[i];

    long evals = 0;
    long births = 0;
    auto evaluate = [&](const std::vector<double>& x) {
        ++evals;
        return guarded(f(x));
    };

    // Initial population, uniform over the box; the budget applies from the
    // very first evaluation.
    std::vector<Individual> parents;
    parents.reserve(static_cast<std::size_t>(opt.population));
    for (int p = 0; p < opt.population && evals < opt.max_evaluations; ++p) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = bounds.lower[i] + width[i] * unif();
        const double value = evaluate(x);
        parents.push_back({std::move(x), value, births++});
    }

    auto best_of = [](const std::vector<Individual>& pop) {
        const Individual* best = &pop.front();
        for (const Individual& ind : pop)
            if (ind.value < best->value || (ind.value == best->value && ind.birth < best->birth))
                best = &ind;
        return best;
    };

    while (evals < opt.max_evaluations) {
        std::vector<Individual> pool = parents;
        pool.reserve(pool.size() + static_cast<std::size_t>(opt.offspring));
        for (int c = 0; c < opt.offspring && evals < opt.max_evaluations; ++c) {
            const std::size_t ia = pick_index(parents.size());
            std::size_t ib = ia;
            if (parents.size() > 1)
                while (ib == ia) ib = pick_index(parents.size());

            std::vector<double> child = parents[ia].x;
            if (n >= 2) {
                // Single-point crossover: head from one parent, tail from
                // the other.
                const std::size_t cut = 1 + std::min(n - 2, static_cast<std::size_t>(
                                                                unif() * static_cast<double>(n - 1)));
                for (std::size_t i = cut; i < n; ++i) child[i] = parents[ib].x[i];
            }
            // Heavy-tailed mutation of a single coordinate.
            const std::size_t j = pick_index(n);
            const double kick = opt.mutation_scale * width[j] *
                                std::tan(M_PI * (unif() - 0.5));
            child[j] = std::min(std::max(child[j] + kick, bounds.lower[j]), bounds.upper[j]);

            const double value = evaluate(child);
            pool.push_back({std::move(child), value, births++});
        }

        // Elitist survival of the fittest `population`, ties to the elder.
        std::stable_sort(pool.begin(), pool.end(), [](const Individual& a, const Individual& b) {
            if (a.value != b.value) return a.value < b.value;
            return a.birth < b.birth;
        });
        if (pool.size() > static_cast<std::size_t>(opt.population))
            pool.resize(static_cast<std::size_t>(opt.population));
        parents = std::move(pool);
    }

    const Individual* best = best_of(parents);
    return {best->x, best->value, evals, "budget"};
}

} // namespace rollidx::opt
