#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rollidx::opt {

// Derivative-free minimization inside a box.  Objectives may return NaN or
// infinities; such points are treated as +inf and never win.

using Objective = std::function<double(const std::vector<double>&)>;

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dimension() const noexcept { return lower.size(); }
    void validate() const; // throws ValidationError on malformed boxes
    std::vector<double> clamp(std::vector<double> x) const;
};

struct OptResult {
    std::vector<double> x;
    double value = 0.0;
    long evaluations = 0;
    std::string stop_reason; // "budget" or "step_tolerance"
};

// Evolutionary global search: a parent population refreshed by single-point
// crossover plus one-coordinate Cauchy mutations, elitist selection.  Runs
// its exact evaluation budget (the final generation may be partial) and is
// fully determined by the seed.
struct EschOptions {
    int population = 40;       // surviving parents per generation
    int offspring = 60;        // candidates bred per generation
    long max_evaluations = 10000;
    std::uint64_t seed = 0;
    double mutation_scale = 0.1; // Cauchy scale as a fraction of box width
};

OptResult esch_minimize(const Objective& f, const Bounds& bounds, const EschOptions& options);

// Subspace-decomposed Nelder-Mead local search: coordinates are grouped by
// recent progress into blocks of 2..5, each block is polished by a bounded
// simplex search, and the trust steps are rescaled from the progress the
// sweep actually made.  Deterministic.
struct SubplexOptions {
    long max_evaluations = 10000;
    double initial_step_rel = 0.10; // first trust step, fraction of box width
    double x_tolerance = 1e-10;     // stop when steps collapse below this * width
    int min_subspace = 2;
    int max_subspace = 5;
    double inner_reduction = 0.25;  // simplex diameter target per inner solve
};

OptResult subplex_minimize(const Objective& f, const Bounds& bounds,
                           const std::vector<double>& start, const SubplexOptions& options);

// Global-then-local: the evolutionary stage explores the box, the simplex
// stage polishes its champion.  The report keeps both legs for diagnostics.
struct HybridOptions {
    EschOptions global;
    SubplexOptions local;
};

struct HybridReport {
    OptResult global;
    OptResult local;
};

OptResult hybrid_minimize(const Objective& f, const Bounds& bounds, const HybridOptions& options,
                          HybridReport* report = nullptr);

} // namespace rollidx::opt
