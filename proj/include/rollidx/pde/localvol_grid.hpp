#pragma once

#include <cstddef>
#include <vector>

namespace rollidx::pde {

// Local-volatility values on a (time x normalized-price) lattice.
// Interpolation contract: piecewise-constant in time (the value at slab
// start t_m applies on [t_m, t_{m+1})), piecewise-linear in the price
// coordinate, flat extrapolation on all sides.  Values are strictly positive
// and capped (default 5.0 = 500% lognormal vol) so multiplicative calibration
// updates cannot run away.
class LocalVolGrid {
public:
    LocalVolGrid(std::vector<double> times, std::vector<double> prices,
                 std::vector<std::vector<double>> values, double cap = 5.0);

    static LocalVolGrid constant(std::vector<double> times, std::vector<double> prices,
                                 double value, double cap = 5.0);

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& prices() const noexcept { return prices_; }
    const std::vector<std::vector<double>>& values() const noexcept { return values_; }
    double cap() const noexcept { return cap_; }

    double operator()(double t, double price) const;

    // Index of the slab covering t (last slab start <= t; first slab for
    // earlier queries).
    std::size_t slab(double t) const;

    // Multiplies node (slab, price index) by `factor`, clamped into
    // [floor, cap].  Used by the fixed-point calibration update.
    void scale_node(std::size_t slab, std::size_t price_index, double factor);

    static constexpr double kFloor = 1e-6;

private:
    std::vector<double> times_;
    std::vector<double> prices_;
    std::vector<std::vector<double>> values_; // [time][price]
    double cap_;
};

} // namespace rollidx::pde
