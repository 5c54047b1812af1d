#include "rollidx/pde/localvol_grid.hpp"

#include "rollidx/core/csv.hpp"
#include "rollidx/core/errors.hpp"

#include <algorithm>

namespace rollidx::pde {

LocalVolGrid::LocalVolGrid(std::vector<double> times, std::vector<double> prices,
                           std::vector<std::vector<double>> values, double cap)
    : times_(std::move(times)), prices_(std::move(prices)), values_(std::move(values)), cap_(cap) {
    if (times_.empty() || prices_.empty())
        throw ValidationError("local vol grid: empty axis");
    if (!(cap_ > 0.0))
        throw ValidationError("local vol grid: cap must be positive");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (times_[i] <= times_[i - 1])
            throw ValidationError("local vol grid: time axis not strictly increasing");
    for (std::size_t i = 1; i < prices_.size(); ++i)
        if (prices_[i] <= prices_[i - 1])
            throw ValidationError("local vol grid: price axis not strictly increasing");
    if (values_.size() != times_.size())
        throw ValidationError("local vol grid: " + std::to_string(values_.size()) +
                              " value rows vs " + std::to_string(times_.size()) + " times");
    for (const auto& row : values_) {
        if (row.size() != prices_.size())
            throw ValidationError("local vol grid: row length mismatch");
        for (double v : row)
            if (!(v > 0.0) || v > cap_)
                throw ValidationError("local vol grid: value " + format_double(v) +
                                      " outside (0, cap=" + format_double(cap_) + "]");
    }
}

LocalVolGrid LocalVolGrid::constant(std::vector<double> times, std::vector<double> prices,
                                    double value, double cap) {
    std::vector<std::vector<double>> values(times.size(),
                                            std::vector<double>(prices.size(), value));
    return LocalVolGrid(std::move(times), std::move(prices), std::move(values), cap);
}

std::size_t LocalVolGrid::slab(double t) const {
    if (t <= times_.front()) return 0;
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

double LocalVolGrid::operator()(double t, double price) const {
    const std::vector<double>& row = values_[slab(t)];
    if (price <= prices_.front()) return row.front();
    if (price >= prices_.back()) return row.back();
    const auto it = std::upper_bound(prices_.begin(), prices_.end(), price);
    const std::size_t hi = static_cast<std::size_t>(it - prices_.begin());
    const std::size_t lo = hi - 1;
    const double w = (price - prices_[lo]) / (prices_[hi] - prices_[lo]);
    return row[lo] + w * (row[hi] - row[lo]);
}

void LocalVolGrid::scale_node(std::size_t slab_index, std::size_t price_index, double factor) {
    double& v = values_.at(slab_index).at(price_index);
    v = std::clamp(v * factor, kFloor, cap_);
}

} // namespace rollidx::pde
