#pragma once

#include <array>
#include <cstdint>

namespace rollidx {

// Counter-based random numbers (Philox4x32-10).  Every normal increment in
// the Monte Carlo engine is addressed by (seed, path, step, stream, block),
// so any path can be regenerated in isolation: parallel scheduling, bump
// scenarios and reruns all see bit-identical Gaussian draws.

struct PhiloxKey {
    std::uint32_t k0, k1;
};

struct PhiloxCounter {
    std::uint32_t c0, c1, c2, c3;
};

// One 10-round Philox4x32 block: 128 pseudo-random bits from (counter, key).
std::array<std::uint32_t, 4> philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept;

// Inverse standard normal CDF (Wichura's PPND16 rational approximations),
// accurate to ~1e-15 over (0, 1).
double inverse_normal_cdf(double u);

// Pinned addressing scheme for simulation draws.  `stream` separates logical
// usages (per-asset shocks, orthogonal variance shocks, ...), `block` indexes
// 128-bit blocks within a (path, step, stream) cell.
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    // Two independent N(0,1) draws from one Philox block.
    std::array<double, 2> normal_pair(std::uint32_t path, std::uint32_t step,
                                      std::uint32_t stream, std::uint32_t block = 0) const noexcept;

    // Fills out[0..n) with N(0,1) draws for a (path, step, stream) cell.
    void fill_normals(std::uint32_t path, std::uint32_t step, std::uint32_t stream,
                      double* out, std::size_t n) const noexcept;

    std::uint64_t seed() const noexcept {
        return static_cast<std::uint64_t>(key_.k0) | (static_cast<std::uint64_t>(key_.k1) << 32);
    }

private:
    PhiloxKey key_;
};

} // namespace rollidx
