#include "rollidx/core/rng.hpp"

#include <cmath>
#include <limits>

namespace rollidx {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& x, PhiloxKey& key) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ key.k0, lo1, hi0 ^ x[3] ^ key.k1, lo0};
    key.k0 += kWeyl0;
    key.k1 += kWeyl1;
}

// Strictly inside (0,1): 53-bit mantissa centred on the half-step.
inline double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept {
    std::array<std::uint32_t, 4> x = {ctr.c0, ctr.c1, ctr.c2, ctr.c3};
    for (int round = 0; round < 10; ++round) philox_round(x, key);
    return x;
}

double inverse_normal_cdf(double u) {
    // PPND16: three rational approximations, relative error below 1e-15.
    const double q = u - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }

    double r = (q < 0.0) ? u : 1.0 - u;
    if (r <= 0.0)
        return (q < 0.0) ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return (q < 0.0) ? -value : value;
}

std::array<double, 2> NormalSource::normal_pair(std::uint32_t path, std::uint32_t step,
                                                std::uint32_t stream,
                                                std::uint32_t block) const noexcept {
    const auto bits = philox4x32({path, step, stream, block}, key_);
    return {inverse_normal_cdf(uniform_from_bits(bits[0], bits[1])),
            inverse_normal_cdf(uniform_from_bits(bits[2], bits[3]))};
}

void NormalSource::fill_normals(std::uint32_t path, std::uint32_t step, std::uint32_t stream,
                                double* out, std::size_t n) const noexcept {
    std::uint32_t block = 0;
    std::size_t i = 0;
    while (i < n) {
        const auto pair = normal_pair(path, step, stream, block++);
        out[i++] = pair[0];
        if (i < n) out[i++] = pair[1];
    }
}

} // namespace rollidx
