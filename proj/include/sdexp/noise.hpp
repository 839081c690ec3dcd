#pragma once

// Reproducible Wiener increments with one independent substream per path.
//
// The generator is pinned so that streams are stable across versions and
// platforms:
//
//  * Philox4x64-10 counter-based generator. The key is the pair
//    (master_seed, path_index); the counter advances once per 4-output
//    block, and block n (0-based) uses counter (n+1, 0, 0, 0). Multipliers
//    0xD2E7470EE14C6C93 / 0xCA5A826395121157, Weyl constants
//    0x9E3779B97F4A7C15 / 0xBB67AE8584CAA73B, 10 rounds. Raw outputs match
//    numpy.random.Philox(counter=0, key=[master_seed, path_index]) lane for
//    lane, including its pre-increment of the counter (known-answer vectors
//    are frozen in the test suite).
//  * A raw 64-bit word x maps to the open-interval uniform
//    u = ((x >> 11) + 0.5) * 2^-53.
//  * Standard normals come from the Wichura AS241 inverse normal CDF
//    (PPND16, double precision), not from std::normal_distribution, whose
//    output is implementation-defined.
//  * A Wiener increment over a step of length delta is sqrt(delta) * z.
//
// The tuple (master_seed, path_index, cursor) therefore fully determines
// every increment, and distinct path indices give independent streams.

#include <array>
#include <cmath>
#include <cstdint>

#include "sdexp/errors.hpp"

namespace sdexp {

namespace detail {

struct Philox4x64 {
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
        const unsigned __int128 product = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<std::uint64_t>(product >> 64);
        lo = static_cast<std::uint64_t>(product);
    }

    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> counter,
                                              std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            std::uint64_t hi0, lo0, hi1, lo1;
            mulhilo(kMul0, counter[0], hi0, lo0);
            mulhilo(kMul1, counter[2], hi1, lo1);
            counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
        }
        return counter;
    }
};

/// Wichura's AS241 PPND16: inverse of the standard normal CDF, accurate to
/// full double precision for p in (0, 1).
inline double normal_inv_cdf(double p) {
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        z = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        z = num / den;
    }
    return q < 0 ? -z : z;
}

} // namespace detail

class IncrementStream {
public:
    IncrementStream(std::uint64_t master_seed, std::uint64_t path_index)
        : key_{master_seed, path_index} {}

    std::uint64_t master_seed() const { return key_[0]; }
    std::uint64_t path_index() const { return key_[1]; }

    /// Increments consumed so far.
    std::uint64_t cursor() const { return cursor_; }

    /// Raw 64-bit generator word (one per increment); exposed for testing.
    std::uint64_t next_raw() {
        const std::uint64_t lane = cursor_ % 4;
        if (lane == 0)
            buffer_ = detail::Philox4x64::block({cursor_ / 4 + 1, 0, 0, 0}, key_);
        ++cursor_;
        return buffer_[lane];
    }

    /// Standard normal draw.
    double next_normal() {
        const double u = (static_cast<double>(next_raw() >> 11) + 0.5) * 0x1.0p-53;
        return detail::normal_inv_cdf(u);
    }

    /// Wiener increment over a step of length delta: Normal(0, delta).
    double next_increment(double delta) {
        if (!(delta > 0))
            throw DomainError("Wiener increment requires delta > 0");
        return std::sqrt(delta) * next_normal();
    }

private:
    std::array<std::uint64_t, 2> key_;
    std::uint64_t cursor_ = 0;
    std::array<std::uint64_t, 4> buffer_{};
};

inline IncrementStream make_stream(std::uint64_t master_seed, std::uint64_t path_index) {
    return IncrementStream(master_seed, path_index);
}

} // namespace sdexp
