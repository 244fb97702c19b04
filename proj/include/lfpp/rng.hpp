#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lfpp {

/// Philox4x32-10 counter-based block cipher. A 128-bit counter and 64-bit key
/// map to 128 pseudo-random bits; any (counter, key) cell can be evaluated
/// independently, which is what makes replicas and spectral modes reproducible
/// regardless of evaluation order or thread placement.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
            const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
            const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// Identifies independent random streams hanging off one master seed.
enum class RngStream : std::uint32_t {
    FieldModes = 1,
    Bootstrap = 2,
    PairSampling = 3,
    Generic = 4,
};

/// One (seed, replica, stream) cell of the counter RNG. `index` selects the
/// draw within the stream; each index yields two independent N(0,1) values or
/// two U(0,1) values.
struct CounterRng {
    std::uint64_t seed = 0;
    std::uint32_t replica = 0;
    std::uint32_t stream = 0;

    CounterRng(std::uint64_t seed_, std::uint32_t replica_, RngStream stream_)
        : seed(seed_), replica(replica_), stream(std::uint32_t(stream_)) {}
    CounterRng(std::uint64_t seed_, std::uint32_t replica_, std::uint32_t stream_)
        : seed(seed_), replica(replica_), stream(stream_) {}

    std::array<std::uint32_t, 4> raw(std::uint64_t index) const {
        return Philox4x32::block({std::uint32_t(index), std::uint32_t(index >> 32), replica, stream},
                                 {std::uint32_t(seed), std::uint32_t(seed >> 32)});
    }

    /// Two uniforms in (0,1), never exactly 0 or 1.
    std::array<double, 2> uniform_pair(std::uint64_t index) const {
        const auto w = raw(index);
        const std::uint64_t a = (std::uint64_t(w[0]) << 32) | w[1];
        const std::uint64_t b = (std::uint64_t(w[2]) << 32) | w[3];
        const double u = (double(a >> 11) + 0.5) * 0x1.0p-53;
        const double v = (double(b >> 11) + 0.5) * 0x1.0p-53;
        return {u, v};
    }

    /// Two independent standard Gaussians (Box-Muller).
    std::array<double, 2> gaussian_pair(std::uint64_t index) const {
        const auto [u, v] = uniform_pair(index);
        const double rho = std::sqrt(-2.0 * std::log(u));
        return {rho * std::cos(2.0 * M_PI * v), rho * std::sin(2.0 * M_PI * v)};
    }

    double uniform(std::uint64_t index) const { return uniform_pair(index)[0]; }
    double gaussian(std::uint64_t index) const { return gaussian_pair(index)[0]; }

    /// Uniform integer in [0, bound) by 64-bit modular reduction; bias is
    /// negligible for bound << 2^64.
    std::uint64_t uniform_int(std::uint64_t index, std::uint64_t bound) const {
        const auto w = raw(index);
        const std::uint64_t a = (std::uint64_t(w[0]) << 32) | w[1];
        return a % bound;
    }
};

}  // namespace lfpp
