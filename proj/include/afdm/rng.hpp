// rng.hpp - deterministic, splittable random streams
//
// Monte Carlo trials draw from independent streams keyed by
// (master seed, stream id, counter), so results do not depend on
// execution order or thread count. xoshiro256++ core, Box-Muller
// normals with an explicit u64->double mapping; output is identical
// across platforms.
#pragma once

#include "afdm/types.hpp"

#include <cstdint>

namespace afdm {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    // Independent stream for (master, stream id, counter). Used for
    // per-trial seeding in Monte Carlo loops.
    static Rng stream(std::uint64_t master, std::uint64_t stream_id,
                      std::uint64_t counter = 0) {
        std::uint64_t sm = master;
        std::uint64_t a = detail::splitmix64(sm);
        sm = a ^ (stream_id * 0xD2B74407B1CE6E93ULL + 0x9E3779B97F4A7C15ULL);
        std::uint64_t b = detail::splitmix64(sm);
        sm = b ^ (counter * 0xCA5A826395121157ULL + 0x165667B19E3779F9ULL);
        return Rng(detail::splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    bool bit() { return (next_u64() >> 63) != 0; }

    // Standard normal (Box-Muller, pair cached).
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    // Circular complex Gaussian with E|z|^2 = var.
    cplx cgauss(double var = 1.0) {
        const double s = std::sqrt(var / 2.0);
        const double re = s * gauss();
        const double im = s * gauss();
        return {re, im};
    }

private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace afdm
