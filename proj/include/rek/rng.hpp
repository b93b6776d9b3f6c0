#pragma once

// Pinned pseudo-random generator: xoshiro256** (Blackman & Vigna) with
// its 256-bit state expanded from a 64-bit seed by SplitMix64. Both are
// defined bit-exactly here so that a seed reproduces the same index
// sequence on every platform and standard library.

#include <cmath>
#include <cstdint>
#include <limits>

namespace rek {

/// SplitMix64 step; also used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of a sub-stream identified by `tag`, derived from a user seed.
constexpr std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t tag) noexcept {
    std::uint64_t s = seed ^ (tag * 0xd1b54a32d192ed03ULL);
    return splitmix64(s);
}

// Stream tags. Row and column draws of an extended Kaczmarz run come
// from separate streams so the row sequence does not depend on the
// column sequence.
inline constexpr std::uint64_t kRowStream = 0x524f57;  // "ROW"
inline constexpr std::uint64_t kColStream = 0x434f4c;  // "COL"

class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed = 0) noexcept : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return double((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate (Marsaglia polar method).
    double normal() noexcept {
        if (hasSpare_) {
            hasSpare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        hasSpare_ = true;
        return u * f;
    }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t seed_;
    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool hasSpare_ = false;
};

}  // namespace rek
