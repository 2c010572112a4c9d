#pragma once

#include <cstdint>
#include <stdexcept>

namespace qkd {

/// 64-bit avalanche mixer (the splitmix64 finalizer). Bijective, so distinct
/// inputs never collide.
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Counter-based per-round random stream.
///
/// Each protocol round owns an independent stream derived from the experiment
/// seed and the round number alone, so the same (seed, round) pair yields the
/// same variates no matter which worker evaluates it or in which order. The
/// stream itself is splitmix64 started from a hash of (seed, round).
class RoundRng {
  public:
    RoundRng(std::uint64_t seed, std::uint64_t round) {
        state_ = mix64(mix64(seed ^ 0x452821E638D01377ull) +
                       mix64(round ^ 0x13198A2E03707344ull));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    /// Uniform variate strictly inside (0, 1): the midpoints of a 2^53 grid.
    /// Never returning exactly 0 keeps zero-probability measurement outcomes
    /// impossible for every seed, not merely almost surely.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// Uniform index in 1..n via the multiply-shift reduction (bias < n/2^64).
    int uniform_index(int n) {
        if (n < 1) {
            throw std::invalid_argument("uniform_index: n must be at least 1");
        }
        const auto wide = static_cast<unsigned __int128>(next_u64()) *
                          static_cast<unsigned __int128>(n);
        return static_cast<int>(wide >> 64) + 1;
    }

    int uniform_bit() { return uniform_index(2) - 1; }

    bool bernoulli(double p) { return next_unit() < p; }

  private:
    std::uint64_t state_;
};

/// The determinism contract of the Monte Carlo runner: one reproducible,
/// order-independent stream per (seed, round) pair.
inline RoundRng derive_round_randomness(std::uint64_t seed, std::uint64_t round) {
    return RoundRng(seed, round);
}

/// Seed for the k-th run of a sweep, derived from the sweep's master seed.
inline std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t run_index) {
    return mix64(master_seed ^ mix64(run_index + 0xA4093822299F31D0ull));
}

} // namespace qkd
