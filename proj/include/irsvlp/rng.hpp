#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace irsvlp {

/// Deterministic random stream. The generator (mt19937_64) and both draw
/// algorithms are fully specified here, so a given seed produces the same
/// sequence on every platform and in every build.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1): top 53 bits of the raw draw.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (two uniforms per draw, no caching).
    double gaussian() {
        const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
        const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  private:
    std::mt19937_64 gen_;
};

namespace detail {
inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Mixes a tuple of stream coordinates into one 64-bit seed.
inline uint64_t mix_seed(uint64_t master, uint64_t purpose, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t state = master;
    uint64_t h = splitmix64(state);
    state ^= purpose + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(state);
    state ^= a * 0xff51afd7ed558ccdULL + 1;
    h ^= splitmix64(state);
    state ^= b * 0xc4ceb9fe1a85ec53ULL + 2;
    h ^= splitmix64(state);
    state ^= c + 3;
    h ^= splitmix64(state);
    return h;
}
} // namespace detail

/// Independent substream for one (k index, sigma index, trial) work unit.
/// Identical across runs and worker counts.
inline Rng derive_trial_rng(uint64_t master_seed, uint32_t k_index, uint32_t sigma_index,
                            uint64_t trial_index) {
    return Rng(detail::mix_seed(master_seed, 0, k_index, sigma_index, trial_index));
}

/// Substream for the fixed per-k wall-perturbation draw (fixed-seeded mode).
inline Rng derive_mismatch_rng(uint64_t master_seed, uint32_t k_index) {
    return Rng(detail::mix_seed(master_seed, 1, k_index, 0, 0));
}

} // namespace irsvlp
