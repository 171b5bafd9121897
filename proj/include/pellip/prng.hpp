#pragma once

#include <cstdint>
#include <cmath>

namespace pellip {

// splitmix64, used for seeding and for hashing batch indices into
// independent streams.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ with explicit, platform-independent double generation.
/// std::* distributions are avoided on purpose: their output is not
/// pinned by the standard and results must be reproducible bit-for-bit.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0x853c49e6748fea9bULL) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        have_cached_gauss_ = false;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Log-uniform in [a, b], a, b > 0.
    double log_uniform(double a, double b) {
        return a * std::exp(uniform() * std::log(b / a));
    }

    /// Standard normal via Box-Muller (deterministic across platforms).
    double gaussian() {
        if (have_cached_gauss_) {
            have_cached_gauss_ = false;
            return cached_gauss_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_gauss_ = r * std::sin(a);
        have_cached_gauss_ = true;
        return r * std::cos(a);
    }

    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
    double cached_gauss_ = 0.0;
    bool have_cached_gauss_ = false;
};

/// Seed for batch `k` of a run seeded with `seed`. Batches are the unit of
/// parallel work; results depend on (seed, k) only, never on thread count.
inline uint64_t batch_seed(uint64_t seed, uint64_t k) {
    uint64_t sm = seed ^ (0x9e3779b97f4a7c15ULL + k * 0xff51afd7ed558ccdULL);
    return splitmix64(sm);
}

}  // namespace pellip
