#pragma once

#include <cmath>
#include <cstdint>

namespace haze {

// splitmix64 step; also the basis of the counter-based hashes below.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stateless mix of a key tuple into a well-distributed 64-bit value.
// Used for Perlin lattice gradients and per-octave offsets so identical
// parameters give bit-identical fields on every platform.
inline uint64_t mix_u64(uint64_t a) {
    uint64_t s = a;
    return splitmix64(s);
}

inline uint64_t mix_u64(uint64_t a, uint64_t b) {
    uint64_t s = a + 0x9E3779B97F4A7C15ULL * b;
    uint64_t h = splitmix64(s);
    s = h ^ b;
    return splitmix64(s);
}

inline uint64_t mix_u64(uint64_t a, uint64_t b, uint64_t c) { return mix_u64(mix_u64(a, b), c); }

inline uint64_t mix_u64(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return mix_u64(mix_u64(a, b, c), d);
}

// [0,1) with 53 random bits.
inline double u64_to_unit_double(uint64_t v) { return static_cast<double>(v >> 11) * 0x1.0p-53; }

// xoshiro256++ with splitmix64 seeding; deterministic across platforms,
// unlike std:: distributions.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
        has_spare_ = false;
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

    // [0,1)
    double uniform() { return u64_to_unit_double(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

    // Box-Muller
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + stddev * r * std::cos(theta);
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace haze
