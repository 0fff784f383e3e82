/* Fixed 64-bit generator for reproducible fixtures.
 *
 * SplitMix64 (Steele, Lea, Flood 2014), constants as published:
 *   state += 0x9E3779B97F4A7C15
 *   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *   return z ^ (z >> 31)
 *
 * Every synthetic fixture and sampled coordinate in this project flows
 * through this generator so outputs are identical across platforms and,
 * if need be, reimplementable in another language from the constants above.
 */

#ifndef HOTDIST_RNG_HPP
#define HOTDIST_RNG_HPP

#include <cstdint>

namespace hotdist {

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform in {0, ..., n-1}; n must be > 0. Modulo bias is acceptable
    /// for fixture generation and is part of the pinned behavior.
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

    bool next_bool(double p_true) { return next_double() < p_true; }

  private:
    std::uint64_t state_;
};

}  // namespace hotdist

#endif
