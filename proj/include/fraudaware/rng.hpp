#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace fraudaware {

/// SplitMix64 (Steele, Lea & Flood 2014; constants as in Vigna's reference
/// implementation). Every seeded draw in the project goes through this
/// generator so that golden values do not depend on the standard library's
/// distribution implementations.
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits: (next() >> 11) * 2^-53.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (cosine branch only):
  /// u1 = 1 - uniform(), u2 = uniform(), z = sqrt(-2 ln u1) cos(2 pi u2).
  double normal();
  double normal(double mean, double sd);
  /// Uniform integer in [0, n) by rejection on the top bits.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from (seed, stream) by running one
/// SplitMix64 step over seed ^ (stream * golden ratio).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Counter-based standard normal draw: the first normal() of
/// SplitMix64(mix_seed(seed, counter)).
double normal_at(std::uint64_t seed, std::uint64_t counter);

/// Fisher-Yates, walking from the back, j = below(i + 1).
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace fraudaware
