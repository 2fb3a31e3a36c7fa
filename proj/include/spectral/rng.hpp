#pragma once

// Seeded, platform-independent random streams.
//
// State transition is xoshiro256** (Blackman & Vigna); state is expanded from
// a 64-bit seed with SplitMix64. Normals use the Box-Muller transform and
// consume exactly two 64-bit outputs per pair. Nothing here depends on the
// standard library's distribution objects, whose output is implementation
// defined.

#include <cstdint>
#include <span>
#include <vector>

namespace spectral {

/// SplitMix64 finalizer (Steele, Lea, Flood).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Order-sensitive combination of three 64-bit values into one seed.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
  std::uint64_t h = splitmix64(a);
  h = splitmix64(h ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ splitmix64(c + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

void fill_normal(std::span<double> out, Rng& rng);

}  // namespace spectral
