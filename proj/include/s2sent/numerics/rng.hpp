#pragma once

#include <cstdint>
#include <vector>

#include "s2sent/numerics/tensor.hpp"

namespace s2sent {

/// SplitMix64 generator. Output is identical on every platform, unlike the
/// distributions in <random>.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    require(n > 0, "SplitMix64::below requires n > 0");
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = (*this)();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a parent seed and a list of keys.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = seed ^ 0x6A09E667F3BCC909ULL;
  for (std::uint64_t k : keys) {
    SplitMix64 mix(h ^ (k + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
    h = mix();
  }
  return h;
}

inline Tensor uniform_tensor(Shape shape, double lo, double hi, SplitMix64& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

template <typename Range>
void shuffle(Range& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace s2sent
