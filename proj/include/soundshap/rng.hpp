#pragma once

#include <cstdint>
#include <vector>

namespace soundshap {

/// SplitMix64: small splittable generator. Column permutations and test
/// instances derive independent streams from one seed, so results are
/// reproducible regardless of evaluation order.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [0, n) by rejection, bias-free.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  /// Derive an independent stream keyed by `index`.
  SplitMix64 split(std::uint64_t index) const {
    SplitMix64 mixer(state_ ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return SplitMix64(mixer.next());
  }

 private:
  std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle of indices [0, n).
inline std::vector<std::size_t> random_permutation(std::size_t n, SplitMix64& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < n; ++k) perm[k] = k;
  for (std::size_t k = n; k > 1; --k) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(k));
    std::swap(perm[k - 1], perm[j]);
  }
  return perm;
}

}  // namespace soundshap
