#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace robreg {

// Deterministic splittable random stream. A (seed, stream_id) pair fully
// determines the sequence, independent of platform and of how many other
// streams exist, so candidate i can always use stream_id = i and results do
// not depend on scheduling. Core step is SplitMix64.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : state_(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^
                   mix(stream_id + 0xBF58476D1CE4E5B9ULL))) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, bound), unbiased via rejection.
  int next_below(int bound) noexcept {
    const auto b = static_cast<std::uint64_t>(bound);
    const std::uint64_t threshold = (0ULL - b) % b;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return static_cast<int>(r % b);
    }
  }

  // Standard normal via Box-Muller (no cached spare, so the consumption
  // pattern is two uniforms per variate, always).
  double next_normal() noexcept {
    const double u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log1p(-u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  // Fisher-Yates shuffle of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int j = next_below(i + 1);
      std::swap(idx[static_cast<std::size_t>(i)],
                idx[static_cast<std::size_t>(j)]);
    }
    return idx;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace robreg
