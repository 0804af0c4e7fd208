#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace imlab {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream key from a base seed and a path of indices,
/// e.g. derive_seed(seed, {iteration, rollout}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

/// Counter-based uniform stream: draw i is a pure function of (key, i), so a
/// stream can be split or replayed without touching any other stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ + 0xD1B54A32D192ED03ULL * counter_++); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  int below(int n) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniform draw number `index` of the stream keyed by `seed`, without state.
double uniform_at(std::uint64_t seed, std::uint64_t index) noexcept;

/// Inverse-CDF sampling over ascending index. Falls back to the last index
/// with positive mass when rounding leaves u above the accumulated total.
int sample_index(std::span<const double> probs, double u);

}  // namespace imlab
