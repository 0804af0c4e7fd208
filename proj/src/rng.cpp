#include "imlab/rng.hpp"

#include <stdexcept>

namespace imlab {

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(base ^ 0x243F6A8885A308D3ULL);
  for (std::uint64_t p : path) {
    h = mix64(h ^ mix64(p + 0x13198A2E03707344ULL));
  }
  return h;
}

int CounterRng::below(int n) noexcept {
  const auto v = static_cast<int>(uniform() * n);
  return v < n ? v : n - 1;
}

double uniform_at(std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t key = mix64(seed);
  return static_cast<double>(mix64(key + 0xD1B54A32D192ED03ULL * index) >> 11) * 0x1.0p-53;
}

int sample_index(std::span<const double> probs, double u) {
  if (probs.empty()) {
    throw std::invalid_argument("sample_index: empty distribution");
  }
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) {
      continue;
    }
    last_positive = static_cast<int>(i);
    acc += probs[i];
    if (u < acc) {
      return static_cast<int>(i);
    }
  }
  if (last_positive < 0) {
    throw std::invalid_argument("sample_index: distribution has no positive mass");
  }
  return last_positive;
}

}  // namespace imlab
