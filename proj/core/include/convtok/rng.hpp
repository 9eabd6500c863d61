#pragma once

#include <cstdint>

namespace convtok {

// Small counter-style generator built on the splitmix64 finalizer. Entirely
// integer arithmetic, so sequences are identical across platforms, and
// split() derives an independent stream without consuming state — adding
// draws in one stream never shifts another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Independent stream keyed by `stream`.
  Rng split(std::uint64_t stream) const {
    return Rng(mix(state_ ^ mix(stream + 0x9e3779b97f4a7c15ull)));
  }

  // Uniform in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi], inclusive on both ends.
  long next_int(long lo, long hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(next_u64() % span);
  }

  double next_real(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  bool bernoulli(double p) { return next_unit() < p; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace convtok
