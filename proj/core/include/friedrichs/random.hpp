#pragma once

#include <cstdint>

namespace friedrichs {

/// Counter-based generator: the k-th draw is a pure function of (key, k), so
/// streams split by index reproduce exactly regardless of thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal (Box-Muller, no cached second variate).
  double normal();

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t index) const;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace friedrichs
