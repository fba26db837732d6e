#include "friedrichs/random.hpp"

#include <cmath>
#include <numbers>

namespace friedrichs {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : key_(derive_seed(seed, stream)) {}

std::uint64_t Rng::next_u64() {
  const std::uint64_t k = counter_++;
  return mix64(key_ ^ mix64(k));
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split(std::uint64_t index) const {
  Rng child(0);
  child.key_ = derive_seed(key_, index);
  return child;
}

}  // namespace friedrichs
