#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include <friedrichs/eigensolver.hpp>
#include <friedrichs/random.hpp>

namespace friedrichs::test_support {

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Eigenpairs are reused across tests in one binary.
inline const EigenPair& cached_pair(int dim, double p, double q, int n) {
  static std::mutex m;
  static std::map<std::tuple<int, double, double, int>, EigenPair> cache;
  std::lock_guard lock(m);
  const auto key = std::make_tuple(dim, p, q, n);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const GridSpec spec = dim == 1 ? GridSpec::interval(0.0, 1.0, n) : GridSpec::rectangle(0.0, 1.0, 0.0, 1.0, n, n);
    it = cache.emplace(key, solve_eigenpair(build_grid(spec), Exponents(p, q))).first;
  }
  return it->second;
}

inline const EigenPair& pair_1d(double p, double q, int n = 128) { return cached_pair(1, p, q, n); }
inline const EigenPair& pair_2d(double p, double q, int n = 16) { return cached_pair(2, p, q, n); }

/// Free-node values uniform in [-1, 1].
inline GridFunction random_function(const GridPtr& grid, std::uint64_t seed) {
  Rng rng(seed, 7);
  Vector v(grid->num_nodes());
  for (int i = 0; i < grid->num_nodes(); ++i) v[i] = rng.uniform(-1.0, 1.0);
  return GridFunction(grid, std::move(v));
}

inline GridFunction scaled_to_grad_norm(const GridFunction& u, double p, double target) {
  const double g = std::pow(norm_grad_p(u, p), 1.0 / p);
  return u * (target / g);
}

}  // namespace friedrichs::test_support
