#pragma once

#include <cstdint>
#include <vector>

#include "friedrichs/functionals.hpp"

namespace friedrichs {

/// f - (f[phi1] / phi1[phi1]) phi1 under the lumped pairing, so that the
/// result annihilates phi1. Throws zero-after-projection if f is in R phi1.
GridFunction project_forcing(const GridFunction& f_raw, const EigenPair& pair);

struct ResonantConfig {
  int max_iterations = 4000;
  int max_newton = 50;
  /// Relative weak residual at which the solver stops.
  double tolerance = 1e-9;
  int restarts = 3;
  std::uint64_t seed = 0;
};

class ResonantProblem {
 public:
  /// Projects f; rejects p = q and a forcing that vanishes after projection.
  ResonantProblem(Exponents exps, EigenPair pair, const GridFunction& f_raw, ResonantConfig config = {});

  const Exponents& exps() const noexcept { return exps_; }
  const EigenPair& pair() const noexcept { return pair_; }
  const GridFunction& forcing() const noexcept { return f_; }
  const ResonantConfig& config() const noexcept { return config_; }
  /// sup |f[v]| / ||grad v||_p over the discrete space.
  double forcing_dual_norm() const noexcept { return f_dual_; }

 private:
  Exponents exps_;
  EigenPair pair_;
  GridFunction f_;
  ResonantConfig config_;
  double f_dual_;
};

struct RestartSummary {
  std::uint64_t seed;
  double energy;
  double residual;
  int iterations;
};

struct ResonantSolution {
  GridFunction u;
  double energy;
  /// Dual-norm weak residual relative to the forcing's dual norm.
  double residual;
  std::vector<double> energy_history;
  std::vector<RestartSummary> restarts;
  int best_restart;
  bool converged;
};

/// Minimizes E = J - f[.] by preconditioned descent followed by a Newton
/// polish, from 0 and from seeded perturbations; keeps the lowest energy.
ResonantSolution solve_resonant(const ResonantProblem& problem);

/// max over v of |DJ[u](v) - f[v]| / ||grad v||_p. Directions must be nonzero.
double weak_residual(const GridFunction& u, const ResonantProblem& problem,
                     const std::vector<GridFunction>& directions);

/// sup over all v of the same quantity (the discrete dual norm of the residual).
double weak_residual_dual(const GridFunction& u, const ResonantProblem& problem);

}  // namespace friedrichs
