#pragma once

// Shared pieces of the descent solvers: the H^1_0 (K0) metric, projection
// onto the kernel of a linear functional in that metric, and Armijo
// backtracking.

#include <functional>

#include "friedrichs/grid.hpp"

namespace friedrichs::optimize {

/// g . K0^{-1} g
double dual_sq(const Grid& g, const Vector& grad);

/// Projects directions onto {d : r . d = 0}, orthogonally in the K0 metric.
class KernelProjector {
 public:
  KernelProjector(const Grid& g, const Vector& r);
  Vector operator()(const Vector& d) const;
  const Vector& r() const noexcept { return r_; }

 private:
  Vector r_;
  Vector z_;
  double rz_;
};

struct LineSearch {
  double step = 1.0;
  double shrink = 0.5;
  double grow = 2.0;
  double c1 = 1e-4;
  int max_backtracks = 60;
  /// After the first acceptable step, keep shrinking while the value drops.
  bool refine = false;
};

struct StepResult {
  bool accepted = false;
  double value = 0.0;
  double step = 0.0;
  Vector x;
};

/// Backtracks along x(alpha) = retract(x - alpha d) until
/// f <= f0 - c1 alpha slope. slope = g . d must be positive.
StepResult armijo(const std::function<double(const Vector&)>& f,
                  const std::function<Vector(const Vector&)>& retract, const Vector& x, double f0,
                  const Vector& d, double slope, LineSearch& ls);

}  // namespace friedrichs::optimize
