#include "optimize.hpp"

#include <cmath>

#include "friedrichs/error.hpp"
#include "kernels.hpp"

namespace friedrichs::optimize {

double dual_sq(const Grid& g, const Vector& grad) { return kernels::dot(grad, g.solve_laplacian(grad)); }

KernelProjector::KernelProjector(const Grid& g, const Vector& r) : r_(g.masked(r)) {
  z_ = g.solve_laplacian(r_);
  rz_ = kernels::dot(r_, z_);
  if (!(rz_ > 0.0)) throw Error(ErrorCode::invalid_argument, "kernel projector needs a nonzero functional");
}

Vector KernelProjector::operator()(const Vector& d) const { return d - (kernels::dot(r_, d) / rz_) * z_; }

StepResult armijo(const std::function<double(const Vector&)>& f,
                  const std::function<Vector(const Vector&)>& retract, const Vector& x, double f0,
                  const Vector& d, double slope, LineSearch& ls) {
  StepResult out;
  double alpha = ls.step;
  for (int k = 0; k < ls.max_backtracks; ++k) {
    Vector trial = retract(x - alpha * d);
    const double v = f(trial);
    if (std::isfinite(v) && v <= f0 - ls.c1 * alpha * slope) {
      double best = v;
      for (int r = 0; ls.refine && r < 12; ++r) {
        Vector next = retract(x - alpha * ls.shrink * d);
        const double vn = f(next);
        if (!(vn < best)) break;
        best = vn;
        trial = std::move(next);
        alpha *= ls.shrink;
      }
      out.accepted = true;
      out.value = best;
      out.step = alpha;
      out.x = std::move(trial);
      ls.step = alpha * ls.grow;
      return out;
    }
    alpha *= ls.shrink;
  }
  ls.step = alpha;
  return out;
}

}  // namespace friedrichs::optimize
