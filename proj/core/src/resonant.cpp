#include "friedrichs/resonant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "assembly.hpp"
#include "friedrichs/decompose.hpp"
#include "friedrichs/error.hpp"
#include "friedrichs/parallel.hpp"
#include "friedrichs/random.hpp"
#include "kernels.hpp"
#include "optimize.hpp"

namespace friedrichs {

using kernels::abs_pow;

GridFunction project_forcing(const GridFunction& f_raw, const EigenPair& pair) {
  const GridFunction& phi = pair.phi1;
  const double c = lumped_pairing(f_raw, phi) / lumped_pairing(phi, phi);
  GridFunction f = f_raw - phi * c;
  const double scale = std::sqrt(lumped_pairing(f_raw, f_raw));
  if (f.is_zero() || std::sqrt(lumped_pairing(f, f)) <= 1e-12 * scale) {
    throw Error(ErrorCode::zero_after_projection, "forcing is a multiple of phi1");
  }
  return f;
}

ResonantProblem::ResonantProblem(Exponents exps, EigenPair pair, const GridFunction& f_raw, ResonantConfig config)
    : exps_(exps), pair_(std::move(pair)), f_(project_forcing(f_raw, pair_)), config_(config) {
  if (!(exps_.p > exps_.q)) {
    throw Error(ErrorCode::invalid_exponents,
                "the resonant problem requires p > q strictly (existence is only asserted for p > q)");
  }
  if (config_.restarts < 1 || config_.max_iterations < 1) {
    throw Error(ErrorCode::invalid_argument, "restarts and iterations must be >= 1");
  }
  f_dual_ = dual_norm_of(pair_.grid().lumped_mass().cwiseProduct(f_.values()), pair_.grid(), exps_.p);
}

namespace {

struct Run {
  Vector u;
  double energy;
  double residual;
  int iterations;
  std::vector<double> history;
};

double energy_raw(const ResonantProblem& pr, const Vector& u) {
  return energy_E(GridFunction(pr.pair().grid_ptr(), u), pr.pair(), pr.exps(), pr.forcing());
}

Vector gradient_raw(const ResonantProblem& pr, const Vector& u) {
  return grad_E(GridFunction(pr.pair().grid_ptr(), u), pr.pair(), pr.exps(), pr.forcing());
}

// Newton direction from H d = grad with H the Hessian of E; the rank-one
// term enters through one bordered row.
bool newton_direction(const ResonantProblem& pr, const Vector& u, const Vector& grad, Vector& d) {
  const Grid& g = pr.pair().grid();
  const Exponents& e = pr.exps();
  const double lam = pr.pair().lambda1;
  const double a = kernels::lq(g, u, e.q);
  if (!(a > 0.0)) return false;
  auto ka = assembly::a_stiffness(g, u, e.p, 1e-14);
  Vector pts = g.point_interpolation() * u;
  Vector coef(pts.size());
  for (Eigen::Index k = 0; k < pts.size(); ++k) coef[k] = abs_pow(pts[k], e.q - 2.0);
  assembly::ColMatrix h0 = ka.matrix - lam * (e.q - 1.0) * std::pow(a, e.sub_exponent()) * assembly::point_mass(g, coef);
  h0 = assembly::restrict_dirichlet(g, h0);
  const Vector b = g.masked(kernels::lq_gradient(g, u, e.q) / e.q);
  const double alpha = lam * (e.p - e.q) * std::pow(a, e.rank_one_exponent());
  Eigen::MatrixXd corner(1, 1);
  corner(0, 0) = 1.0 / alpha;
  assembly::ColMatrix sys = assembly::bordered(h0, {b}, {b}, corner);
  sys.makeCompressed();
  Eigen::SparseLU<assembly::ColMatrix> lu;
  lu.compute(sys);
  if (lu.info() != Eigen::Success) return false;
  Vector rhs = Vector::Zero(u.size() + 1);
  rhs.head(u.size()) = g.masked(grad);
  const Vector sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) return false;
  d = g.masked(sol.head(u.size()));
  return kernels::dot(grad, d) > 0.0;
}

Run minimize(const ResonantProblem& pr, Vector u) {
  const Grid& g = pr.pair().grid();
  const ResonantConfig& cfg = pr.config();
  Run run;
  auto f = [&](const Vector& x) { return energy_raw(pr, x); };
  auto identity = [](const Vector& x) { return x; };
  optimize::LineSearch ls;
  ls.refine = true;
  double value = f(u);
  run.history.push_back(value);
  // Cheap K0-metric residual while iterating; the dual-norm value is
  // computed once at the end.
  const double f_k0 = std::sqrt(optimize::dual_sq(g, g.lumped_mass().cwiseProduct(pr.forcing().values())));
  auto rel_residual = [&](const Vector& x) { return std::sqrt(optimize::dual_sq(g, gradient_raw(pr, x))) / f_k0; };
  double res = rel_residual(u);
  int newton_used = 0;
  int it = 0;
  bool first = true;
  for (; it < cfg.max_iterations && res > 1e-2 * cfg.tolerance; ++it) {
    const Vector grad = gradient_raw(pr, u);
    Vector d;
    bool newton = res < 1e-3 && newton_used < cfg.max_newton && newton_direction(pr, u, grad, d);
    if (newton) {
      ++newton_used;
      optimize::LineSearch nls;
      auto step = optimize::armijo(f, identity, u, value, d, kernels::dot(grad, d), nls);
      if (step.accepted) {
        u = std::move(step.x);
        value = step.value;
        run.history.push_back(value);
        res = rel_residual(u);
        continue;
      }
    }
    d = g.solve_laplacian(grad);
    const double slope = kernels::dot(grad, d);
    if (!(slope > 0.0)) break;
    if (first) {
      const double dn = std::pow(kernels::grad_energy(g, d, pr.exps().p), 1.0 / pr.exps().p);
      ls.step = dn > 0.0 ? 1.0 / dn : 1.0;
      first = false;
    }
    auto step = optimize::armijo(f, identity, u, value, d, slope, ls);
    if (!step.accepted) break;
    u = std::move(step.x);
    value = step.value;
    run.history.push_back(value);
    res = rel_residual(u);
  }
  run.u = std::move(u);
  run.energy = value;
  run.residual = weak_residual_dual(GridFunction(pr.pair().grid_ptr(), run.u), pr);
  run.iterations = it;
  return run;
}

}  // namespace

double weak_residual(const GridFunction& u, const ResonantProblem& problem, const std::vector<GridFunction>& directions) {
  if (!u.grid().same_as(problem.pair().grid())) throw Error(ErrorCode::mismatched_grid, "u on another grid");
  const double p = problem.exps().p;
  double worst = 0.0;
  for (const GridFunction& v : directions) {
    const double nv = std::pow(norm_grad_p(v, p), 1.0 / p);
    if (!(nv > 0.0)) throw Error(ErrorCode::zero_function, "weak residual direction is zero");
    const double r = dJ(u, v, problem.pair(), problem.exps()) - lumped_pairing(problem.forcing(), v);
    worst = std::max(worst, std::abs(r) / nv);
  }
  return worst;
}

double weak_residual_dual(const GridFunction& u, const ResonantProblem& problem) {
  const Grid& g = u.grid();
  const Vector grad = grad_E(u, problem.pair(), problem.exps(), problem.forcing());
  if (grad.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  return dual_norm_of(grad, g, problem.exps().p) / problem.forcing_dual_norm();
}

ResonantSolution solve_resonant(const ResonantProblem& problem) {
  const ResonantConfig& cfg = problem.config();
  const GridPtr& grid = problem.pair().grid_ptr();
  const int n = cfg.restarts;
  std::vector<Run> runs(static_cast<std::size_t>(n));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
  // Restart 0 starts at the origin; the others at small seeded perturbations
  // scaled to the size of f.
  const double fscale = problem.forcing_dual_norm();
  const double p = problem.exps().p;
  parallel_for(runs.size(), [&](std::size_t k) {
    seeds[k] = derive_seed(cfg.seed, k);
    Vector u0 = Vector::Zero(grid->num_nodes());
    if (k > 0) {
      GridFunction w = sample_test_function(grid, seeds[k], SampleStyle::smooth_mode);
      const double nw = std::pow(norm_grad_p(w, p), 1.0 / p);
      u0 = w.values() * (std::pow(fscale, 1.0 / (p - 1.0)) / nw);
    }
    runs[k] = minimize(problem, u0);
  });
  ResonantSolution out{GridFunction::zeros(grid), 0.0, 0.0, {}, {}, 0, false};
  int best = 0;
  for (int k = 0; k < n; ++k) {
    const Run& r = runs[static_cast<std::size_t>(k)];
    out.restarts.push_back({seeds[static_cast<std::size_t>(k)], r.energy, r.residual, r.iterations});
    if (r.energy < runs[static_cast<std::size_t>(best)].energy) best = k;
  }
  Run& b = runs[static_cast<std::size_t>(best)];
  out.u = GridFunction(grid, b.u);
  out.energy = b.energy;
  out.residual = b.residual;
  out.energy_history = std::move(b.history);
  out.best_restart = best;
  out.converged = b.residual <= cfg.tolerance;
  if (!out.converged) {
    throw Error(ErrorCode::no_convergence,
                "resonant descent stopped at relative residual " + std::to_string(b.residual));
  }
  return out;
}

}  // namespace friedrichs
