#include "friedrichs/eigensolver.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "assembly.hpp"
#include "friedrichs/random.hpp"
#include "kernels.hpp"
#include "optimize.hpp"

namespace friedrichs {

using kernels::abs_pow;
using kernels::signed_pow;

namespace {

constexpr double kWeightFloor = 1e-14;
constexpr std::size_t kHistoryCap = 64;

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void push_history(std::vector<double>& h, double r, int iteration) {
  // Keep every entry early on, then every 2^k-th.
  if (h.size() < kHistoryCap / 2 || (iteration & (iteration - 1)) == 0) h.push_back(r);
}

Vector normalize_q(const Grid& g, Vector u, double q) {
  const double a = kernels::lq(g, u, q);
  if (!(a > 0.0)) throw Error(ErrorCode::zero_function, "iterate collapsed to zero");
  return u / std::pow(a, 1.0 / q);
}

double rayleigh_raw(const Grid& g, const Vector& u, const Exponents& e) {
  const double a = kernels::lq(g, u, e.q);
  if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
  return kernels::grad_energy(g, u, e.p) / std::pow(a, e.p_over_q());
}

// b = B^T(w |U|^{q-2} U), the gradient of \int|u|^q / q.
Vector lq_half_gradient(const Grid& g, const Vector& u, double q) { return kernels::lq_gradient(g, u, q) / q; }

double residual_raw(const Grid& g, const Vector& u, const Exponents& e) {
  const double a = kernels::lq(g, u, e.q);
  const double r = rayleigh_raw(g, u, e);
  const Vector dg = kernels::grad_energy_gradient(g, u, e.p) / e.p;
  const Vector res = dg - r * std::pow(a, e.sub_exponent()) * lq_half_gradient(g, u, e.q);
  const double den = optimize::dual_sq(g, dg);
  if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(std::max(0.0, optimize::dual_sq(g, res)) / den);
}

// Weighted mass B^T diag(w c |U|^{q-2}) B.
assembly::ColMatrix q_mass(const Grid& g, const Vector& u, double q) {
  Vector pts = g.point_interpolation() * u;
  for (Eigen::Index k = 0; k < pts.size(); ++k) pts[k] = abs_pow(pts[k], q - 2.0);
  return assembly::point_mass(g, pts);
}

// One Newton step on the bordered system for (u, lambda) with \int|u|^q = 1.
bool newton_step(const Grid& g, Vector& u, const Exponents& e, double& res) {
  const double lam = rayleigh_raw(g, u, e);
  const Vector b = g.masked(lq_half_gradient(g, u, e.q));
  const Vector f1 = kernels::grad_energy_gradient(g, u, e.p) / e.p - lam * b;
  const double a = kernels::lq(g, u, e.q);
  auto ka = assembly::a_stiffness(g, u, e.p, kWeightFloor);
  assembly::ColMatrix jac = ka.matrix - lam * (e.q - 1.0) * q_mass(g, u, e.q);
  jac = assembly::restrict_dirichlet(g, jac);
  const Vector nb = -b;
  Eigen::MatrixXd corner = Eigen::MatrixXd::Zero(1, 1);
  assembly::ColMatrix sys = assembly::bordered(jac, {nb}, {nb}, corner);
  sys.makeCompressed();
  Eigen::SparseLU<assembly::ColMatrix> lu;
  lu.compute(sys);
  if (lu.info() != Eigen::Success) return false;
  Vector rhs(u.size() + 1);
  rhs.head(u.size()) = -g.masked(f1);
  rhs[u.size()] = (a - 1.0) / e.q;
  const Vector sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) return false;
  const Vector du = g.masked(sol.head(u.size()));
  double scale = 1.0;
  for (int k = 0; k < 8; ++k, scale *= 0.5) {
    Vector trial = normalize_q(g, (u + scale * du).cwiseAbs(), e.q);
    const double r = residual_raw(g, trial, e);
    if (r < res) {
      u = std::move(trial);
      res = r;
      return true;
    }
  }
  return false;
}

// Inverse iteration for the smallest eigenpair of K x = mu M x where
// solve(y) applies K^{-1} (restricted as needed) and apply_m applies M.
template <class Solve, class ApplyM, class ApplyK>
double inverse_iteration(Vector& x, Solve&& solve, ApplyM&& apply_m, ApplyK&& apply_k,
                         const SolverConfig& cfg, SolverDiagnostics& diag) {
  double mu = std::numeric_limits<double>::infinity();
  const int max_it = std::max(50, cfg.max_iterations / 10);
  for (int it = 1; it <= max_it; ++it) {
    Vector y = solve(apply_m(x));
    const double norm = std::sqrt(std::max(0.0, kernels::dot(y, apply_m(y))));
    if (!(norm > 0.0) || !y.allFinite()) {
      throw Error(ErrorCode::singular_mass, "mass form vanished during inverse iteration");
    }
    x = y / norm;
    const Vector kx = apply_k(x);
    const Vector mx = apply_m(x);
    const double next = kernels::dot(x, kx) / kernels::dot(x, mx);
    const Vector res = kx - next * mx;
    const double rel = std::sqrt(kernels::dot(res, res)) / std::max(1e-300, std::sqrt(kernels::dot(kx, kx)));
    diag.iterations = it;
    diag.final_residual = rel;
    push_history(diag.residual_history, rel, it);
    const bool settled = std::abs(next - mu) <= 1e-14 * std::abs(next);
    mu = next;
    if (rel <= 1e-10 || (settled && rel <= 1e-7)) {
      diag.converged = true;
      break;
    }
  }
  return mu;
}

struct LinearizedForms {
  assembly::ColMatrix k;
  assembly::ColMatrix mass;  // (q-1) c1 Mq
  Vector b;                  // rank-one vector, scaled so the term is b b^T
  int floor_hits = 0;
};

LinearizedForms linearized_forms(const EigenPair& pair, const Exponents& e) {
  const Grid& g = pair.grid();
  const Vector& phi = pair.phi1.values();
  LinearizedForms f;
  auto ka = assembly::a_stiffness(g, phi, e.p, kWeightFloor);
  f.floor_hits = ka.floor_hits;
  f.k = assembly::restrict_dirichlet(g, ka.matrix);
  const double a = kernels::lq(g, phi, e.q);
  f.mass = (e.q - 1.0) * std::pow(a, e.sub_exponent()) * q_mass(g, phi, e.q);
  const double c2 = (e.p - e.q) * std::pow(a, e.rank_one_exponent());
  f.b = std::sqrt(c2) * g.masked(lq_half_gradient(g, phi, e.q));
  return f;
}

Vector random_start(const Grid& g, std::uint64_t seed) {
  Rng rng(seed, 0x6d75);
  Vector x(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  return g.masked(x);
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::invalid_argument, "max_iterations must be >= 1");
  if (!(tolerance > 0.0) || !(newton_switch > 0.0) || !(initial_step > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "tolerances and steps must be positive");
  }
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "backtracking factor must lie in (0,1)");
  }
}

NoConvergence::NoConvergence(const std::string& message, SolverDiagnostics diagnostics)
    : Error(ErrorCode::no_convergence, message), diagnostics_(std::move(diagnostics)) {}

double eigen_residual(const GridFunction& u, const Exponents& exps) {
  return residual_raw(u.grid(), u.values(), exps);
}

EigenPair solve_eigenpair(GridPtr grid, const Exponents& exps, const SolverConfig& config) {
  config.validate();
  if (exps.q < 2.0) throw Error(ErrorCode::invalid_exponents, "eigensolver needs q >= 2");
  const Grid& g = *grid;
  Clock clock;
  SolverDiagnostics diag;

  Rng rng(config.seed, 0x6569);
  Vector u = first_laplace_mode(grid).values();
  for (int i = 0; i < u.size(); ++i) u[i] *= 1.0 + 0.25 * rng.uniform(-1.0, 1.0);
  u = normalize_q(g, g.masked(u), exps.q);

  auto f = [&](const Vector& x) { return rayleigh_raw(g, x, exps); };
  auto retract = [&](const Vector& x) { return normalize_q(g, x.cwiseAbs(), exps.q); };
  optimize::LineSearch ls;
  ls.step = config.initial_step;
  ls.shrink = config.backtrack;
  ls.refine = true;

  double value = f(u);
  double res = residual_raw(g, u, exps);
  int it = 0;
  bool polishing = false;
  while (it < config.max_iterations && res > config.tolerance) {
    ++it;
    if (!polishing && res <= config.newton_switch) polishing = true;
    if (polishing && diag.newton_iterations < config.max_newton) {
      ++diag.newton_iterations;
      if (newton_step(g, u, exps, res)) {
        value = f(u);
        push_history(diag.residual_history, res, it);
        continue;
      }
      polishing = false;
    }
    const Vector grad = g.masked(grad_rayleigh(GridFunction(grid, u), exps));
    const Vector d = g.solve_laplacian(grad);
    const double slope = kernels::dot(grad, d);
    if (!(slope > 0.0)) break;
    auto step = optimize::armijo(f, retract, u, value, d, slope, ls);
    if (!step.accepted) break;
    u = std::move(step.x);
    value = step.value;
    res = residual_raw(g, u, exps);
    push_history(diag.residual_history, res, it);
  }
  diag.iterations = it;
  diag.final_residual = res;
  diag.wall_seconds = clock.seconds();
  if (diag.residual_history.empty() || diag.residual_history.back() != res) diag.residual_history.push_back(res);
  if (!(res <= config.tolerance)) {
    throw NoConvergence("eigensolver stopped at relative residual " + std::to_string(res) + " after " +
                            std::to_string(it) + " iterations",
                        diag);
  }
  diag.converged = true;
  GridFunction phi(grid, u);
  const double lam = rayleigh(phi, exps);
  return EigenPair{lam, std::move(phi), 1.0, std::move(diag)};
}

double mu_quotient(const GridFunction& v, const EigenPair& pair, const Exponents& exps) {
  const LinearizedForms f = linearized_forms(pair, exps);
  const Vector& x = v.values();
  const double num = kernels::dot(x, f.k * x);
  const double bx = kernels::dot(f.b, x);
  const double den = kernels::dot(x, f.mass * x) + bx * bx;
  if (!(den > 0.0)) throw Error(ErrorCode::singular_mass, "linearized mass form vanishes");
  return num / den;
}

namespace {

Mu1Result run_mu1(const EigenPair& pair, const Exponents& exps, const Vector* kernel_r,
                  const SolverConfig& config) {
  Clock clock;
  const Grid& g = pair.grid();
  const LinearizedForms f = linearized_forms(pair, exps);
  Eigen::SimplicialLDLT<assembly::ColMatrix> ldlt;
  ldlt.compute(f.k);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::singular_mass, "A-stiffness factorization failed");

  auto apply_m = [&](const Vector& x) -> Vector {
    return g.masked(f.mass * x + f.b * kernels::dot(f.b, x));
  };
  auto apply_k = [&](const Vector& x) -> Vector { return g.masked(f.k * x); };

  Vector kr;
  double rkr = 0.0;
  if (kernel_r) {
    kr = g.masked(ldlt.solve(g.masked(*kernel_r)));
    rkr = kernels::dot(*kernel_r, kr);
  }
  auto solve = [&](const Vector& y) -> Vector {
    Vector x = g.masked(ldlt.solve(g.masked(y)));
    if (kernel_r) x -= (kernels::dot(*kernel_r, x) / rkr) * kr;
    return x;
  };

  SolverDiagnostics diag;
  diag.weight_floor_activations = f.floor_hits;
  Vector x = random_start(g, config.seed);
  if (kernel_r) x = solve(apply_k(x));
  const double mu = inverse_iteration(x, solve, apply_m, apply_k, config, diag);
  diag.wall_seconds = clock.seconds();
  if (!diag.converged) {
    throw NoConvergence("inverse iteration did not settle, residual " + std::to_string(diag.final_residual), diag);
  }
  const Vector& phi = pair.phi1.values();
  const Vector mphi = apply_m(phi);
  const double cosang = kernels::dot(x, mphi) / std::sqrt(kernels::dot(x, apply_m(x)) * kernels::dot(phi, mphi));
  if (kernels::dot(x, mphi) < 0.0) x = -x;
  return Mu1Result{mu, GridFunction(pair.grid_ptr(), x), std::abs(cosang), std::move(diag)};
}

}  // namespace

Mu1Result solve_mu1(const EigenPair& pair, const Exponents& exps, const SolverConfig& config) {
  return run_mu1(pair, exps, nullptr, config);
}

Mu1Result solve_mu1_on_kernel(const EigenPair& pair, const Exponents& exps, const Vector& r,
                              const SolverConfig& config) {
  if (r.size() != pair.phi1.size()) throw Error(ErrorCode::length_mismatch, "kernel functional length");
  return run_mu1(pair, exps, &r, config);
}

}  // namespace friedrichs
