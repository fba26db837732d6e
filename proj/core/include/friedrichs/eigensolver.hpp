#pragma once

#include <cstdint>
#include <vector>

#include "friedrichs/error.hpp"
#include "friedrichs/functionals.hpp"

namespace friedrichs {

struct SolverConfig {
  int max_iterations = 20000;
  double initial_step = 1.0;
  double backtrack = 0.5;
  /// Relative first-order residual at which the solver stops.
  double tolerance = 1e-11;
  /// Residual at which descent hands over to the Newton polish.
  double newton_switch = 1e-3;
  int max_newton = 40;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Solver failure carrying the diagnostics of the failed run.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& message, SolverDiagnostics diagnostics);
  const SolverDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  SolverDiagnostics diagnostics_;
};

/// Positive minimizer of the discrete Rayleigh quotient, normalized to
/// \int phi1^q = 1. Throws NoConvergence rather than returning a poor pair.
EigenPair solve_eigenpair(GridPtr grid, const Exponents& exps, const SolverConfig& config = {});

/// Relative first-order residual of u as an eigenfunction: the K0^{-1} dual
/// norm of grad(G/p) - R(u) (\int|u|^q)^{(p-q)/q} grad(\int|u|^q)/q, divided
/// by that of grad(G/p).
double eigen_residual(const GridFunction& u, const Exponents& exps);

struct Mu1Result {
  double mu1;
  GridFunction v;
  /// |cos| of the angle between v and phi1 in the M-inner product.
  double alignment;
  SolverDiagnostics diagnostics;
};

/// Smallest eigenvalue of K v = mu M v with K the A(grad phi1)-stiffness and M
/// the weighted mass plus rank-one term of the linearized quotient.
Mu1Result solve_mu1(const EigenPair& pair, const Exponents& exps, const SolverConfig& config = {});

/// Linearized quotient <K v, v> / <M v, v> for a single v.
double mu_quotient(const GridFunction& v, const EigenPair& pair, const Exponents& exps);

/// Same minimization restricted to the kernel of r (r . v = 0).
Mu1Result solve_mu1_on_kernel(const EigenPair& pair, const Exponents& exps, const Vector& r,
                              const SolverConfig& config = {});

struct ShootingResult {
  double lambda1;
  /// Profile on a uniform grid of `samples.size()` points over [a, b],
  /// scaled so that \int u^q = 1.
  std::vector<double> samples;
  /// Final bisection bracket on the ODE parameter.
  double bracket_lo;
  double bracket_hi;
  int bisections;
  /// u'(b) of the accepted profile (negative for the ground state).
  double end_slope;
};

/// Shooting for -(|u'|^{p-2}u')' = L |u|^{q-2}u, u(a) = 0, u'(a) = 1, with
/// bisection on L for the first zero at b; lambda1 = L ||u||_q^{q-p}.
ShootingResult shooting_oracle_1d(double a, double b, const Exponents& exps, double tolerance = 1e-10,
                                  int steps = 20000);

/// Closed form for p = q on an interval of length L:
/// (p-1) (2 pi / (p sin(pi/p)))^p / L^p.
double homogeneous_lambda1_1d(double length, double p);

}  // namespace friedrichs
