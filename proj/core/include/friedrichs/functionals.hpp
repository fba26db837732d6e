#pragma once

#include <vector>

#include "friedrichs/grid.hpp"

namespace friedrichs {

class LinearFunctional;

/// Exponent pair with p >= q > 1 and p >= 2.
struct Exponents {
  double p;
  double q;

  Exponents(double p, double q);

  double p_over_q() const noexcept { return p / q; }
  /// (p - q) / q
  double sub_exponent() const noexcept { return (p - q) / q; }
  /// (p - 2q) / q, negative whenever p < 2q
  double rank_one_exponent() const noexcept { return (p - 2.0 * q) / q; }
};

struct SolverDiagnostics {
  int iterations = 0;
  int newton_iterations = 0;
  double final_residual = 0.0;
  /// Downsampled residual trace, first and last entries always kept.
  std::vector<double> residual_history;
  bool converged = false;
  double wall_seconds = 0.0;
  int weight_floor_activations = 0;
};

/// Discrete least frequency and its positive minimizer. `norm_q` records the
/// normalization actually carried by phi1 (1 straight out of the solver).
struct EigenPair {
  double lambda1;
  GridFunction phi1;
  double norm_q;
  SolverDiagnostics diagnostics;

  const Grid& grid() const noexcept { return phi1.grid(); }
  const GridPtr& grid_ptr() const noexcept { return phi1.grid_ptr(); }

  /// Same eigenvalue, phi1 multiplied by c > 0.
  EigenPair rescaled(double c) const;
};

/// Gauss-Legendre rule on (0,1) for integrals of the form
/// \f$\int_0^1 g(s)(1-s)\,ds\f$; the (1-s) factor is folded into the weights.
class SPathQuadrature {
 public:
  explicit SPathQuadrature(int nodes = 16);

  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  /// Plain Gauss-Legendre rule on (0,1), without the (1-s) factor.
  const std::vector<double>& unit_nodes() const noexcept { return unit_nodes_; }
  const std::vector<double>& unit_weights() const noexcept { return unit_weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> unit_nodes_;
  std::vector<double> unit_weights_;
};

/// Gauss-Legendre nodes and weights on (-1, 1).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// ---------------------------------------------------------------------------
// Basic integrals

/// \f$\int |\nabla u|^p\f$, exact for P1 data.
double norm_grad_p(const GridFunction& u, double p);
/// \f$\int |u|^q\f$ (the integral, not its root).
double norm_q(const GridFunction& u, double q);
/// \f$\int |\nabla u|^p / (\int |u|^q)^{p/q}\f$. Throws zero-function.
double rayleigh(const GridFunction& u, const Exponents& exps);
/// Nodal gradient of the Rayleigh quotient (Dirichlet entries zero).
Vector grad_rayleigh(const GridFunction& u, const Exponents& exps);

// ---------------------------------------------------------------------------
// Deficit functional J and its derivative

double deficit_J(const GridFunction& u, const EigenPair& pair, const Exponents& exps);
/// Gateaux derivative DJ[u](v).
double dJ(const GridFunction& u, const GridFunction& v, const EigenPair& pair, const Exponents& exps);
/// Nodal vector g with DJ[u](v) = g . v for every v.
Vector grad_J(const GridFunction& u, const EigenPair& pair, const Exponents& exps);

// ---------------------------------------------------------------------------
// Linearization matrix A(a) = |a|^{p-2} (I + (p-2) a a^T / |a|^2)

/// A(a) b. A(0) is the zero matrix for p > 2 and the identity for p = 2
/// (continuous extension in both cases).
Eigen::VectorXd matA_apply(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double p);
/// <A(a) b, b>
double matA_quad(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double p);

/// \f$\int \langle A(\nabla\varphi_1)\nabla v, \nabla v\rangle\f$
double stiffness_A(const GridFunction& v, const EigenPair& pair, double p);
/// \f$(\int |\nabla\varphi_1|^{p-2} |\nabla v|^2)^{1/2}\f$
double norm_phi1(const GridFunction& v, const EigenPair& pair, double p);

/// Second variation of J at phi1 (halved), nonnegative and zero on R phi1.
double Q0(const GridFunction& v, const EigenPair& pair, const Exponents& exps);

// ---------------------------------------------------------------------------
// Path families along phi1 + s t v, s in (0,1)

struct PathValue {
  double value = 0.0;
  /// Number of s-nodes where the L^q base hit the underflow floor.
  int floor_hits = 0;
};

double P1_family(double t, const GridFunction& v, const EigenPair& pair, const Exponents& exps,
                 const SPathQuadrature& squad);
double P0_family(double t, const GridFunction& v, const EigenPair& pair, const Exponents& exps,
                 const SPathQuadrature& squad);
PathValue P0_family_detail(double t, const GridFunction& v, const EigenPair& pair,
                           const Exponents& exps, const SPathQuadrature& squad);

/// Floor applied to \f$\int|\varphi_1+stv|^q\f$ before a negative power.
inline constexpr double kPathBaseFloor = 1e-300;

// ---------------------------------------------------------------------------
// Hidden convexity remainder

/// Per-element remainder R_p(v, w; t) built from element averages of v, w
/// and their element gradients. v >= 0, w > 0 expected.
Vector R_p(const GridFunction& v, const GridFunction& w, double t, double p);
/// \f$\int R_p(v,w;t)\f$
double integral_R_p(const GridFunction& v, const GridFunction& w, double t, double p);

// ---------------------------------------------------------------------------
// Improvement functional and energy

/// |l[u]|^{p-2} ||Pu||_{phi1}^2 + ||grad Pu||_p^p with Pu = u - l[u] phi1.
double M_l(const GridFunction& u, const LinearFunctional& l, const EigenPair& pair,
           const Exponents& exps);
/// Nodal gradient of M_l.
Vector grad_M_l(const GridFunction& u, const LinearFunctional& l, const EigenPair& pair,
                const Exponents& exps);

/// f[u] for a nodal density f, by vertex (lumped) quadrature.
double lumped_pairing(const GridFunction& f, const GridFunction& u);
/// E[u] = J[u] - f[u].
double energy_E(const GridFunction& u, const EigenPair& pair, const Exponents& exps,
                const GridFunction& f);
Vector grad_E(const GridFunction& u, const EigenPair& pair, const Exponents& exps,
              const GridFunction& f);

}  // namespace friedrichs
