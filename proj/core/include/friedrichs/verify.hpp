#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "friedrichs/decompose.hpp"
#include "friedrichs/eigensolver.hpp"

namespace friedrichs {

// ---------------------------------------------------------------------------
// Test-function batches

struct BatchSample {
  GridFunction u;
  std::uint64_t seed;
  /// random-nodal, smooth-mode, bump, phi-perturbed, or a caller label.
  std::string style;
};

using Batch = std::vector<BatchSample>;

/// count samples cycling through the three sampler styles and a
/// c phi1 + eps w perturbation; sample i uses derive_seed(seed, i).
Batch make_batch(const EigenPair& pair, int count, std::uint64_t seed);

/// Same, restricted to Ker(l): each draw w is replaced by Pw.
Batch make_kernel_batch(const EigenPair& pair, const LinearFunctional& l, int count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reports

inline constexpr int kReportSchemaVersion = 1;
/// Samples whose RHS is below this multiple of \int|grad u|^p are excluded.
inline constexpr double kCollinearThreshold = 1e-12;

struct DeficitSample {
  int index = 0;
  std::uint64_t seed = 0;
  std::string style;
  std::string cone;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  /// \int |grad u|^p, the natural size of both sides.
  double scale = 0.0;
  /// Argmax in t, for the hidden-convexity reports.
  double t = 0.0;
  bool excluded = false;
};

struct DeficitReport {
  std::string inequality;
  std::vector<DeficitSample> samples;
  int excluded = 0;
  double min_ratio = 0.0;
  double median_ratio = 0.0;
  double max_ratio = 0.0;
  /// min over samples of lhs / max(1, scale).
  double min_scaled_lhs = 0.0;
  GridSpec grid;
  double p = 0.0;
  double q = 0.0;
  double lambda1 = 0.0;
  std::string lspec;
  std::uint64_t seed = 0;
  int adversarial_steps = 0;

  /// Empirical constant: the batch minimum ratio.
  double constant() const noexcept { return min_ratio; }
};

/// Known inequality ids.
const std::vector<std::string>& inequality_ids();

// ---------------------------------------------------------------------------
// Checks

/// LHS = \int|grad u|^p - lambda1 (\int|u|^q)^{p/q}, RHS = \int|grad u|^p.
DeficitReport check_friedrichs(const Batch& batch, const EigenPair& pair, const Exponents& exps);

struct ImprovedOptions {
  /// Descent steps minimizing the ratio from the worst sample (0 disables).
  int adversarial_steps = 0;
  /// Report id; "improved-1.9" for phi-power(q-1), "generalized-1.14" otherwise.
  std::string id;
  double gamma = 1.0;
};

/// LHS = Friedrichs deficit, RHS = M_l[u].
DeficitReport check_improved(const Batch& batch, const EigenPair& pair, const Exponents& exps,
                             const LinearFunctionalSpec& lspec, const ImprovedOptions& options = {});

struct HiddenOptions {
  int t_nodes = 33;
  /// Golden-section refinement iterations around the grid argmax.
  int refine_iterations = 40;
};

/// One of hidden-1.15, hidden-1.17, hidden-1.18, hidden-sigma-path.
///   1.15: RHS = (||u||_q/||phi1||_q)^p max_t t(1-t) \int R_p(s|u|, phi1; t)
///   1.17: RHS = \int R_p(|u|, phi1; 1)                       (p = q)
///   1.18: RHS = \int |grad(u/phi1)|^p phi1^p elementwise (p = q)
///   sigma-path: min over interior t of the convexity gap divided by
///     t(1-t) \int R_p(|w|, phi1; t), w = s u.
DeficitReport check_hidden_convexity(const std::string& id, const Batch& batch, const EigenPair& pair,
                                     const Exponents& exps, const HiddenOptions& options = {});

/// Elementwise \int |grad v - (v_e/phi_e) grad phi1|^p for v = |u| (nodal),
/// with phi_e floored at 1e-8 times the least free-node value of phi1.
double hidden_118_rhs(const GridFunction& u, const EigenPair& pair, double p);

/// Per-sample ratio M_{l2}/M_{l1}; min and max are the empirical C1, C2.
DeficitReport check_Ml_equivalence(const LinearFunctionalSpec& l1, const LinearFunctionalSpec& l2,
                                   const Batch& batch, const EigenPair& pair, const Exponents& exps);

/// Ratio P1(t, v) / (||v||_{phi1}^2 + |t|^{p-2} ||grad v||_p^p) over kernel
/// samples v, with t drawn from [-t_max, t_max].
DeficitReport check_P1_lower_bound(const Batch& kernel_batch, const EigenPair& pair, const Exponents& exps,
                                   double t_max = 2.0, const SPathQuadrature& squad = SPathQuadrature());

/// Summary statistics (min/median/max, exclusions) from the sample list.
void finalize_report(DeficitReport& report);

// ---------------------------------------------------------------------------
// Separation constants

struct SeparationConfig {
  int iterations = 400;
  int restarts = 4;
  std::uint64_t seed = 0;
  /// Stopping tolerance on relative improvement per iteration.
  double tolerance = 1e-9;
};

struct SeparationResult {
  double gamma = 0.0;
  double value = 0.0;
  double t = 0.0;
  std::optional<GridFunction> v;
  double gap = 0.0;
  int iterations = 0;
};

/// inf of the Rayleigh quotient of t phi1 + v over |t| <= 1/gamma,
/// ||grad v||_p = 1, \int phi1^{q-1} v = 0.
SeparationResult estimate_Lambda_gamma(double gamma, const EigenPair& pair, const Exponents& exps,
                                       const SeparationConfig& config = {});

/// inf of the Rayleigh quotient over the kernel of \int phi1^{q-1} v.
SeparationResult kernel_rayleigh_min(const EigenPair& pair, const Exponents& exps,
                                     const SeparationConfig& config = {});

/// inf of P1(1,v)/P0(1,v) over ||grad v||_p <= gamma, \int phi1^{q-1} v = 0.
/// `warm` seeds the search (and is kept if nothing better is found).
SeparationResult estimate_Lambda_tilde(double gamma, const EigenPair& pair, const Exponents& exps,
                                       const SeparationConfig& config = {},
                                       const SPathQuadrature& squad = SPathQuadrature(),
                                       const GridFunction* warm = nullptr);

/// Runs the gammas in ascending order, warm-starting each from the previous
/// minimizer; results come back in the caller's order.
std::vector<SeparationResult> sweep_Lambda_tilde(const std::vector<double>& gammas, const EigenPair& pair,
                                                 const Exponents& exps, const SeparationConfig& config = {},
                                                 const SPathQuadrature& squad = SPathQuadrature());

/// P1(1,v)/P0(1,v) evaluated with the s-quadrature.
double tilde_quotient(const GridFunction& v, const EigenPair& pair, const Exponents& exps,
                      const SPathQuadrature& squad);

}  // namespace friedrichs
