#pragma once

#include <optional>
#include <string>
#include <vector>

#include "friedrichs/functionals.hpp"

namespace friedrichs {

/// Description of a bounded linear functional normalized so that l[phi1] = 1.
///   phi-power(s): l[u] = \int phi1^s u / \int phi1^{s+1}
///   density(g):   l[u] = \int g u / \int g phi1
struct LinearFunctionalSpec {
  enum class Kind { phi_power, density };

  Kind kind = Kind::phi_power;
  double exponent = 1.0;
  std::optional<GridFunction> density;

  static LinearFunctionalSpec phi_power(double s);
  static LinearFunctionalSpec from_density(GridFunction g);

  std::string describe() const;
};

/// A functional bound to a particular phi1: l[u] = riesz . u.
class LinearFunctional {
 public:
  static LinearFunctional bind(const LinearFunctionalSpec& spec, const EigenPair& pair);

  double operator()(const GridFunction& u) const;
  double apply(const Vector& u) const;

  const LinearFunctionalSpec& spec() const noexcept { return spec_; }
  /// Nodal representer (Dirichlet entries zero).
  const Vector& riesz() const noexcept { return riesz_; }

 private:
  LinearFunctional(LinearFunctionalSpec spec, Vector riesz) : spec_(std::move(spec)), riesz_(std::move(riesz)) {}

  LinearFunctionalSpec spec_;
  Vector riesz_;
};

/// u = parallel * phi1 + perp with l[perp] = 0.
struct Decomposition {
  double parallel;
  GridFunction perp;
  LinearFunctionalSpec spec;
  /// l[perp], zero up to round-off.
  double residual;
};

/// Pu = u - l[u] phi1.
Decomposition project(const GridFunction& u, const LinearFunctional& l, const EigenPair& pair);

enum class Cone { c_gamma, c_gamma_prime, boundary };

std::string to_string(Cone cone);

/// Compares ||grad u_perp||_p with gamma |u_par|; ties within 1e-12 relative
/// are reported as `boundary`.
Cone cone_classify(const GridFunction& u, double gamma, const LinearFunctional& l,
                   const EigenPair& pair, const Exponents& exps);

inline constexpr double kConeTieTolerance = 1e-12;

/// Dual norm sup |l[u]| / ||grad u||_p over the discrete space.
double dual_norm(const LinearFunctional& l, const Grid& grid, double p);
/// Same for the functional u -> riesz . u.
double dual_norm_of(const Vector& riesz, const Grid& grid, double p);

/// (u, v) pair for the inverse triangle check: u = scale * omega and
/// v projected onto Ker(l) along omega.
struct TrianglePair {
  double scale;
  GridFunction v;
};

struct InverseTriangleResult {
  double min_ratio = 1.0;
  double analytic_bound = 0.0;
  double dual_norm = 0.0;
  double omega_norm = 0.0;
  int samples = 0;
};

/// min ||u + v|| / (||u|| + ||v||) over the sampled pairs, in the W^{1,p}_0
/// norm ||grad .||_p, alongside the bound (2 ||l||_* ||omega|| + 1)^{-1}.
/// omega must satisfy l[omega] = 1.
InverseTriangleResult inverse_triangle_check(const LinearFunctional& l, const GridFunction& omega,
                                             const std::vector<TrianglePair>& samples, double p);

}  // namespace friedrichs
