#include "friedrichs/decompose.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "assembly.hpp"
#include "friedrichs/error.hpp"
#include "kernels.hpp"

namespace friedrichs {

LinearFunctionalSpec LinearFunctionalSpec::phi_power(double s) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw Error(ErrorCode::invalid_argument, "phi-power exponent must be >= 1");
  LinearFunctionalSpec spec;
  spec.kind = Kind::phi_power;
  spec.exponent = s;
  return spec;
}

LinearFunctionalSpec LinearFunctionalSpec::from_density(GridFunction g) {
  LinearFunctionalSpec spec;
  spec.kind = Kind::density;
  spec.exponent = 0.0;
  spec.density = std::move(g);
  return spec;
}

std::string LinearFunctionalSpec::describe() const {
  if (kind == Kind::density) return "density";
  char buf[64];
  std::snprintf(buf, sizeof buf, "phi-power(%g)", exponent);
  return buf;
}

LinearFunctional LinearFunctional::bind(const LinearFunctionalSpec& spec, const EigenPair& pair) {
  const Grid& g = pair.grid();
  const Vector pphi = g.point_interpolation() * pair.phi1.values();
  Vector pts(pphi.size());
  if (spec.kind == LinearFunctionalSpec::Kind::phi_power) {
    for (Eigen::Index k = 0; k < pts.size(); ++k) pts[k] = kernels::abs_pow(pphi[k], spec.exponent);
  } else {
    if (!spec.density) throw Error(ErrorCode::invalid_argument, "density functional without a density");
    if (!spec.density->grid().same_as(g)) throw Error(ErrorCode::mismatched_grid, "density lives on another grid");
    pts = g.point_interpolation() * spec.density->values();
  }
  Vector r = g.point_interpolation().transpose() * g.point_weights().cwiseProduct(pts);
  g.apply_mask(r);
  const double norm = kernels::dot(r, pair.phi1.values());
  if (!(std::abs(norm) > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::zero_function, "functional annihilates phi1 and cannot be normalized");
  }
  r /= norm;
  return LinearFunctional(spec, std::move(r));
}

double LinearFunctional::operator()(const GridFunction& u) const { return apply(u.values()); }

double LinearFunctional::apply(const Vector& u) const {
  if (u.size() != riesz_.size()) throw Error(ErrorCode::length_mismatch, "functional applied to wrong length");
  return kernels::dot(riesz_, u);
}

Decomposition project(const GridFunction& u, const LinearFunctional& l, const EigenPair& pair) {
  if (!u.grid().same_as(pair.grid())) throw Error(ErrorCode::mismatched_grid, "u and phi1 on different grids");
  const double par = l(u);
  GridFunction perp(u.grid_ptr(), u.values() - par * pair.phi1.values());
  const double res = l(perp);
  return Decomposition{par, std::move(perp), l.spec(), res};
}

std::string to_string(Cone cone) {
  switch (cone) {
    case Cone::c_gamma: return "C_gamma";
    case Cone::c_gamma_prime: return "C_gamma_prime";
    case Cone::boundary: return "boundary";
  }
  return "unknown";
}

Cone cone_classify(const GridFunction& u, double gamma, const LinearFunctional& l, const EigenPair& pair,
                   const Exponents& exps) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "gamma must be positive");
  const Decomposition d = project(u, l, pair);
  const double lhs = std::pow(norm_grad_p(d.perp, exps.p), 1.0 / exps.p);
  const double rhs = gamma * std::abs(d.parallel);
  if (std::abs(lhs - rhs) <= kConeTieTolerance * std::max(lhs, rhs)) return Cone::boundary;
  return lhs < rhs ? Cone::c_gamma : Cone::c_gamma_prime;
}

namespace {

// Minimizes G(u)/p - r.u by damped Newton; returns G at the minimizer.
double dual_energy(const Grid& g, const Vector& r, double p) {
  const Vector z = g.solve_laplacian(r);
  const double gz = kernels::grad_energy(g, z, p);
  const double rz = kernels::dot(r, z);
  if (!(rz > 0.0)) return 0.0;
  Vector u = std::pow(rz / gz, 1.0 / (p - 1.0)) * z;
  auto energy = [&](const Vector& x) { return kernels::grad_energy(g, x, p) / p - kernels::dot(r, x); };
  double e = energy(u);
  const double rnorm = std::sqrt(kernels::dot(r, z));
  for (int it = 0; it < 200; ++it) {
    const Vector grad = g.masked(kernels::grad_energy_gradient(g, u, p) / p - r);
    const double gnorm = std::sqrt(std::max(0.0, kernels::dot(grad, g.solve_laplacian(grad))));
    if (gnorm <= 1e-13 * rnorm) break;
    auto k = assembly::a_stiffness(g, u, p, 1e-14);
    Eigen::SimplicialLDLT<assembly::ColMatrix> ldlt(assembly::restrict_dirichlet(g, k.matrix));
    Vector d = g.masked(ldlt.solve(grad));
    if (ldlt.info() != Eigen::Success || !d.allFinite() || kernels::dot(grad, d) <= 0.0) d = g.solve_laplacian(grad);
    const double slope = kernels::dot(grad, d);
    double step = 1.0;
    bool moved = false;
    for (int k2 = 0; k2 < 60; ++k2, step *= 0.5) {
      const Vector trial = u - step * d;
      const double et = energy(trial);
      if (et <= e - 1e-4 * step * slope) {
        u = trial;
        e = et;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return kernels::grad_energy(g, u, p);
}

}  // namespace

double dual_norm_of(const Vector& riesz, const Grid& grid, double p) {
  if (riesz.size() != grid.num_nodes()) throw Error(ErrorCode::length_mismatch, "riesz vector length");
  if (!(p > 1.0)) throw Error(ErrorCode::invalid_argument, "dual norm needs p > 1");
  const Vector r = grid.masked(riesz);
  const double gstar = dual_energy(grid, r, p);
  return std::pow(gstar, (p - 1.0) / p);
}

double dual_norm(const LinearFunctional& l, const Grid& grid, double p) { return dual_norm_of(l.riesz(), grid, p); }

InverseTriangleResult inverse_triangle_check(const LinearFunctional& l, const GridFunction& omega,
                                             const std::vector<TrianglePair>& samples, double p) {
  const Grid& g = omega.grid();
  const double lw = l(omega);
  if (!(std::abs(lw - 1.0) <= 1e-10)) throw Error(ErrorCode::invalid_argument, "omega must satisfy l[omega] = 1");
  InverseTriangleResult out;
  out.dual_norm = dual_norm(l, g, p);
  out.omega_norm = std::pow(norm_grad_p(omega, p), 1.0 / p);
  out.analytic_bound = 1.0 / (2.0 * out.dual_norm * out.omega_norm + 1.0);
  for (const TrianglePair& s : samples) {
    if (!s.v.grid().same_as(g)) throw Error(ErrorCode::mismatched_grid, "sample on another grid");
    const GridFunction u = omega * s.scale;
    const GridFunction v = s.v - omega * l(s.v);
    const double nu = std::pow(norm_grad_p(u, p), 1.0 / p);
    const double nv = std::pow(norm_grad_p(v, p), 1.0 / p);
    const double den = nu + nv;
    double ratio = 1.0;
    if (den > 0.0 && nu > 0.0 && nv > 0.0) ratio = std::pow(norm_grad_p(u + v, p), 1.0 / p) / den;
    out.min_ratio = std::min(out.min_ratio, ratio);
    ++out.samples;
  }
  return out;
}

}  // namespace friedrichs
