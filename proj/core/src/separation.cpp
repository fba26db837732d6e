#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "friedrichs/random.hpp"
#include "friedrichs/verify.hpp"
#include "kernels.hpp"
#include "optimize.hpp"

namespace friedrichs {

namespace {

constexpr SampleStyle kStartStyles[] = {SampleStyle::smooth_mode, SampleStyle::bump, SampleStyle::random_nodal};

Vector kernel_functional(const EigenPair& pair, const Exponents& exps) {
  return LinearFunctional::bind(LinearFunctionalSpec::phi_power(exps.q - 1.0), pair).riesz();
}

Vector start_direction(const EigenPair& pair, const optimize::KernelProjector& proj, std::uint64_t seed, int restart) {
  const GridFunction w = sample_test_function(pair.grid_ptr(), derive_seed(seed, restart), kStartStyles[restart % 3]);
  const Vector& r = proj.r();
  const Vector& phi = pair.phi1.values();
  // Oblique projection along phi keeps the sample's shape.
  return w.values() - (kernels::dot(r, w.values()) / kernels::dot(r, phi)) * phi;
}

Vector scale_to(const Grid& g, const Vector& v, double p, double radius) {
  const double n = std::pow(kernels::grad_energy(g, v, p), 1.0 / p);
  return n > 0.0 ? Vector(v * (radius / n)) : v;
}

// Joint descent on R(t phi + v) over |t| <= t_max, ||grad v||_p = 1, r.v = 0.
struct LambdaRun {
  double value;
  double t;
  Vector v;
  int iterations;
};

LambdaRun lambda_descent(const EigenPair& pair, const Exponents& exps, const optimize::KernelProjector& proj,
                         double t_max, Vector v, double t, const SeparationConfig& cfg) {
  const Grid& g = pair.grid();
  const GridPtr& grid = pair.grid_ptr();
  const Vector& phi = pair.phi1.values();
  const double phi_k0 = kernels::grad_energy(g, phi, 2.0);
  const Eigen::Index n = phi.size();
  auto pack = [&](double tt, const Vector& vv) {
    Vector x(n + 1);
    x.head(n) = vv;
    x[n] = tt;
    return x;
  };
  auto f = [&](const Vector& x) {
    const Vector u = x[n] * phi + x.head(n);
    return rayleigh(GridFunction(grid, u), exps);
  };
  auto retract = [&](const Vector& x) {
    Vector vv = proj(x.head(n));
    vv = scale_to(g, vv, exps.p, 1.0);
    return pack(std::clamp(x[n], -t_max, t_max), vv);
  };
  Vector x = retract(pack(t, v));
  double value = f(x);
  optimize::LineSearch ls;
  ls.refine = true;
  int it = 0;
  for (; it < cfg.iterations; ++it) {
    const Vector u = x[n] * phi + x.head(n);
    const Vector gu = g.masked(grad_rayleigh(GridFunction(grid, u), exps));
    Vector d = pack(kernels::dot(gu, phi) / phi_k0, proj(g.solve_laplacian(gu)));
    // A t-direction pushing against an active bound is dropped.
    if ((x[n] >= t_max && d[n] < 0.0) || (x[n] <= -t_max && d[n] > 0.0)) d[n] = 0.0;
    const double slope = d[n] * kernels::dot(gu, phi) + kernels::dot(gu, d.head(n));
    if (!(slope > 0.0)) break;
    auto step = optimize::armijo(f, retract, x, value, d, slope, ls);
    if (!step.accepted) break;
    const double drop = value - step.value;
    x = std::move(step.x);
    value = step.value;
    if (drop <= cfg.tolerance * std::abs(value)) break;
  }
  return LambdaRun{value, x[n], x.head(n), it};
}

SeparationResult lambda_search(double gamma, const EigenPair& pair, const Exponents& exps,
                               const SeparationConfig& cfg, bool kernel_only) {
  const optimize::KernelProjector proj(pair.grid(), kernel_functional(pair, exps));
  const double t_max = kernel_only ? 0.0 : 1.0 / gamma;
  SeparationResult best;
  best.gamma = gamma;
  best.value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < std::max(1, cfg.restarts); ++k) {
    const Vector v0 = start_direction(pair, proj, cfg.seed, k);
    const LambdaRun run = lambda_descent(pair, exps, proj, t_max, v0, t_max, cfg);
    best.iterations += run.iterations;
    if (run.value < best.value) {
      best.value = run.value;
      best.t = run.t;
      best.v = GridFunction(pair.grid_ptr(), run.v);
    }
  }
  if (!std::isfinite(best.value)) throw Error(ErrorCode::no_convergence, "separation search produced no finite value");
  best.gap = best.value - pair.lambda1;
  return best;
}

// Closed forms of the path integrals at t = 1:
//   P1(1,v) = [G(phi+v) - G(phi) - G'(phi)v]/p,  P0(1,v) = [N(phi+v) - N(phi) - N'(phi)v]/p
// with N = (\int|u|^q)^{p/q}.
struct TildeForms {
  const Grid& g;
  const Exponents& e;
  Vector phi;
  double g_phi, n_phi;
  Vector dg_phi, dn_phi;

  TildeForms(const EigenPair& pair, const Exponents& exps)
      : g(pair.grid()), e(exps), phi(pair.phi1.values()) {
    g_phi = kernels::grad_energy(g, phi, e.p);
    n_phi = n_value(phi);
    dg_phi = kernels::grad_energy_gradient(g, phi, e.p);
    dn_phi = n_grad(phi);
  }
  double n_value(const Vector& u) const { return std::pow(kernels::lq(g, u, e.q), e.p_over_q()); }
  Vector n_grad(const Vector& u) const {
    return e.p_over_q() * std::pow(kernels::lq(g, u, e.q), e.p_over_q() - 1.0) * kernels::lq_gradient(g, u, e.q);
  }
  double p1(const Vector& v) const {
    return (kernels::grad_energy(g, phi + v, e.p) - g_phi - kernels::dot(dg_phi, v)) / e.p;
  }
  double p0(const Vector& v) const { return (n_value(phi + v) - n_phi - kernels::dot(dn_phi, v)) / e.p; }
  double quotient(const Vector& v) const {
    const double d = p0(v);
    return d > 0.0 ? p1(v) / d : std::numeric_limits<double>::infinity();
  }
  Vector gradient(const Vector& v, double value) const {
    const Vector u = phi + v;
    const Vector g1 = (kernels::grad_energy_gradient(g, u, e.p) - dg_phi) / e.p;
    const Vector g0 = (n_grad(u) - dn_phi) / e.p;
    return g.masked((g1 - value * g0) / p0(v));
  }
};

Vector tilde_descent(const TildeForms& forms, const optimize::KernelProjector& proj, double gamma, Vector v,
                     const SeparationConfig& cfg, int& iterations) {
  const Grid& g = forms.g;
  const double p = forms.e.p;
  auto retract = [&](const Vector& x) {
    Vector y = proj(x);
    const double n = std::pow(kernels::grad_energy(g, y, p), 1.0 / p);
    if (n > gamma) y *= gamma / n;
    return y;
  };
  auto f = [&](const Vector& x) { return forms.quotient(x); };
  v = retract(v);
  double value = f(v);
  optimize::LineSearch ls;
  ls.refine = true;
  for (int it = 0; it < cfg.iterations; ++it, ++iterations) {
    const Vector grad = forms.gradient(v, value);
    const Vector d = proj(g.solve_laplacian(grad));
    const double slope = kernels::dot(grad, d);
    if (!(slope > 0.0)) break;
    if (it == 0) ls.step = 0.5 * gamma / std::max(1e-300, std::pow(kernels::grad_energy(g, d, p), 1.0 / p));
    auto step = optimize::armijo(f, retract, v, value, d, slope, ls);
    if (!step.accepted) break;
    const double drop = value - step.value;
    v = std::move(step.x);
    value = step.value;
    if (drop <= cfg.tolerance * std::abs(value)) break;
  }
  return v;
}

}  // namespace

SeparationResult estimate_Lambda_gamma(double gamma, const EigenPair& pair, const Exponents& exps,
                                       const SeparationConfig& config) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "gamma must be positive");
  return lambda_search(gamma, pair, exps, config, false);
}

SeparationResult kernel_rayleigh_min(const EigenPair& pair, const Exponents& exps, const SeparationConfig& config) {
  SeparationResult r = lambda_search(std::numeric_limits<double>::infinity(), pair, exps, config, true);
  r.gamma = std::numeric_limits<double>::infinity();
  r.t = 0.0;
  return r;
}

double tilde_quotient(const GridFunction& v, const EigenPair& pair, const Exponents& exps,
                      const SPathQuadrature& squad) {
  const double den = P0_family(1.0, v, pair, exps, squad);
  if (!(den > 0.0)) throw Error(ErrorCode::zero_function, "P0 vanishes; v must be nonzero");
  return P1_family(1.0, v, pair, exps, squad) / den;
}

SeparationResult estimate_Lambda_tilde(double gamma, const EigenPair& pair, const Exponents& exps,
                                       const SeparationConfig& config, const SPathQuadrature& squad,
                                       const GridFunction* warm) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "gamma must be positive");
  const optimize::KernelProjector proj(pair.grid(), kernel_functional(pair, exps));
  const TildeForms forms(pair, exps);
  SeparationResult best;
  best.gamma = gamma;
  best.t = 1.0;
  best.value = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& v) {
    GridFunction gv(pair.grid_ptr(), v);
    if (gv.is_zero()) return;
    const double q = tilde_quotient(gv, pair, exps, squad);
    if (q < best.value) {
      best.value = q;
      best.v = std::move(gv);
    }
  };
  if (warm) {
    if (!warm->grid().same_as(pair.grid())) throw Error(ErrorCode::mismatched_grid, "warm start on another grid");
    consider(warm->values());
    consider(tilde_descent(forms, proj, gamma, warm->values() * 2.0, config, best.iterations));
  }
  for (int k = 0; k < std::max(1, config.restarts); ++k) {
    const Vector v0 = scale_to(pair.grid(), start_direction(pair, proj, config.seed, k), exps.p, gamma);
    consider(tilde_descent(forms, proj, gamma, v0, config, best.iterations));
  }
  if (!best.v) throw Error(ErrorCode::no_convergence, "tilde search produced no admissible direction");
  best.gap = best.value - pair.lambda1;
  return best;
}

std::vector<SeparationResult> sweep_Lambda_tilde(const std::vector<double>& gammas, const EigenPair& pair,
                                                 const Exponents& exps, const SeparationConfig& config,
                                                 const SPathQuadrature& squad) {
  std::vector<std::size_t> order(gammas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gammas[a] < gammas[b]; });
  std::vector<SeparationResult> out(gammas.size());
  const GridFunction* warm = nullptr;
  for (std::size_t idx : order) {
    out[idx] = estimate_Lambda_tilde(gammas[idx], pair, exps, config, squad, warm);
    warm = &*out[idx].v;
  }
  return out;
}

}  // namespace friedrichs
