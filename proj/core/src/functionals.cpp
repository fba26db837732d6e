#include "friedrichs/functionals.hpp"

#include <cmath>
#include <numbers>

#include "assembly.hpp"
#include "friedrichs/decompose.hpp"
#include "friedrichs/error.hpp"
#include "kernels.hpp"

namespace friedrichs {

using kernels::abs_pow;
using kernels::signed_pow;

Exponents::Exponents(double p_, double q_) : p(p_), q(q_) {
  if (!(q > 1.0) || !(p >= q) || !(p >= 2.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::invalid_exponents,
                "need p >= q > 1 and p >= 2, got p=" + std::to_string(p) + " q=" + std::to_string(q));
  }
}

EigenPair EigenPair::rescaled(double c) const {
  if (!(c > 0.0)) throw Error(ErrorCode::invalid_argument, "rescaling factor must be positive");
  EigenPair r{lambda1, phi1 * c, norm_q * c, diagnostics};
  return r;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "quadrature needs at least one node");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

SPathQuadrature::SPathQuadrature(int n) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  nodes_.resize(n);
  weights_.resize(n);
  unit_nodes_.resize(n);
  unit_weights_.resize(n);
  for (int k = 0; k < n; ++k) {
    nodes_[k] = unit_nodes_[k] = 0.5 * (x[k] + 1.0);
    unit_weights_[k] = 0.5 * w[k];
    weights_[k] = unit_weights_[k] * (1.0 - nodes_[k]);
  }
}

namespace {

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!a.grid().same_as(b.grid())) {
    throw Error(ErrorCode::mismatched_grid, "arguments live on different grids");
  }
}

// Power of the L^q integral, floored when the exponent is negative.
double base_power(double base, double exponent, int* floor_hits) {
  if (exponent < 0.0 && base < kPathBaseFloor) {
    base = kPathBaseFloor;
    if (floor_hits) ++*floor_hits;
  }
  return std::pow(base, exponent);
}

}  // namespace

double norm_grad_p(const GridFunction& u, double p) { return kernels::grad_energy(u.grid(), u.values(), p); }

double norm_q(const GridFunction& u, double q) { return kernels::lq(u.grid(), u.values(), q); }

double rayleigh(const GridFunction& u, const Exponents& exps) {
  const double a = norm_q(u, exps.q);
  if (!(a > 0.0)) throw Error(ErrorCode::zero_function, "Rayleigh quotient of the zero function");
  return norm_grad_p(u, exps.p) / std::pow(a, exps.p_over_q());
}

Vector grad_rayleigh(const GridFunction& u, const Exponents& exps) {
  const Grid& g = u.grid();
  const double a = kernels::lq(g, u.values(), exps.q);
  if (!(a > 0.0)) throw Error(ErrorCode::zero_function, "Rayleigh quotient of the zero function");
  const double n = std::pow(a, exps.p_over_q());
  const double r = kernels::grad_energy(g, u.values(), exps.p) / n;
  const Vector dg = kernels::grad_energy_gradient(g, u.values(), exps.p);
  const Vector da = kernels::lq_gradient(g, u.values(), exps.q);
  return (dg - r * exps.p_over_q() * std::pow(a, exps.p_over_q() - 1.0) * da) / n;
}

double deficit_J(const GridFunction& u, const EigenPair& pair, const Exponents& exps) {
  require_same_grid(u, pair.phi1);
  const double g = norm_grad_p(u, exps.p);
  const double a = norm_q(u, exps.q);
  return g / exps.p - pair.lambda1 / exps.p * std::pow(a, exps.p_over_q());
}

double dJ(const GridFunction& u, const GridFunction& v, const EigenPair& pair, const Exponents& exps) {
  require_same_grid(u, pair.phi1);
  require_same_grid(u, v);
  const Grid& g = u.grid();
  const int d = g.dim();
  const Vector gu = g.gradient_operator() * u.values();
  const Vector gv = g.gradient_operator() * v.values();
  CompensatedSum stiff;
  for (int e = 0; e < g.num_elements(); ++e) {
    const double w = std::pow(kernels::element_norm2(gu, e, d), 0.5 * (exps.p - 2.0));
    stiff += g.measure(e) * w * kernels::element_dot(gu, gv, e, d);
  }
  const Vector pu = g.point_interpolation() * u.values();
  const Vector pv = g.point_interpolation() * v.values();
  const double mass = kernels::point_integral(g, [&](Eigen::Index k) { return signed_pow(pu[k], exps.q - 1.0) * pv[k]; });
  const double a = kernels::lq(g, u.values(), exps.q);
  return stiff.value() - pair.lambda1 * base_power(a, exps.sub_exponent(), nullptr) * mass;
}

Vector grad_J(const GridFunction& u, const EigenPair& pair, const Exponents& exps) {
  require_same_grid(u, pair.phi1);
  const Grid& g = u.grid();
  const double a = kernels::lq(g, u.values(), exps.q);
  const Vector dg = kernels::grad_energy_gradient(g, u.values(), exps.p);
  const Vector da = kernels::lq_gradient(g, u.values(), exps.q);
  return dg / exps.p - pair.lambda1 * std::pow(a, exps.sub_exponent()) / exps.q * da;
}

Eigen::VectorXd matA_apply(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double p) {
  if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "matA_apply dimension mismatch");
  const double aa = a.squaredNorm();
  if (aa == 0.0) return p == 2.0 ? Eigen::VectorXd(b) : Eigen::VectorXd::Zero(b.size());
  return std::pow(aa, 0.5 * (p - 2.0)) * (b + (p - 2.0) * a.dot(b) / aa * a);
}

double matA_quad(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double p) {
  if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "matA_quad dimension mismatch");
  return kernels::a_quad(a.data(), b.data(), static_cast<int>(a.size()), p);
}

namespace {

// \sum_e |e| <A(grad base_e + c grad v_e) grad v_e, grad v_e>
double a_form(const Grid& g, const Vector& gbase, const Vector& gv, double c, double p) {
  const int d = g.dim();
  CompensatedSum s;
  double a[2];
  for (int e = 0; e < g.num_elements(); ++e) {
    for (int k = 0; k < d; ++k) a[k] = gbase[e * d + k] + c * gv[e * d + k];
    s += g.measure(e) * kernels::a_quad(a, gv.data() + e * d, d, p);
  }
  return s.value();
}

}  // namespace

double stiffness_A(const GridFunction& v, const EigenPair& pair, double p) {
  require_same_grid(v, pair.phi1);
  const Grid& g = v.grid();
  return a_form(g, g.gradient_operator() * pair.phi1.values(), g.gradient_operator() * v.values(), 0.0, p);
}

double norm_phi1(const GridFunction& v, const EigenPair& pair, double p) {
  require_same_grid(v, pair.phi1);
  const Grid& g = v.grid();
  const int d = g.dim();
  const Vector gphi = g.gradient_operator() * pair.phi1.values();
  const Vector gv = g.gradient_operator() * v.values();
  CompensatedSum s;
  for (int e = 0; e < g.num_elements(); ++e) {
    const double w = abs_pow(std::sqrt(kernels::element_norm2(gphi, e, d)), p - 2.0);
    s += g.measure(e) * w * kernels::element_norm2(gv, e, d);
  }
  return std::sqrt(std::max(0.0, s.value()));
}

double Q0(const GridFunction& v, const EigenPair& pair, const Exponents& exps) {
  require_same_grid(v, pair.phi1);
  const Grid& g = v.grid();
  const double p = exps.p, q = exps.q;
  const Vector pphi = g.point_interpolation() * pair.phi1.values();
  const Vector pv = g.point_interpolation() * v.values();
  const double a = kernels::lq(g, pair.phi1.values(), q);
  const double mass = kernels::point_integral(g, [&](Eigen::Index k) { return abs_pow(pphi[k], q - 2.0) * pv[k] * pv[k]; });
  const double lin = kernels::point_integral(g, [&](Eigen::Index k) { return signed_pow(pphi[k], q - 1.0) * pv[k]; });
  const double lam = pair.lambda1;
  return 0.5 * stiffness_A(v, pair, p) - 0.5 * lam * (q - 1.0) * std::pow(a, exps.sub_exponent()) * mass -
         0.5 * lam * (p - q) * base_power(a, exps.rank_one_exponent(), nullptr) * lin * lin;
}

double P1_family(double t, const GridFunction& v, const EigenPair& pair, const Exponents& exps,
                 const SPathQuadrature& squad) {
  require_same_grid(v, pair.phi1);
  const Grid& g = v.grid();
  const int d = g.dim();
  const Vector gphi = g.gradient_operator() * pair.phi1.values();
  const Vector gv = g.gradient_operator() * v.values();
  const auto& xs = squad.unit_nodes();
  const auto& ws = squad.unit_weights();
  CompensatedSum s;
  double a[2];
  // The s-integrand of an element is only C^0 where |grad phi1 + s t grad v|
  // is smallest, so each element's s-interval is split there.
  auto piece = [&](int e, double lo, double hi) {
    const double* pg = gphi.data() + e * d;
    const double* pv = gv.data() + e * d;
    double acc = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double sk = lo + (hi - lo) * xs[k];
      for (int i = 0; i < d; ++i) a[i] = pg[i] + sk * t * pv[i];
      acc += ws[k] * (1.0 - sk) * kernels::a_quad(a, pv, d, exps.p);
    }
    return (hi - lo) * acc;
  };
  for (int e = 0; e < g.num_elements(); ++e) {
    double ab = 0.0, bb = 0.0;
    for (int i = 0; i < d; ++i) {
      ab += gphi[e * d + i] * t * gv[e * d + i];
      bb += t * gv[e * d + i] * t * gv[e * d + i];
    }
    const double star = bb > 0.0 ? -ab / bb : -1.0;
    double val = 0.0;
    if (star > 0.0 && star < 1.0) {
      val = piece(e, 0.0, star) + piece(e, star, 1.0);
    } else {
      val = piece(e, 0.0, 1.0);
    }
    s += g.measure(e) * val;
  }
  return s.value();
}

PathValue P0_family_detail(double t, const GridFunction& v, const EigenPair& pair, const Exponents& exps,
                           const SPathQuadrature& squad) {
  require_same_grid(v, pair.phi1);
  const Grid& g = v.grid();
  const double p = exps.p, q = exps.q;
  const Vector pphi = g.point_interpolation() * pair.phi1.values();
  const Vector pv = g.point_interpolation() * v.values();
  PathValue out;
  CompensatedSum s;
  Vector path(pphi.size());
  for (int k = 0; k < squad.size(); ++k) {
    const double st = squad.nodes()[k] * t;
    path = pphi + st * pv;
    const double a = kernels::point_integral(g, [&](Eigen::Index i) { return abs_pow(path[i], q); });
    const double mass = kernels::point_integral(g, [&](Eigen::Index i) { return abs_pow(path[i], q - 2.0) * pv[i] * pv[i]; });
    const double lin = kernels::point_integral(g, [&](Eigen::Index i) { return signed_pow(path[i], q - 1.0) * pv[i]; });
    double term = (q - 1.0) * base_power(a, exps.sub_exponent(), &out.floor_hits) * mass;
    if (p != q) term += (p - q) * base_power(a, exps.rank_one_exponent(), &out.floor_hits) * lin * lin;
    s += squad.weights()[k] * term;
  }
  out.value = s.value();
  if (!std::isfinite(out.value)) {
    throw Error(ErrorCode::degenerate_base, "path integral is not finite at t=" + std::to_string(t));
  }
  return out;
}

double P0_family(double t, const GridFunction& v, const EigenPair& pair, const Exponents& exps,
                 const SPathQuadrature& squad) {
  return P0_family_detail(t, v, pair, exps, squad).value;
}

Vector R_p(const GridFunction& v, const GridFunction& w, double t, double p) {
  require_same_grid(v, w);
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::invalid_argument, "R_p needs t in [0,1]");
  if (!(p > 1.0)) throw Error(ErrorCode::invalid_argument, "R_p needs p > 1");
  const Grid& g = v.grid();
  const int d = g.dim();
  const Vector gv = g.gradient_operator() * v.values();
  const Vector gw = g.gradient_operator() * w.values();
  const Vector av = g.averaging_operator() * v.values();
  const Vector aw = g.averaging_operator() * w.values();
  Vector r(g.num_elements());
  for (int e = 0; e < g.num_elements(); ++e) {
    double diff2 = 0.0, wv2 = 0.0, vw2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double x = aw[e] * gv[e * d + k];
      const double y = av[e] * gw[e * d + k];
      diff2 += (x - y) * (x - y);
      wv2 += x * x;
      vw2 += y * y;
    }
    double num;
    if (p >= 2.0) {
      num = std::pow(diff2, 0.5 * p);
    } else {
      const double base = wv2 + vw2;
      num = base > 0.0 ? std::pow(base, 0.5 * (p - 2.0)) * diff2 : 0.0;
    }
    const double den = (1.0 - t) * abs_pow(av[e], p) + t * abs_pow(aw[e], p);
    if (den > 0.0) {
      r[e] = num / den;
    } else if (num == 0.0) {
      r[e] = 0.0;
    } else {
      throw Error(ErrorCode::degenerate_base, "R_p division underflow on element " + std::to_string(e));
    }
  }
  return r;
}

double integral_R_p(const GridFunction& v, const GridFunction& w, double t, double p) {
  const Vector r = R_p(v, w, t, p);
  return integrate(v.grid(), std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
}

double M_l(const GridFunction& u, const LinearFunctional& l, const EigenPair& pair, const Exponents& exps) {
  require_same_grid(u, pair.phi1);
  const double c = l(u);
  const GridFunction perp = u - pair.phi1 * c;
  const double n = norm_phi1(perp, pair, exps.p);
  return abs_pow(c, exps.p - 2.0) * n * n + norm_grad_p(perp, exps.p);
}

Vector grad_M_l(const GridFunction& u, const LinearFunctional& l, const EigenPair& pair, const Exponents& exps) {
  require_same_grid(u, pair.phi1);
  const Grid& g = u.grid();
  const double p = exps.p;
  const Vector& phi = pair.phi1.values();
  const Vector& r = l.riesz();
  const double c = l.apply(u.values());
  const Vector w = u.values() - c * phi;
  const assembly::ColMatrix kw = assembly::weighted_laplacian(g, phi, p);
  const Vector kww = kw * w;
  const double n2 = kernels::dot(w, kww);
  // P^T y = y - r (phi . y)
  auto pt = [&](const Vector& y) { Vector z = y - r * kernels::dot(phi, y); return z; };
  Vector grad = abs_pow(c, p - 2.0) * pt(2.0 * kww) + pt(kernels::grad_energy_gradient(g, w, p));
  if (p != 2.0 && c != 0.0) grad += (p - 2.0) * signed_pow(c, p - 3.0) * n2 * r;
  g.apply_mask(grad);
  return grad;
}

double lumped_pairing(const GridFunction& f, const GridFunction& u) {
  require_same_grid(f, u);
  const Vector& m = f.grid().lumped_mass();
  CompensatedSum s;
  for (int i = 0; i < f.size(); ++i) s += m[i] * f[i] * u[i];
  return s.value();
}

double energy_E(const GridFunction& u, const EigenPair& pair, const Exponents& exps, const GridFunction& f) {
  return deficit_J(u, pair, exps) - lumped_pairing(f, u);
}

Vector grad_E(const GridFunction& u, const EigenPair& pair, const Exponents& exps, const GridFunction& f) {
  Vector g = grad_J(u, pair, exps) - f.grid().lumped_mass().cwiseProduct(f.values());
  u.grid().apply_mask(g);
  return g;
}

}  // namespace friedrichs
