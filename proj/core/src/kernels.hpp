#pragma once

// Raw-vector integrals shared by the functional, solver and verification
// code. All sums are compensated.

#include <cmath>

#include "friedrichs/grid.hpp"
#include "friedrichs/summation.hpp"

namespace friedrichs::kernels {

/// |x|^r sign(x); 0 at x = 0 for r > 0.
inline double signed_pow(double x, double r) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), r), x);
}

/// |x|^r with |0|^0 = 1.
inline double abs_pow(double x, double r) { return std::pow(std::abs(x), r); }

inline double dot(const Vector& a, const Vector& b) {
  CompensatedSum s;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s.value();
}

inline double element_norm2(const Vector& flat, int e, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += flat[e * dim + k] * flat[e * dim + k];
  return s;
}

inline double element_dot(const Vector& a, const Vector& b, int e, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += a[e * dim + k] * b[e * dim + k];
  return s;
}

/// \sum_e |e| |grad u_e|^p
inline double grad_energy(const Grid& g, const Vector& u, double p) {
  const Vector flat = g.gradient_operator() * u;
  CompensatedSum s;
  for (int e = 0; e < g.num_elements(); ++e) {
    s += g.measure(e) * std::pow(element_norm2(flat, e, g.dim()), 0.5 * p);
  }
  return s.value();
}

/// Gradient with respect to nodal values of grad_energy (Dirichlet rows 0).
inline Vector grad_energy_gradient(const Grid& g, const Vector& u, double p) {
  const int d = g.dim();
  Vector flat = g.gradient_operator() * u;
  for (int e = 0; e < g.num_elements(); ++e) {
    const double w = p * g.measure(e) * std::pow(element_norm2(flat, e, d), 0.5 * (p - 2.0));
    for (int k = 0; k < d; ++k) flat[e * d + k] *= w;
  }
  Vector r = g.gradient_operator().transpose() * flat;
  g.apply_mask(r);
  return r;
}

/// \int |u|^q by the zeroth-order point rule.
inline double lq(const Grid& g, const Vector& u, double q) {
  const Vector pts = g.point_interpolation() * u;
  const Vector& w = g.point_weights();
  CompensatedSum s;
  for (Eigen::Index k = 0; k < pts.size(); ++k) s += w[k] * abs_pow(pts[k], q);
  return s.value();
}

/// Gradient of lq with respect to nodal values.
inline Vector lq_gradient(const Grid& g, const Vector& u, double q) {
  Vector pts = g.point_interpolation() * u;
  const Vector& w = g.point_weights();
  for (Eigen::Index k = 0; k < pts.size(); ++k) pts[k] = q * w[k] * signed_pow(pts[k], q - 1.0);
  Vector r = g.point_interpolation().transpose() * pts;
  g.apply_mask(r);
  return r;
}

/// \int a(x) b(x) c(x) style point integrals: sum_k w_k f(k).
template <class F>
double point_integral(const Grid& g, F&& f) {
  const Vector& w = g.point_weights();
  CompensatedSum s;
  for (Eigen::Index k = 0; k < w.size(); ++k) s += w[k] * f(k);
  return s.value();
}

/// <A(a) b, b> for dim-length slices.
inline double a_quad(const double* a, const double* b, int dim, double p) {
  double aa = 0.0, ab = 0.0, bb = 0.0;
  for (int k = 0; k < dim; ++k) {
    aa += a[k] * a[k];
    ab += a[k] * b[k];
    bb += b[k] * b[k];
  }
  if (aa == 0.0) return p == 2.0 ? bb : 0.0;
  return std::pow(aa, 0.5 * (p - 2.0)) * (bb + (p - 2.0) * ab * ab / aa);
}

}  // namespace friedrichs::kernels
