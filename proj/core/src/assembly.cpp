#include "assembly.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"

namespace friedrichs::assembly {

namespace {

ColMatrix from_blocks(const Grid& g, const std::vector<Eigen::Triplet<double>>& blocks) {
  const int rows = g.num_elements() * g.dim();
  ColMatrix w(rows, rows);
  w.setFromTriplets(blocks.begin(), blocks.end());
  const ColMatrix d = g.gradient_operator();
  ColMatrix k = d.transpose() * w * d;
  k.prune(0.0);
  return k;
}

}  // namespace

WeightedStiffness a_stiffness(const Grid& g, const Vector& base, double p, double floor_rel) {
  const int d = g.dim();
  const int ne = g.num_elements();
  const Vector flat = g.gradient_operator() * base;
  std::vector<double> weight(ne);
  double wmax = 0.0;
  for (int e = 0; e < ne; ++e) {
    const double aa = kernels::element_norm2(flat, e, d);
    weight[e] = (aa == 0.0 && p > 2.0) ? 0.0 : std::pow(aa, 0.5 * (p - 2.0));
    wmax = std::max(wmax, weight[e]);
  }
  const double floor = floor_rel * wmax;
  WeightedStiffness out;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ne) * d * d);
  for (int e = 0; e < ne; ++e) {
    const double m = g.measure(e);
    const double aa = kernels::element_norm2(flat, e, d);
    if (weight[e] < floor) {
      ++out.floor_hits;
      for (int k = 0; k < d; ++k) trip.emplace_back(e * d + k, e * d + k, m * floor);
      continue;
    }
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        double v = (i == j) ? 1.0 : 0.0;
        if (aa > 0.0) v += (p - 2.0) * flat[e * d + i] * flat[e * d + j] / aa;
        trip.emplace_back(e * d + i, e * d + j, m * weight[e] * v);
      }
    }
  }
  out.matrix = from_blocks(g, trip);
  return out;
}

ColMatrix weighted_laplacian(const Grid& g, const Vector& base, double p) {
  const int d = g.dim();
  const Vector flat = g.gradient_operator() * base;
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < g.num_elements(); ++e) {
    const double w = g.measure(e) * kernels::abs_pow(std::sqrt(kernels::element_norm2(flat, e, d)), p - 2.0);
    for (int k = 0; k < d; ++k) trip.emplace_back(e * d + k, e * d + k, w);
  }
  return from_blocks(g, trip);
}

ColMatrix point_mass(const Grid& g, const Vector& point_coeffs) {
  const ColMatrix b = g.point_interpolation();
  const Vector c = g.point_weights().cwiseProduct(point_coeffs);
  ColMatrix m = b.transpose() * c.asDiagonal() * b;
  m.prune(0.0);
  return m;
}

ColMatrix restrict_dirichlet(const Grid& g, const ColMatrix& a) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int c = 0; c < a.outerSize(); ++c) {
    for (ColMatrix::InnerIterator it(a, c); it; ++it) {
      if (!g.is_boundary(static_cast<int>(it.row())) && !g.is_boundary(static_cast<int>(it.col()))) {
        trip.emplace_back(it.row(), it.col(), it.value());
      }
    }
  }
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (g.is_boundary(i)) trip.emplace_back(i, i, 1.0);
  }
  ColMatrix r(a.rows(), a.cols());
  r.setFromTriplets(trip.begin(), trip.end());
  return r;
}

ColMatrix bordered(const ColMatrix& a, const std::vector<Vector>& cols, const std::vector<Vector>& rows,
                   const Eigen::MatrixXd& corner) {
  const Eigen::Index n = a.rows();
  const Eigen::Index extra = static_cast<Eigen::Index>(cols.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * extra * n + extra * extra));
  for (int c = 0; c < a.outerSize(); ++c) {
    for (ColMatrix::InnerIterator it(a, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (Eigen::Index j = 0; j < extra; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (cols[j][i] != 0.0) trip.emplace_back(i, n + j, cols[j][i]);
      if (rows[j][i] != 0.0) trip.emplace_back(n + j, i, rows[j][i]);
    }
    for (Eigen::Index k = 0; k < extra; ++k) {
      if (corner(j, k) != 0.0) trip.emplace_back(n + j, n + k, corner(j, k));
    }
  }
  ColMatrix r(n + extra, n + extra);
  r.setFromTriplets(trip.begin(), trip.end());
  return r;
}

}  // namespace friedrichs::assembly
