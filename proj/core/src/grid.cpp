#include "friedrichs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>

#include "friedrichs/error.hpp"
#include "friedrichs/random.hpp"
#include "friedrichs/summation.hpp"

namespace friedrichs {

GridSpec GridSpec::interval(double a, double b, int n) {
  GridSpec s;
  s.dim = 1;
  s.corners = {a, b, 0.0, 0.0};
  s.cells = {n, 1};
  return s;
}

GridSpec GridSpec::rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  GridSpec s;
  s.dim = 2;
  s.corners = {x0, x1, y0, y1};
  s.cells = {nx, ny};
  return s;
}

struct Grid::LaplacianCache {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
};

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  if (spec.dim != 1 && spec.dim != 2) {
    throw Error(ErrorCode::invalid_argument, "grid dimension must be 1 or 2");
  }
  const int axes = spec.dim;
  for (int k = 0; k < axes; ++k) {
    if (spec.cells[k] < 2) {
      throw Error(ErrorCode::invalid_resolution,
                  "need at least 2 cells per axis, got " + std::to_string(spec.cells[k]));
    }
    const double lo = spec.corners[2 * k];
    const double hi = spec.corners[2 * k + 1];
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw Error(ErrorCode::degenerate_domain, "axis " + std::to_string(k) +
                                                    " has non-positive length");
    }
  }
  if (spec.dim == 1) {
    spec_.cells[1] = 1;
    spec_.corners[2] = spec_.corners[3] = 0.0;
    build_1d();
  } else {
    build_2d();
  }
  build_operators();
}

void Grid::build_1d() {
  const int n = spec_.cells[0];
  const double a = spec_.corners[0];
  const double b = spec_.corners[1];
  const double h = (b - a) / n;
  coords_.resize(2 * (n + 1));
  is_boundary_.assign(n + 1, 0);
  for (int i = 0; i <= n; ++i) {
    coords_[2 * i] = (i == n) ? b : a + i * h;
    coords_[2 * i + 1] = 0.0;
  }
  is_boundary_[0] = is_boundary_[n] = 1;
  connectivity_.resize(2 * n);
  measures_.resize(n);
  basis_gradients_.resize(2 * n);
  for (int e = 0; e < n; ++e) {
    connectivity_[2 * e] = e;
    connectivity_[2 * e + 1] = e + 1;
    const double len = coords_[2 * (e + 1)] - coords_[2 * e];
    measures_[e] = len;
    basis_gradients_[2 * e] = -1.0 / len;
    basis_gradients_[2 * e + 1] = 1.0 / len;
  }
  domain_measure_ = b - a;
  mesh_size_ = h;
}

void Grid::build_2d() {
  const int nx = spec_.cells[0];
  const int ny = spec_.cells[1];
  const double x0 = spec_.corners[0], x1 = spec_.corners[1];
  const double y0 = spec_.corners[2], y1 = spec_.corners[3];
  const double hx = (x1 - x0) / nx;
  const double hy = (y1 - y0) / ny;
  const int nn = (nx + 1) * (ny + 1);
  coords_.resize(2 * nn);
  is_boundary_.assign(nn, 0);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int k = id(i, j);
      coords_[2 * k] = (i == nx) ? x1 : x0 + i * hx;
      coords_[2 * k + 1] = (j == ny) ? y1 : y0 + j * hy;
      is_boundary_[k] = (i == 0 || j == 0 || i == nx || j == ny) ? 1 : 0;
    }
  }
  const int ne = 2 * nx * ny;
  connectivity_.resize(3 * ne);
  measures_.resize(ne);
  basis_gradients_.resize(6 * ne);
  int e = 0;
  auto add_triangle = [&](int n0, int n1, int n2) {
    const int nodes[3] = {n0, n1, n2};
    double px[3], py[3];
    for (int k = 0; k < 3; ++k) {
      connectivity_[3 * e + k] = nodes[k];
      px[k] = coords_[2 * nodes[k]];
      py[k] = coords_[2 * nodes[k] + 1];
    }
    const double det = (px[1] - px[0]) * (py[2] - py[0]) - (px[2] - px[0]) * (py[1] - py[0]);
    measures_[e] = 0.5 * std::abs(det);
    // grad(lambda_k) = rot90(opposite edge) / det
    for (int k = 0; k < 3; ++k) {
      const int a = (k + 1) % 3;
      const int b = (k + 2) % 3;
      basis_gradients_[6 * e + 2 * k] = (py[a] - py[b]) / det;
      basis_gradients_[6 * e + 2 * k + 1] = (px[b] - px[a]) / det;
    }
    ++e;
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = id(i, j), n10 = id(i + 1, j), n01 = id(i, j + 1), n11 = id(i + 1, j + 1);
      add_triangle(n00, n10, n11);
      add_triangle(n00, n11, n01);
    }
  }
  domain_measure_ = (x1 - x0) * (y1 - y0);
  mesh_size_ = std::max(hx, hy);
}

void Grid::build_operators() {
  const int nn = num_nodes();
  const int ne = num_elements();
  const int d = dim();
  const int m = nodes_per_element();

  free_nodes_.clear();
  for (int i = 0; i < nn; ++i) {
    if (!is_boundary_[i]) free_nodes_.push_back(i);
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ne) * d * m);
  for (int e = 0; e < ne; ++e) {
    for (int k = 0; k < d; ++k) {
      for (int a = 0; a < m; ++a) {
        trip.emplace_back(e * d + k, connectivity_[e * m + a], basis_gradients_[(e * m + a) * d + k]);
      }
    }
  }
  gradient_op_.resize(ne * d, nn);
  gradient_op_.setFromTriplets(trip.begin(), trip.end());

  // Zeroth-order rule: Simpson on segments, edge midpoints on triangles.
  std::vector<std::vector<double>> bary;
  std::vector<double> wts;
  if (d == 1) {
    bary = {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}};
    wts = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
  } else {
    bary = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    wts = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  }
  const int nq = static_cast<int>(wts.size());
  trip.clear();
  point_weights_.resize(ne * nq);
  for (int e = 0; e < ne; ++e) {
    for (int k = 0; k < nq; ++k) {
      const int row = e * nq + k;
      point_weights_[row] = wts[k] * measures_[e];
      for (int a = 0; a < m; ++a) {
        if (bary[k][a] != 0.0) trip.emplace_back(row, connectivity_[e * m + a], bary[k][a]);
      }
    }
  }
  point_interp_.resize(ne * nq, nn);
  point_interp_.setFromTriplets(trip.begin(), trip.end());

  lumped_mass_ = Vector::Zero(nn);
  trip.clear();
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < m; ++a) {
      const int node = connectivity_[e * m + a];
      lumped_mass_[node] += measures_[e] / m;
      trip.emplace_back(e, node, 1.0 / m);
    }
  }
  averaging_op_.resize(ne, nn);
  averaging_op_.setFromTriplets(trip.begin(), trip.end());
}

void Grid::apply_mask(Vector& v) const {
  for (int i = 0; i < num_nodes(); ++i) {
    if (is_boundary_[i]) v[i] = 0.0;
  }
}

Vector Grid::solve_laplacian(const Vector& rhs) const {
  std::call_once(laplacian_once_, [this] {
    const int nn = num_nodes();
    const int d = dim();
    Vector w(num_elements() * d);
    for (int e = 0; e < num_elements(); ++e) {
      for (int k = 0; k < d; ++k) w[e * d + k] = measures_[e];
    }
    const Eigen::SparseMatrix<double> g = gradient_op_;
    Eigen::SparseMatrix<double> k0 = g.transpose() * w.asDiagonal() * g;
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < k0.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(k0, c); it; ++it) {
        if (!is_boundary_[it.row()] && !is_boundary_[it.col()]) {
          trip.emplace_back(it.row(), it.col(), it.value());
        }
      }
    }
    for (int i = 0; i < nn; ++i) {
      if (is_boundary_[i]) trip.emplace_back(i, i, 1.0);
    }
    Eigen::SparseMatrix<double> a(nn, nn);
    a.setFromTriplets(trip.begin(), trip.end());
    auto cache = std::make_shared<LaplacianCache>();
    cache->factor.compute(a);
    laplacian_ = std::move(cache);
  });
  Vector x = laplacian_->factor.solve(masked(rhs));
  apply_mask(x);
  return x;
}

GridPtr build_grid(const GridSpec& spec) { return std::make_shared<const Grid>(spec); }

GridFunction::GridFunction(GridPtr grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw Error(ErrorCode::invalid_argument, "grid function without grid");
  if (values_.size() != grid_->num_nodes()) {
    throw Error(ErrorCode::length_mismatch, "expected " + std::to_string(grid_->num_nodes()) +
                                                " nodal values, got " + std::to_string(values_.size()));
  }
  grid_->apply_mask(values_);
}

GridFunction GridFunction::zeros(GridPtr grid) {
  const int n = grid->num_nodes();
  return GridFunction(std::move(grid), Vector::Zero(n));
}

namespace {
void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_as(b)) throw Error(ErrorCode::mismatched_grid, "grid functions live on different grids");
}
}  // namespace

GridFunction GridFunction::operator+(const GridFunction& o) const {
  require_same_grid(*grid_, *o.grid_);
  return GridFunction(grid_, values_ + o.values_);
}

GridFunction GridFunction::operator-(const GridFunction& o) const {
  require_same_grid(*grid_, *o.grid_);
  return GridFunction(grid_, values_ - o.values_);
}

GridFunction GridFunction::operator-() const { return GridFunction(grid_, -values_); }

GridFunction GridFunction::operator*(double c) const { return GridFunction(grid_, c * values_); }

ElementField gradient(const GridFunction& u) {
  const Grid& g = u.grid();
  ElementField field;
  field.grid = u.grid_ptr();
  const Vector flat = g.gradient_operator() * u.values();
  field.gradients = Eigen::Map<const Eigen::MatrixXd>(flat.data(), g.dim(), g.num_elements());
  field.averages = g.averaging_operator() * u.values();
  field.measures = g.measures();
  return field;
}

double integrate(const Grid& grid, std::span<const double> per_element) {
  if (per_element.size() != static_cast<std::size_t>(grid.num_elements())) {
    throw Error(ErrorCode::length_mismatch, "integrate expects one value per element (" +
                                                std::to_string(grid.num_elements()) + "), got " +
                                                std::to_string(per_element.size()));
  }
  CompensatedSum s;
  for (int e = 0; e < grid.num_elements(); ++e) s += per_element[e] * grid.measure(e);
  return s.value();
}

std::string to_string(SampleStyle style) {
  switch (style) {
    case SampleStyle::random_nodal: return "random-nodal";
    case SampleStyle::smooth_mode: return "smooth-mode";
    case SampleStyle::bump: return "bump";
  }
  return "unknown";
}

SampleStyle sample_style_from_string(const std::string& name) {
  if (name == "random-nodal") return SampleStyle::random_nodal;
  if (name == "smooth-mode") return SampleStyle::smooth_mode;
  if (name == "bump") return SampleStyle::bump;
  throw Error(ErrorCode::invalid_argument, "unknown sample style '" + name + "'");
}

namespace {

// Coordinates rescaled to [0,1] per axis.
std::array<double, 2> unit_coords(const Grid& g, int i) {
  const auto& c = g.spec().corners;
  const auto x = g.node(i);
  std::array<double, 2> r{(x[0] - c[0]) / (c[1] - c[0]), 0.0};
  if (g.dim() == 2) r[1] = (x[1] - c[2]) / (c[3] - c[2]);
  return r;
}

Vector sample_values(const Grid& g, Rng& rng, SampleStyle style) {
  const int nn = g.num_nodes();
  Vector v = Vector::Zero(nn);
  constexpr double pi = std::numbers::pi;
  switch (style) {
    case SampleStyle::random_nodal:
      for (int i : g.free_nodes()) v[i] = rng.uniform(-1.0, 1.0);
      break;
    case SampleStyle::smooth_mode: {
      const int kmax = g.dim() == 1 ? 4 : 3;
      const int lmax = g.dim() == 1 ? 1 : 3;
      std::vector<double> coef(static_cast<std::size_t>(kmax * lmax));
      for (int k = 1; k <= kmax; ++k) {
        for (int l = 1; l <= lmax; ++l) coef[(k - 1) * lmax + (l - 1)] = rng.normal() / (k * l);
      }
      for (int i : g.free_nodes()) {
        const auto x = unit_coords(g, i);
        double s = 0.0;
        for (int k = 1; k <= kmax; ++k) {
          for (int l = 1; l <= lmax; ++l) {
            const double yl = g.dim() == 1 ? 1.0 : std::sin(l * pi * x[1]);
            s += coef[(k - 1) * lmax + (l - 1)] * std::sin(k * pi * x[0]) * yl;
          }
        }
        v[i] = s;
      }
      break;
    }
    case SampleStyle::bump: {
      const double cx = rng.uniform(0.15, 0.85);
      const double cy = g.dim() == 2 ? rng.uniform(0.15, 0.85) : 0.0;
      double radius = rng.uniform(0.1, 0.4);
      const double amp = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
      for (;;) {
        for (int i : g.free_nodes()) {
          const auto x = unit_coords(g, i);
          const double r2 = ((x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy)) / (radius * radius);
          v[i] = r2 < 1.0 ? amp * (1.0 - r2) * (1.0 - r2) : 0.0;
        }
        if (v.cwiseAbs().maxCoeff() > 0.0) break;
        radius *= 2.0;
      }
      break;
    }
  }
  return v;
}

}  // namespace

GridFunction sample_test_function(GridPtr grid, std::uint64_t seed, SampleStyle style) {
  Rng rng(seed, static_cast<std::uint64_t>(style) + 1);
  Vector v = sample_values(*grid, rng, style);
  // A draw that vanishes on every free node is redrawn from the next substream.
  for (std::uint64_t attempt = 1; v.cwiseAbs().maxCoeff() == 0.0; ++attempt) {
    Rng retry = rng.split(attempt);
    v = sample_values(*grid, retry, style);
  }
  return GridFunction(std::move(grid), std::move(v));
}

GridFunction first_laplace_mode(GridPtr grid) {
  const Grid& g = *grid;
  const auto c = g.spec().corners;
  const int d = g.dim();
  return interpolate(std::move(grid), [c, d](double x, double y) {
    double s = std::sin(std::numbers::pi * (x - c[0]) / (c[1] - c[0]));
    if (d == 2) s *= std::sin(std::numbers::pi * (y - c[2]) / (c[3] - c[2]));
    return std::abs(s);
  });
}

}  // namespace friedrichs
