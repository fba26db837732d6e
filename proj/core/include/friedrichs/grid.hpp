#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace friedrichs {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Interval (dim 1) or axis-aligned rectangle (dim 2) with a uniform
/// resolution per axis.
struct GridSpec {
  int dim = 1;
  /// {a, b} in 1D; {x0, x1, y0, y1} in 2D.
  std::array<double, 4> corners{0.0, 1.0, 0.0, 0.0};
  std::array<int, 2> cells{2, 1};

  static GridSpec interval(double a, double b, int n);
  static GridSpec rectangle(double x0, double x1, double y0, double y1, int nx, int ny);

  bool operator==(const GridSpec&) const = default;
};

/// Structured P1 mesh. Intervals are split into n segments; rectangles into
/// nx*ny cells, each cut along its (i,j)-(i+1,j+1) diagonal into two
/// triangles. Immutable after construction.
class Grid {
 public:
  explicit Grid(const GridSpec& spec);
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  const GridSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim; }
  int nodes_per_element() const noexcept { return spec_.dim + 1; }
  int num_nodes() const noexcept { return static_cast<int>(is_boundary_.size()); }
  int num_elements() const noexcept { return static_cast<int>(measures_.size()); }
  int num_free_nodes() const noexcept { return static_cast<int>(free_nodes_.size()); }

  std::array<double, 2> node(int i) const { return {coords_[2 * i], coords_[2 * i + 1]}; }
  std::span<const int> element(int e) const {
    return {connectivity_.data() + static_cast<std::size_t>(e) * nodes_per_element(),
            static_cast<std::size_t>(nodes_per_element())};
  }
  bool is_boundary(int i) const { return is_boundary_[i] != 0; }
  const std::vector<int>& free_nodes() const noexcept { return free_nodes_; }

  double measure(int e) const { return measures_[e]; }
  const Vector& measures() const noexcept { return measures_; }
  double domain_measure() const noexcept { return domain_measure_; }
  double mesh_size() const noexcept { return mesh_size_; }

  /// Maps nodal values to per-element constant gradients, laid out as
  /// [e*dim + k] for component k of element e.
  const SparseMatrix& gradient_operator() const noexcept { return gradient_op_; }
  /// Maps nodal values to values at the zeroth-order quadrature points.
  const SparseMatrix& point_interpolation() const noexcept { return point_interp_; }
  /// Quadrature weights (element measure already folded in).
  const Vector& point_weights() const noexcept { return point_weights_; }
  /// Row-sum lumped mass per node.
  const Vector& lumped_mass() const noexcept { return lumped_mass_; }
  /// Element averaging operator (mean of the element's vertex values).
  const SparseMatrix& averaging_operator() const noexcept { return averaging_op_; }

  /// Zeroes the Dirichlet entries of a nodal vector in place.
  void apply_mask(Vector& v) const;
  Vector masked(Vector v) const {
    apply_mask(v);
    return v;
  }

  /// Solves K0 x = r where K0 is the P1 Dirichlet Laplacian on free nodes
  /// (identity on Dirichlet rows). Used as the H^1_0 metric by descent
  /// solvers. The factorization is built once, on first use, thread-safely.
  Vector solve_laplacian(const Vector& rhs) const;

  bool same_as(const Grid& other) const noexcept { return this == &other || spec_ == other.spec_; }

 private:
  void build_1d();
  void build_2d();
  void build_operators();

  GridSpec spec_;
  std::vector<double> coords_;
  std::vector<int> connectivity_;
  std::vector<char> is_boundary_;
  std::vector<int> free_nodes_;
  Vector measures_;
  std::vector<double> basis_gradients_;  // per element: nodes_per_element * dim
  double domain_measure_ = 0.0;
  double mesh_size_ = 0.0;

  SparseMatrix gradient_op_;
  SparseMatrix point_interp_;
  Vector point_weights_;
  Vector lumped_mass_;
  SparseMatrix averaging_op_;

  struct LaplacianCache;
  mutable std::once_flag laplacian_once_;
  mutable std::shared_ptr<LaplacianCache> laplacian_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(const GridSpec& spec);

/// Nodal coefficient vector over a grid; Dirichlet entries are forced to 0.
class GridFunction {
 public:
  GridFunction(GridPtr grid, Vector values);
  static GridFunction zeros(GridPtr grid);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const Vector& values() const noexcept { return values_; }
  double operator[](int i) const { return values_[i]; }
  int size() const noexcept { return static_cast<int>(values_.size()); }

  bool is_zero() const { return values_.cwiseAbs().maxCoeff() == 0.0; }

  GridFunction operator+(const GridFunction& o) const;
  GridFunction operator-(const GridFunction& o) const;
  GridFunction operator-() const;
  GridFunction operator*(double c) const;
  friend GridFunction operator*(double c, const GridFunction& u) { return u * c; }

 private:
  GridPtr grid_;
  Vector values_;
};

/// Per-element data of a P1 function: constant gradients (dim x elements),
/// vertex averages and element measures.
struct ElementField {
  GridPtr grid;
  Eigen::MatrixXd gradients;
  Vector averages;
  Vector measures;
};

ElementField gradient(const GridFunction& u);

/// Sum over elements of f_e * |e|; f must have one entry per element.
double integrate(const Grid& grid, std::span<const double> per_element);

enum class SampleStyle { random_nodal, smooth_mode, bump };

std::string to_string(SampleStyle style);
SampleStyle sample_style_from_string(const std::string& name);

/// Deterministic in (grid, seed, style); never identically zero.
GridFunction sample_test_function(GridPtr grid, std::uint64_t seed, SampleStyle style);

/// Nodal interpolant of a function of (x, y); y is 0 in 1D.
template <class F>
GridFunction interpolate(GridPtr grid, F&& f) {
  Vector v(grid->num_nodes());
  for (int i = 0; i < grid->num_nodes(); ++i) {
    const auto x = grid->node(i);
    v[i] = f(x[0], x[1]);
  }
  return GridFunction(std::move(grid), std::move(v));
}

/// Product of first Dirichlet sine modes; positive at free nodes.
GridFunction first_laplace_mode(GridPtr grid);

}  // namespace friedrichs
