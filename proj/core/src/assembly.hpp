#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "friedrichs/grid.hpp"

namespace friedrichs::assembly {

using ColMatrix = Eigen::SparseMatrix<double>;

struct WeightedStiffness {
  ColMatrix matrix;
  int floor_hits = 0;
};

/// \sum_e |e| D_e^T A(grad base_e) D_e. Element weights |a|^{p-2} below
/// floor_rel * max weight are replaced by that value (isotropically).
WeightedStiffness a_stiffness(const Grid& g, const Vector& base, double p, double floor_rel);

/// \sum_e |e| |grad base_e|^{p-2} D_e^T D_e, the Gram matrix of ||.||_{phi1}.
ColMatrix weighted_laplacian(const Grid& g, const Vector& base, double p);

/// B^T diag(w .* c) B for point coefficients c.
ColMatrix point_mass(const Grid& g, const Vector& point_coeffs);

/// Replaces Dirichlet rows and columns by identity rows.
ColMatrix restrict_dirichlet(const Grid& g, const ColMatrix& a);

/// [[A, C], [R^T, D]] with dense border columns C and rows R.
ColMatrix bordered(const ColMatrix& a, const std::vector<Vector>& cols,
                   const std::vector<Vector>& rows, const Eigen::MatrixXd& corner);

}  // namespace friedrichs::assembly
