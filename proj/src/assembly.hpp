#pragma once

// Sparse matrices for the Newton solvers. All matrices act per unit volume,
// i.e. (A f)_i approximates the operator value at cell i.

#include <Eigen/Sparse>

#include "exprelax/mesh.hpp"
#include "exprelax/operators.hpp"

namespace exprelax::detail {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// -Delta_h with zero-flux faces.
SparseMatrix neg_laplacian_matrix(const Grid& g);

/// Jacobian of -p_laplacian(u) with respect to u.
SparseMatrix p_laplacian_jacobian(const ScalarField& u, const Grid& g, const FluxParams& fp);

SparseMatrix diagonal_matrix(const Vector& d);

/// Residual level below which double rounding of the iterate alone can push the
/// residual of J x = b: the componentwise bound 16 eps max_i (|J||x| + |b|)_i.
double roundoff_floor(const SparseMatrix& J, const Vector& x, const Vector& b);

inline Vector to_vector(const ScalarField& f) {
  return Eigen::Map<const Vector>(f.values().data(), static_cast<Eigen::Index>(f.size()));
}

inline ScalarField to_field(const Vector& v, const Grid& g) {
  return ScalarField(g, std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace exprelax::detail
