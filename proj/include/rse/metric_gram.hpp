//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "rse/core.hpp"

namespace rse {

/// Squared distances from each point to the mass-weighted centroid, given
/// only the squared-distance matrix.
inline VectorXd center_of_mass_squared_distances(const Eigen::Ref<const MatrixXd> &d,
                                                 const Eigen::Ref<const VectorXd> &m) {
  require(d.rows() == d.cols(), "squared-distance matrix must be square");
  require(d.rows() == m.size(), "mass vector size does not match distance matrix");
  const double mtot = m.sum();
  require(mtot > 0, "total mass must be positive");

  // sum_{j<k} m_j m_k D_jk = (m^T D m) / 2 for symmetric D with zero diagonal
  const double cross = 0.5 * m.dot(d * m);
  return (d * m) / mtot - VectorXd::Constant(d.rows(), cross / (mtot * mtot));
}

inline VectorXd center_of_mass_squared_distances(const Eigen::Ref<const MatrixXd> &d) {
  return center_of_mass_squared_distances(d, VectorXd::Ones(d.rows()));
}

/// Gram matrix about the mass-weighted centroid.
inline MatrixXd gram_from_squared_distances(const Eigen::Ref<const MatrixXd> &d,
                                            const Eigen::Ref<const VectorXd> &m) {
  VectorXd d0 = center_of_mass_squared_distances(d, m);
  const Index n = d.rows();
  MatrixXd g(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      g(i, j) = 0.5 * (d0(i) + d0(j) - 0.5 * (d(i, j) + d(j, i)));
  return g;
}

inline MatrixXd gram_from_squared_distances(const Eigen::Ref<const MatrixXd> &d) {
  return gram_from_squared_distances(d, VectorXd::Ones(d.rows()));
}

/// Validates approximate symmetry and returns the symmetric part.
inline MatrixXd checked_symmetric(const Eigen::Ref<const MatrixXd> &g, double rel_tol = 1e-8) {
  require(g.rows() == g.cols(), "matrix must be square");
  require(g.allFinite(), "matrix has non-finite entries");
  const double scale = g.norm();
  if (scale > 0 && (g - g.transpose()).norm() > rel_tol * scale)
    throw InvalidArgument("matrix is not symmetric");
  return 0.5 * (g + g.transpose());
}

/// Best rank-3 positive semidefinite factor of a Gram matrix. Columns belonging
/// to negative eigenvalues are zero.
inline MatrixX3d classic_embed(const Eigen::Ref<const MatrixXd> &g) {
  MatrixXd gs = checked_symmetric(g);
  const Index n = gs.rows();
  MatrixX3d x = MatrixX3d::Zero(n, 3);
  if (n == 0)
    return x;

  SymEigen es = sym_eigen_desc(gs);
  for (Index k = 0; k < std::min<Index>(3, n); ++k) {
    const double lam = es.values(k);
    if (lam > 0)
      x.col(k) = std::sqrt(lam) * es.vectors.col(k);
  }
  return x;
}

/// Squared Euclidean distance matrix between the rows of a and b.
inline MatrixXd squared_distances(const Eigen::Ref<const MatrixXd> &a,
                                  const Eigen::Ref<const MatrixXd> &b) {
  MatrixXd d(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return d;
}

inline MatrixXd squared_distances(const Eigen::Ref<const MatrixXd> &a) {
  return squared_distances(a, a);
}

}  // namespace rse
