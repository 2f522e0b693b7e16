//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>

#include "rse/core.hpp"

namespace rse {

/// Rigid-substructure problem. X holds the fixed coordinates, B = X Yᵀ and
/// C = Y Yᵀ are the Gram-block estimates to be fit. The remaining fields are
/// derived once by assemble_problem().
struct RigidProblem {
  MatrixX3d X;
  MatrixXd B;
  MatrixXd C;

  Matrix3d G0;
  MatrixXd Q;
  VectorXd sigma;  // descending
  MatrixX3d V;
  MatrixX3d W;

  double const_term = 0;  // ‖B‖² + ½‖C‖²
  bool g0_singular = false;

  Index M() const { return X.rows(); }
  Index N() const { return C.rows(); }
  double sigma1() const { return sigma(0); }

  /// Minimum admissible distance between γ and any eigenvalue of C.
  double pole_gap() const { return 1e-9 * (1 + std::abs(sigma(0))); }
};

inline RigidProblem assemble_problem(const Eigen::Ref<const MatrixXd> &x,
                                     const Eigen::Ref<const MatrixXd> &b,
                                     const Eigen::Ref<const MatrixXd> &c) {
  require(x.cols() == 3, "X must have three columns");
  require(x.rows() >= 1, "X must have at least one row");
  require(c.rows() >= 1 && c.rows() == c.cols(), "C must be square and non-empty");
  require(b.rows() == x.rows() && b.cols() == c.rows(), "B must be M x N");
  require(x.allFinite() && b.allFinite() && c.allFinite(), "problem data must be finite");

  RigidProblem p;
  p.X = x;
  p.B = b;
  p.C = 0.5 * (c + c.transpose());

  p.G0 = p.X.transpose() * p.X;
  SymEigen es = sym_eigen_desc(p.C);
  p.sigma = es.values;
  p.Q = es.vectors;
  p.V = p.B.transpose() * p.X;
  p.W = p.Q.transpose() * p.V;
  p.const_term = p.B.squaredNorm() + 0.5 * p.C.squaredNorm();

  const double g0max = lambda_max(p.G0);
  p.g0_singular = !(lambda_min(p.G0) > 1e-12 * std::max(1.0, g0max));
  return p;
}

inline void check_shape(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &y) {
  require(y.rows() == p.N() && y.cols() == 3, "Y must be N x 3");
}

/// ‖X Yᵀ − B‖² + ½‖Y Yᵀ − C‖².
inline double strain(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &y) {
  check_shape(p, y);
  return (p.X * y.transpose() - p.B).squaredNorm()
         + 0.5 * (y * y.transpose() - p.C).squaredNorm();
}

/// Matrix-equation residual Y G_Y − C Y − V with G_Y = G0 + YᵀY. Its zero set
/// is the set of critical matrices.
inline MatrixX3d phi(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &y) {
  check_shape(p, y);
  const Matrix3d gy = p.G0 + y.transpose() * y;
  return y * gy - p.C * y - p.V;
}

/// Exact gradient of strain(); equals 2·phi().
inline MatrixX3d strain_gradient(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &y) {
  return 2.0 * phi(p, y);
}

/// Strain evaluated through the critical-point identity. Only meaningful when
/// phi(Yc) ≈ 0.
inline double strain_at_critical(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &yc) {
  check_shape(p, yc);
  const Matrix3d yty = yc.transpose() * yc;
  return p.const_term - (yc.transpose() * p.V).trace() - 0.5 * (yty * yty).trace();
}

struct InertialSolution {
  Vector3d gammas;  // descending
  Matrix3d R;       // columns r_k, det = +1
};

/// Throws PoleProximityError if gamma lies inside the pole gap of any σ_i.
inline void check_pole(const RigidProblem &p, double gamma) {
  const double gap = p.pole_gap();
  for (Index i = 0; i < p.sigma.size(); ++i) {
    if (std::abs(gamma - p.sigma(i)) < gap)
      throw PoleProximityError("gamma within pole gap of an eigenvalue of C");
  }
}

/// Distance from gamma to the nearest eigenvalue of C.
inline double pole_distance(const RigidProblem &p, double gamma) {
  return (p.sigma.array() - gamma).abs().minCoeff();
}

/// G0 + Σ w_i w_iᵀ / ((γ − σ_i)(δ − σ_i)) without pole checks.
inline Matrix3d ellipsoid_matrix_unchecked(const RigidProblem &p, double gamma, double delta) {
  VectorXd f = ((gamma - p.sigma.array()) * (delta - p.sigma.array())).inverse();
  Matrix3d s = p.G0 + p.W.transpose() * f.asDiagonal() * p.W;
  return symmetrize(s);
}

/// Columns (γ_k − Σ)⁻¹ W r_k for k = 1..3, in the eigenbasis of C.
inline MatrixX3d resolvent_columns(const RigidProblem &p, const InertialSolution &s) {
  MatrixX3d z(p.N(), 3);
  for (int k = 0; k < 3; ++k) {
    check_pole(p, s.gammas(k));
    z.col(k) = (p.W * s.R.col(k)).cwiseQuotient(
        (s.gammas(k) - p.sigma.array()).matrix());
  }
  return z;
}

/// Critical matrix Y = [(γ_k I − C)⁻¹ V r_k]_k Rᵀ.
inline MatrixX3d reconstruct_critical(const RigidProblem &p, const InertialSolution &s) {
  return p.Q * resolvent_columns(p, s) * s.R.transpose();
}

/// Six inertial equations [g11, g22, g33, g12, g13, g23].
inline Vector6d inertial_residual(const RigidProblem &p, const InertialSolution &s) {
  for (int k = 0; k < 3; ++k)
    check_pole(p, s.gammas(k));

  Vector6d g;
  for (int k = 0; k < 3; ++k) {
    const Vector3d r = s.R.col(k);
    const double gk = s.gammas(k);
    g(k) = gk - r.dot(ellipsoid_matrix_unchecked(p, gk, gk) * r);
  }
  constexpr int pairs[3][2] = { { 0, 1 }, { 0, 2 }, { 1, 2 } };
  for (int q = 0; q < 3; ++q) {
    const int k = pairs[q][0], l = pairs[q][1];
    g(3 + q) = s.R.col(k).dot(
        ellipsoid_matrix_unchecked(p, s.gammas(k), s.gammas(l)) * s.R.col(l));
  }
  return g;
}

/// Eigen-pairs of G0 + YᵀY as an InertialSolution with a proper rotation.
inline InertialSolution inertial_from_matrix(const RigidProblem &p,
                                             const Eigen::Ref<const MatrixXd> &y) {
  check_shape(p, y);
  SymEigen3 es = sym_eigen3_desc(p.G0 + y.transpose() * y);
  InertialSolution s { es.values, es.vectors };
  if (s.R.determinant() < 0)
    s.R.col(2) = -s.R.col(2);
  return s;
}

struct CriticalMatrix {
  MatrixX3d Y;
  double strain_value = 0;
  double residual_norm = 0;
  std::string source;
  Vector3d gammas = Vector3d::Zero();
  int iterations = 0;
};

inline CriticalMatrix make_critical(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &y,
                                    std::string source, int iterations = 0) {
  CriticalMatrix cm;
  cm.Y = y;
  cm.residual_norm = phi(p, y).norm();
  cm.strain_value = std::max(0.0, strain_at_critical(p, y));
  cm.source = std::move(source);
  cm.gammas = inertial_from_matrix(p, y).gammas;
  cm.iterations = iterations;
  return cm;
}

}  // namespace rse
