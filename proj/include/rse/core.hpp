//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rse {

using Eigen::Index;
using Eigen::Matrix3d;
using Eigen::MatrixX3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;

// Error hierarchy. Outcomes that are part of normal operation (no
// intersection, non-convergence) are reported through result types instead.
class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument: public Error {
public:
  using Error::Error;
};

class PoleProximityError: public Error {
public:
  using Error::Error;
};

class DegenerateSpectrumError: public Error {
public:
  using Error::Error;
};

class CurveSingularityError: public Error {
public:
  using Error::Error;
};

class ConvergenceError: public Error {
public:
  using Error::Error;
};

inline void require(bool cond, const char *what) {
  if (!cond)
    throw InvalidArgument(what);
}

inline bool all_finite(const Eigen::Ref<const MatrixXd> &m) {
  return m.allFinite();
}

inline double sqr(double x) {
  return x * x;
}

/// Flips each column so that its largest-magnitude entry is positive; ties go
/// to the lowest row index.
template <class Derived>
void canonicalize_column_signs(Eigen::MatrixBase<Derived> &u) {
  for (Index c = 0; c < u.cols(); ++c) {
    Index best = 0;
    for (Index r = 1; r < u.rows(); ++r) {
      if (std::abs(u(r, c)) > std::abs(u(best, c)))
        best = r;
    }
    if (u(best, c) < 0)
      u.col(c) = -u.col(c);
  }
}

// Symmetric eigendecomposition with eigenvalues in descending order and a
// deterministic eigenvector sign convention.
struct SymEigen {
  VectorXd values;
  MatrixXd vectors;
};

inline SymEigen sym_eigen_desc(const Eigen::Ref<const MatrixXd> &a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw Error("symmetric eigendecomposition failed");

  SymEigen out { es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse() };
  canonicalize_column_signs(out.vectors);
  return out;
}

struct SymEigen3 {
  Vector3d values;  // descending
  Matrix3d vectors;
};

inline SymEigen3 sym_eigen3_desc(const Matrix3d &a) {
  Eigen::SelfAdjointEigenSolver<Matrix3d> es(a);
  SymEigen3 out { es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse() };
  canonicalize_column_signs(out.vectors);
  return out;
}

inline double lambda_max(const Matrix3d &a) {
  return Eigen::SelfAdjointEigenSolver<Matrix3d>(a, Eigen::EigenvaluesOnly).eigenvalues()(2);
}

inline double lambda_min(const Matrix3d &a) {
  return Eigen::SelfAdjointEigenSolver<Matrix3d>(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

inline Matrix3d symmetrize(const Matrix3d &a) {
  return 0.5 * (a + a.transpose());
}

// Matrix 1-norm: maximum absolute column sum.
template <class Derived>
double norm1(const Eigen::MatrixBase<Derived> &a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace rse
