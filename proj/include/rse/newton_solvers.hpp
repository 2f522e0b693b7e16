//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "rse/cayley.hpp"
#include "rse/core.hpp"
#include "rse/inertial_geometry.hpp"
#include "rse/strain_core.hpp"

namespace rse {

struct SolveOptions {
  int max_iters = 50;
  double residual_tol = 1e-11;  // multiplied by 1 + ‖G0‖
  double damping = 0.5;
  int n_damp = 3;
  double divergence_guard = 1e3;
  int max_backtracks = 20;
};

enum class SolveStatus {
  kConverged,
  kMaxIterations,
  kDiverged,
  kSingular,
  kGeometryFailure,
};

inline const char *to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::kConverged:
    return "converged";
  case SolveStatus::kMaxIterations:
    return "max_iterations";
  case SolveStatus::kDiverged:
    return "diverged";
  case SolveStatus::kSingular:
    return "singular";
  case SolveStatus::kGeometryFailure:
    return "geometry_failure";
  }
  return "unknown";
}

inline double scaled_tolerance(const RigidProblem &p, const SolveOptions &opts) {
  return opts.residual_tol * (1 + p.G0.norm());
}

// ---------------------------------------------------------------------------
// Full-variable Newton–Kantorovitch

/// Matrix K of the linearized equation K col(Δ) = −col(Φ(Y)), column stacking.
inline MatrixXd nk_matrix(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &y) {
  const Index n = p.N();
  const Matrix3d gy = p.G0 + y.transpose() * y;
  const MatrixXd t = y * y.transpose() - p.C;
  MatrixXd k = MatrixXd::Zero(3 * n, 3 * n);
  for (Index b = 0; b < 3; ++b) {
    for (Index j = 0; j < 3; ++j)
      k.block(b * n, j * n, n, n).diagonal().array() += gy(j, b);
    k.block(b * n, b * n, n, n) += t;
  }
  // Y Δᵀ Y: coefficient of Δ(i, j) in entry (a, b) is Y(a, j) Y(i, b).
  for (Index b = 0; b < 3; ++b)
    for (Index j = 0; j < 3; ++j)
      k.block(b * n, j * n, n, n) += y.col(j) * y.col(b).transpose();
  return k;
}

/// Directional derivative of Φ at Y along Δ.
inline MatrixX3d phi_directional(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &y,
                                 const Eigen::Ref<const MatrixXd> &d) {
  const Matrix3d gy = p.G0 + y.transpose() * y;
  return d * gy + y * (d.transpose() * y + y.transpose() * d) - p.C * d;
}

struct NKResult {
  SolveStatus status = SolveStatus::kMaxIterations;
  CriticalMatrix cm;
  int iterations = 0;
};

inline NKResult newton_kantorovitch(const RigidProblem &p, const Eigen::Ref<const MatrixXd> &y0,
                                    const SolveOptions &opts = {}) {
  check_shape(p, y0);
  require(y0.allFinite(), "starting matrix must be finite");
  const double tol = scaled_tolerance(p, opts);
  const Index n = p.N();

  NKResult res;
  MatrixX3d y = y0;
  MatrixX3d f = phi(p, y);
  const double r0 = std::max(f.norm(), tol);
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const double rn = f.norm();
    if (rn < tol) {
      res.status = SolveStatus::kConverged;
      break;
    }
    if (!std::isfinite(rn) || rn > opts.divergence_guard * r0) {
      res.status = SolveStatus::kDiverged;
      break;
    }
    Eigen::PartialPivLU<MatrixXd> lu(nk_matrix(p, y));
    VectorXd rhs = -Eigen::Map<const VectorXd>(f.data(), 3 * n);
    VectorXd step = lu.solve(rhs);
    if (!step.allFinite()) {
      res.status = SolveStatus::kSingular;
      break;
    }
    const double scale = it < opts.n_damp ? opts.damping : 1.0;
    y += scale * Eigen::Map<const MatrixX3d>(step.data(), n, 3);
    f = phi(p, y);
  }
  if (it == opts.max_iters && f.norm() < tol)
    res.status = SolveStatus::kConverged;
  res.iterations = it;
  res.cm = make_critical(p, y, "newton_kantorovitch", it);
  return res;
}

// ---------------------------------------------------------------------------
// Cayley-parametrized Newton on the six inertial equations

struct InertialResult {
  SolveStatus status = SolveStatus::kMaxIterations;
  InertialSolution solution;
  Vector6d residual = Vector6d::Zero();
  int iterations = 0;
};

/// g(p) and its Jacobian with respect to (γ₁, γ₂, γ₃, ω₁, ω₂, ω₃). The
/// rotation depends on ω only, so the Jacobian is exact in this chart.
inline Vector6d cayley_system(const RigidProblem &p, const Vector3d &gam, const Vector3d &omega,
                              Matrix6d *jac = nullptr) {
  InertialSolution s { gam, rotation_from_cayley(omega) };
  const Vector6d g = inertial_residual(p, s);
  if (!jac)
    return g;

  auto dr = rotation_dcayley(omega);
  const Matrix3d &r = s.R;
  Matrix6d &j = *jac;
  j.setZero();

  constexpr int pairs[3][2] = { { 0, 1 }, { 0, 2 }, { 1, 2 } };
  for (int k = 0; k < 3; ++k) {
    const Matrix3d sk = ellipsoid_matrix_unchecked(p, gam(k), gam(k));
    const Vector3d rk = r.col(k);
    j(k, k) = 1 - rk.dot(s_matrix_dgamma(p, gam(k)) * rk);
    for (int m = 0; m < 3; ++m)
      j(k, 3 + m) = -2 * dr[m].col(k).dot(sk * rk);
  }
  for (int q = 0; q < 3; ++q) {
    const int k = pairs[q][0], l = pairs[q][1];
    const Vector3d rk = r.col(k), rl = r.col(l);
    const Matrix3d skl = ellipsoid_matrix_unchecked(p, gam(k), gam(l));
    j(3 + q, k) = rk.dot(s_matrix_bi_dgamma(p, gam(k), gam(l)) * rl);
    j(3 + q, l) = rk.dot(s_matrix_bi_dgamma(p, gam(l), gam(k)) * rl);
    for (int m = 0; m < 3; ++m)
      j(3 + q, 3 + m) = dr[m].col(k).dot(skl * rl) + rk.dot(skl * dr[m].col(l));
  }
  return g;
}

/// Sorts eigen-pairs descending and restores det R = +1.
inline InertialSolution normalize_inertial(const InertialSolution &s) {
  int idx[3] = { 0, 1, 2 };
  std::sort(idx, idx + 3, [&](int a, int b) { return s.gammas(a) > s.gammas(b); });
  InertialSolution out;
  for (int k = 0; k < 3; ++k) {
    out.gammas(k) = s.gammas(idx[k]);
    out.R.col(k) = s.R.col(idx[k]);
  }
  if (out.R.determinant() < 0)
    out.R.col(2) = -out.R.col(2);
  return out;
}

namespace detail {
  /// True when moving each γ_k by dg keeps it on the same side of every pole
  /// and outside every pole gap.
  inline bool pole_safe_step(const RigidProblem &p, const Vector3d &g, const Vector3d &dg) {
    const double gap = p.pole_gap();
    for (int k = 0; k < 3; ++k) {
      const double a = g(k), b = g(k) + dg(k);
      for (Index i = 0; i < p.sigma.size(); ++i) {
        const double s = p.sigma(i);
        if (std::abs(b - s) < gap || (a - s) * (b - s) < 0)
          return false;
      }
    }
    return true;
  }
}  // namespace detail

inline InertialResult cayley_newton(const RigidProblem &p, const InertialSolution &init,
                                    const SolveOptions &opts = {}) {
  const double tol = scaled_tolerance(p, opts);
  InertialResult res;

  Vector3d gam = init.gammas;
  Matrix3d r0 = orient_columns(init.R);
  Vector3d omega;
  try {
    omega = cayley_from_rotation(r0);
  } catch (const CayleySingularityError &) {
    res.status = SolveStatus::kSingular;
    res.solution = init;
    return res;
  }

  double res0 = -1;
  int it = 0;
  Vector6d g;
  try {
    for (;; ++it) {
      Matrix6d jac;
      g = cayley_system(p, gam, omega, &jac);
      const double gn = g.lpNorm<Eigen::Infinity>();
      if (res0 < 0)
        res0 = std::max(gn, tol);
      if (gn < tol) {
        res.status = SolveStatus::kConverged;
        break;
      }
      if (it >= opts.max_iters) {
        res.status = SolveStatus::kMaxIterations;
        break;
      }
      if (!std::isfinite(gn) || gn > opts.divergence_guard * res0) {
        res.status = SolveStatus::kDiverged;
        break;
      }
      Eigen::PartialPivLU<Matrix6d> lu(jac);
      Vector6d step = -lu.solve(g);
      if (!step.allFinite()) {
        res.status = SolveStatus::kSingular;
        break;
      }
      if (it < opts.n_damp)
        step *= opts.damping;
      int bt = 0;
      while (!detail::pole_safe_step(p, gam, step.head<3>()) && bt < opts.max_backtracks) {
        step *= 0.5;
        ++bt;
      }
      if (bt == opts.max_backtracks) {
        res.status = SolveStatus::kDiverged;
        break;
      }
      gam += step.head<3>();
      omega += step.tail<3>();
      if (omega.norm() > 2.0) {
        // Re-chart at the minimal-norm sign pattern.
        Matrix3d rr = orient_columns(rotation_from_cayley(omega));
        omega = cayley_from_rotation(rr);
      }
    }
  } catch (const PoleProximityError &) {
    res.status = SolveStatus::kGeometryFailure;
  } catch (const CayleySingularityError &) {
    res.status = SolveStatus::kSingular;
  }

  res.iterations = it;
  res.residual = g;
  res.solution = normalize_inertial({ gam, rotation_from_cayley(omega) });
  return res;
}

// ---------------------------------------------------------------------------
// Angular-parametrized Newton

/// Curve parameter ψ of a unit vector lying (approximately) on the curve of
/// fr; the vector is first mapped to the + hemisphere.
inline double curve_parameter(const CurveFrame &fr, const Vector3d &r) {
  Vector3d xi = fr.U.transpose() * r;
  if (xi(fr.k()) < 0)
    xi = -xi;
  const double ci = fr.beta_i > 0 ? xi(fr.i()) / fr.beta_i : 0.0;
  const double sj = fr.beta_j > 0 ? xi(fr.j()) / fr.beta_j : 0.0;
  double psi = std::atan2(sj, ci);
  if (psi < 0)
    psi += 2 * kPi;
  return psi;
}

/// h(q) for q = (γ₁, ψ₁, γ₂, ψ₂, γ₃, ψ₃) and optionally its Jacobian.
inline Vector6d angular_system(const RigidProblem &p, const Vector6d &q, Matrix6d *jac = nullptr,
                               Matrix3d *rout = nullptr) {
  Vector3d gam(q(0), q(2), q(4));
  Vector3d psi(q(1), q(3), q(5));
  Matrix3d r, drg, drp;
  for (int k = 0; k < 3; ++k) {
    CurveFrame fr = curve_frame(p, gam(k));
    if (!fr.intersects())
      throw CurveSingularityError("no intersection curve at an angular iterate");
    r.col(k) = curve_point(fr, psi(k));
    if (jac) {
      drp.col(k) = curve_point_dpsi(fr, psi(k));
      drg.col(k) = curve_point_dgamma(p, fr, psi(k));
    }
  }
  if (rout)
    *rout = r;

  // Row pairs: (h1, h2) for (1,2), (h3, h4) for (2,3), (h5, h6) for (1,3).
  constexpr int pairs[3][2] = { { 0, 1 }, { 1, 2 }, { 0, 2 } };
  Vector6d h;
  if (jac)
    jac->setZero();
  for (int q2 = 0; q2 < 3; ++q2) {
    const int k = pairs[q2][0], l = pairs[q2][1];
    const Matrix3d skl = s_matrix_bi(p, gam(k), gam(l));
    const Vector3d rk = r.col(k), rl = r.col(l);
    h(2 * q2) = rk.dot(skl * rl);
    h(2 * q2 + 1) = rk.dot(rl);
    if (!jac)
      continue;
    Matrix6d &j = *jac;
    const Matrix3d dsk = s_matrix_bi_dgamma(p, gam(k), gam(l));
    const Matrix3d dsl = s_matrix_bi_dgamma(p, gam(l), gam(k));
    j(2 * q2, 2 * k) = drg.col(k).dot(skl * rl) + rk.dot(dsk * rl);
    j(2 * q2, 2 * l) = rk.dot(skl * drg.col(l)) + rk.dot(dsl * rl);
    j(2 * q2, 2 * k + 1) = drp.col(k).dot(skl * rl);
    j(2 * q2, 2 * l + 1) = rk.dot(skl * drp.col(l));
    j(2 * q2 + 1, 2 * k) = drg.col(k).dot(rl);
    j(2 * q2 + 1, 2 * l) = rk.dot(drg.col(l));
    j(2 * q2 + 1, 2 * k + 1) = drp.col(k).dot(rl);
    j(2 * q2 + 1, 2 * l + 1) = rk.dot(drp.col(l));
  }
  return h;
}

/// Angular start vector from an approximate inertial solution.
inline std::optional<Vector6d> angular_start(const RigidProblem &p, const InertialSolution &s) {
  Vector6d q;
  for (int k = 0; k < 3; ++k) {
    CurveFrame fr = curve_frame(p, s.gammas(k));
    if (!fr.intersects())
      return std::nullopt;
    q(2 * k) = s.gammas(k);
    q(2 * k + 1) = curve_parameter(fr, s.R.col(k));
  }
  return q;
}

inline InertialResult angular_newton(const RigidProblem &p, const Vector6d &init_q,
                                     const SolveOptions &opts = {}) {
  const double tol = scaled_tolerance(p, opts);
  InertialResult res;
  Vector6d q = init_q;
  Matrix3d r = Matrix3d::Identity();
  Vector6d h = Vector6d::Zero();
  double res0 = -1;
  int it = 0;
  try {
    for (;; ++it) {
      Matrix6d jac;
      h = angular_system(p, q, &jac, &r);
      const double hn = h.lpNorm<Eigen::Infinity>();
      if (res0 < 0)
        res0 = std::max(hn, tol);
      if (hn < tol) {
        res.status = SolveStatus::kConverged;
        break;
      }
      if (it >= opts.max_iters) {
        res.status = SolveStatus::kMaxIterations;
        break;
      }
      if (!std::isfinite(hn) || hn > opts.divergence_guard * res0) {
        res.status = SolveStatus::kDiverged;
        break;
      }
      Eigen::PartialPivLU<Matrix6d> lu(jac);
      Vector6d step = -lu.solve(h);
      if (!step.allFinite()) {
        res.status = SolveStatus::kSingular;
        break;
      }
      if (it < opts.n_damp)
        step *= opts.damping;
      const Vector3d dg(step(0), step(2), step(4));
      const Vector3d g(q(0), q(2), q(4));
      int bt = 0;
      Vector3d dgs = dg;
      while (!detail::pole_safe_step(p, g, dgs) && bt < opts.max_backtracks) {
        step *= 0.5;
        dgs = Vector3d(step(0), step(2), step(4));
        ++bt;
      }
      q += step;
    }
  } catch (const Error &) {
    res.status = SolveStatus::kGeometryFailure;
  }

  res.iterations = it;
  res.residual = h;
  InertialSolution s { Vector3d(q(0), q(2), q(4)), orient_columns(r) };
  // Project onto the nearest rotation to remove the residual non-orthogonality.
  Eigen::JacobiSVD<Matrix3d> svd(s.R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  s.R = svd.matrixU() * svd.matrixV().transpose();
  res.solution = normalize_inertial(s);
  return res;
}

/// Converts a converged inertial solution into a critical matrix.
inline CriticalMatrix critical_from_inertial(const RigidProblem &p, const InertialSolution &s,
                                             std::string source, int iterations = 0) {
  return make_critical(p, reconstruct_critical(p, s), std::move(source), iterations);
}

}  // namespace rse
