//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>

#include "rse/core.hpp"
#include "rse/quadrature.hpp"
#include "rse/strain_core.hpp"

namespace rse {

inline constexpr double kBifurcationTol = 1e-8;

/// S(γ) = G0 + Σ w_i w_iᵀ / (γ − σ_i)².
inline Matrix3d s_matrix(const RigidProblem &p, double gamma) {
  check_pole(p, gamma);
  return ellipsoid_matrix_unchecked(p, gamma, gamma);
}

/// S(γ, δ) = G0 + Σ w_i w_iᵀ / ((γ − σ_i)(δ − σ_i)).
inline Matrix3d s_matrix_bi(const RigidProblem &p, double gamma, double delta) {
  check_pole(p, gamma);
  check_pole(p, delta);
  return ellipsoid_matrix_unchecked(p, gamma, delta);
}

/// dS(γ)/dγ = −2 Wᵀ (γ − Σ)⁻³ W.
inline Matrix3d s_matrix_dgamma(const RigidProblem &p, double gamma) {
  check_pole(p, gamma);
  VectorXd f = (gamma - p.sigma.array()).cube().inverse();
  return symmetrize(-2.0 * p.W.transpose() * f.asDiagonal() * p.W);
}

/// ∂S(γ, δ)/∂γ = −Wᵀ (γ − Σ)⁻² (δ − Σ)⁻¹ W.
inline Matrix3d s_matrix_bi_dgamma(const RigidProblem &p, double gamma, double delta) {
  check_pole(p, gamma);
  check_pole(p, delta);
  VectorXd f = ((gamma - p.sigma.array()).square() * (delta - p.sigma.array())).inverse();
  return symmetrize(-p.W.transpose() * f.asDiagonal() * p.W);
}

/// Eigen-decomposition of S(γ), descending. Close to a pole the dominant
/// rank-one term swamps the two small eigenvalues in floating point, so there
/// they are taken from S⁻¹ assembled with the Sherman–Morrison formula.
/// No pole check is made here.
inline SymEigen3 s_eigen(const RigidProblem &p, double gamma) {
  const Matrix3d s = ellipsoid_matrix_unchecked(p, gamma, gamma);

  Index i0;
  (p.sigma.array() - gamma).abs().minCoeff(&i0);
  const double d = gamma - p.sigma(i0);
  const Vector3d w = p.W.row(i0).transpose();
  const double rest = p.G0.norm() + 1;
  if (w.squaredNorm() < 1e6 * d * d * rest)
    return sym_eigen3_desc(s);

  Matrix3d a = p.G0;
  for (Index i = 0; i < p.N(); ++i) {
    if (i == i0)
      continue;
    const Vector3d wi = p.W.row(i).transpose();
    a += wi * wi.transpose() / sqr(gamma - p.sigma(i));
  }
  Eigen::LLT<Matrix3d> llt(symmetrize(a));
  if (llt.info() != Eigen::Success)
    return sym_eigen3_desc(s);
  const Matrix3d ai = llt.solve(Matrix3d::Identity());
  const Vector3d z = ai * w;
  const Matrix3d sinv = symmetrize(ai - z * z.transpose() / (d * d + w.dot(z)));

  Eigen::SelfAdjointEigenSolver<Matrix3d> es(sinv);
  SymEigen3 out;
  out.vectors = es.eigenvectors();  // ascending in S⁻¹ is descending in S
  canonicalize_column_signs(out.vectors);
  const Vector3d u1 = out.vectors.col(0);
  out.values(0) = u1.dot(s * u1);
  out.values(1) = 1 / es.eigenvalues()(1);
  out.values(2) = 1 / es.eigenvalues()(2);
  return out;
}

enum class FrameStatus {
  kOk,
  kNoIntersection,
};

/// Spectral data of S(γ)/γ and the projected ellipse of its intersection
/// with the unit sphere. Index accessors are zero-based; axis_k is one-based.
struct CurveFrame {
  double gamma = 0;
  Vector3d lambdas = Vector3d::Zero();  // descending
  Matrix3d U = Matrix3d::Identity();
  int axis_k = 1;
  double beta_i = 0;
  double beta_j = 0;
  double om_i = 1;  // 1 − β_i², evaluated without cancellation
  double om_j = 1;  // 1 − β_j²
  FrameStatus status = FrameStatus::kNoIntersection;
  bool near_bifurcation = false;

  bool intersects() const { return status == FrameStatus::kOk; }
  int k() const { return axis_k - 1; }
  int i() const { return axis_k == 1 ? 1 : 0; }
  int j() const { return axis_k == 1 ? 2 : 1; }
  double a() const { return beta_i * beta_i; }
  double b() const { return beta_j * beta_j; }
  double eccentricity() const {
    const double lo = std::min(beta_i, beta_j), hi = std::max(beta_i, beta_j);
    return hi > 0 ? lo / hi : 1.0;
  }
};

/// Builds a frame from the eigen-decomposition of S(γ)/γ.
inline CurveFrame frame_from_eigen(const SymEigen3 &es, double gamma) {
  CurveFrame fr;
  fr.gamma = gamma;
  fr.lambdas = es.values;
  fr.U = es.vectors;

  const double l1 = fr.lambdas(0), l2 = fr.lambdas(1), l3 = fr.lambdas(2);
  fr.near_bifurcation = std::abs(l2 - 1) < kBifurcationTol;
  if (l3 > 1 || l1 < 1) {
    fr.status = FrameStatus::kNoIntersection;
    return fr;
  }
  fr.status = FrameStatus::kOk;

  if (l2 <= 1) {
    fr.axis_k = 1;
    const double d2 = l1 - l2, d3 = l1 - l3;
    if (d2 <= 0) {
      // l1 = l2 = 1: the curve is a great circle.
      fr.beta_i = fr.beta_j = 1;
      fr.om_i = fr.om_j = 0;
    } else {
      fr.beta_i = std::sqrt((l1 - 1) / d2);
      fr.beta_j = std::sqrt((l1 - 1) / d3);
      fr.om_i = (1 - l2) / d2;
      fr.om_j = (1 - l3) / d3;
    }
  } else {
    fr.axis_k = 3;
    const double d1 = l1 - l3, d2 = l2 - l3;
    fr.beta_i = std::sqrt((1 - l3) / d1);
    fr.beta_j = std::sqrt((1 - l3) / d2);
    fr.om_i = (l1 - 1) / d1;
    fr.om_j = (l2 - 1) / d2;
  }
  return fr;
}

/// Builds a frame from a symmetric matrix already divided by γ.
inline CurveFrame frame_from_matrix(const Matrix3d &qm, double gamma) {
  return frame_from_eigen(sym_eigen3_desc(symmetrize(qm)), gamma);
}

/// Eigen-decomposition of S(γ)/γ, descending.
inline SymEigen3 scaled_eigen(const RigidProblem &p, double gamma) {
  check_pole(p, gamma);
  SymEigen3 es = s_eigen(p, gamma);
  es.values /= gamma;
  return es;
}

inline CurveFrame curve_frame(const RigidProblem &p, double gamma) {
  require(gamma > 0, "gamma must be positive");
  return frame_from_eigen(scaled_eigen(p, gamma), gamma);
}

namespace detail {
  inline double xi_k_squared(const CurveFrame &fr, double c, double s) {
    const double d = c * c * fr.om_i + s * s * fr.om_j;
    if (d < -1e-12)
      throw CurveSingularityError("negative radicand on intersection curve");
    return std::max(0.0, d);
  }

  inline void check_frame(const CurveFrame &fr) {
    if (!fr.intersects())
      throw CurveSingularityError("no intersection curve at this gamma");
  }
}  // namespace detail

/// Principal-axis coordinates ξ(ψ) of a curve point.
inline Vector3d curve_xi(const CurveFrame &fr, double psi, int hemisphere = 1) {
  detail::check_frame(fr);
  const double c = std::cos(psi), s = std::sin(psi);
  Vector3d xi;
  xi(fr.i()) = fr.beta_i * c;
  xi(fr.j()) = fr.beta_j * s;
  xi(fr.k()) = (hemisphere >= 0 ? 1.0 : -1.0) * std::sqrt(detail::xi_k_squared(fr, c, s));
  return xi;
}

inline Vector3d curve_point(const CurveFrame &fr, double psi, int hemisphere = 1) {
  Vector3d r = fr.U * curve_xi(fr, psi, hemisphere);
  return r / r.norm();
}

inline Vector3d curve_point_dpsi(const CurveFrame &fr, double psi, int hemisphere = 1) {
  Vector3d xi = curve_xi(fr, psi, hemisphere);
  const double c = std::cos(psi), s = std::sin(psi);
  if (std::abs(xi(fr.k())) < 1e-14)
    throw CurveSingularityError("curve touches the equatorial plane");

  Vector3d dxi;
  dxi(fr.i()) = -fr.beta_i * s;
  dxi(fr.j()) = fr.beta_j * c;
  dxi(fr.k()) = (fr.a() - fr.b()) * s * c / xi(fr.k());
  return fr.U * dxi;
}

/// Arc-length speed ‖∂r/∂ψ‖ from the derivatives of the parametrization.
inline double arc_speed(const CurveFrame &fr, double psi) {
  detail::check_frame(fr);
  const double c = std::cos(psi), s = std::sin(psi);
  const double a = fr.a(), b = fr.b();
  const double d = detail::xi_k_squared(fr, c, s);
  if (d <= 0)
    return 1.0;
  const double sc = s * c;
  const double v = a * s * s + b * c * c + (a - b) * (a - b) * sc * sc / d;
  return std::sqrt(std::max(0.0, v));
}

struct EigDerivative {
  Vector3d dlambda;
  Matrix3d dU;
};

/// First-order perturbation of a symmetric eigendecomposition Qm = U Λ Uᵀ
/// along the direction Qm_prime.
inline EigDerivative eig_derivative(const Matrix3d & /* qm */, const Matrix3d &qm_prime,
                                    const Vector3d &lambda, const Matrix3d &u) {
  const Matrix3d t = u.transpose() * qm_prime * u;
  Matrix3d m = Matrix3d::Zero();
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const double d = lambda(a) - lambda(b);
      if (std::abs(d) < 1e-10 * (1 + std::abs(lambda(a)) + std::abs(lambda(b))))
        throw DegenerateSpectrumError("repeated eigenvalues in perturbation");
      m(a, b) = t(a, b) / d;
      m(b, a) = -m(a, b);
    }
  }
  return { t.diagonal(), -u * m };
}

/// γ-derivatives of the frame: λ′, U′ and a′ = d(β_i²)/dγ, b′ = d(β_j²)/dγ.
struct FrameDerivative {
  EigDerivative eig;
  double da = 0;
  double db = 0;
};

inline FrameDerivative frame_derivative(const RigidProblem &p, const CurveFrame &fr) {
  detail::check_frame(fr);
  if (fr.near_bifurcation)
    throw CurveSingularityError("frame derivative requested at a bifurcation point");
  const double g = fr.gamma;
  const Matrix3d s = s_matrix(p, g);
  const Matrix3d qp = s_matrix_dgamma(p, g) / g - s / (g * g);

  FrameDerivative out;
  out.eig = eig_derivative(s / g, qp, fr.lambdas, fr.U);
  const Vector3d &l = fr.lambdas;
  const Vector3d &dl = out.eig.dlambda;
  const int k = fr.k();
  auto dsq = [&](int idx) {
    const double den = l(k) - l(idx);
    return (dl(k) * (1 - l(idx)) + (l(k) - 1) * dl(idx)) / (den * den);
  };
  out.da = dsq(fr.i());
  out.db = dsq(fr.j());
  return out;
}

inline Vector3d curve_point_dgamma(const RigidProblem &p, const CurveFrame &fr, double psi,
                                   int hemisphere = 1) {
  const FrameDerivative fd = frame_derivative(p, fr);
  if (fr.beta_i <= 0 || fr.beta_j <= 0)
    throw CurveSingularityError("degenerate curve at tangency");
  const Vector3d xi = curve_xi(fr, psi, hemisphere);
  if (std::abs(xi(fr.k())) < 1e-14)
    throw CurveSingularityError("curve touches the equatorial plane");

  const double c = std::cos(psi), s = std::sin(psi);
  Vector3d dxi;
  dxi(fr.i()) = fd.da / (2 * fr.beta_i) * c;
  dxi(fr.j()) = fd.db / (2 * fr.beta_j) * s;
  dxi(fr.k()) = -(c * c * fd.da + s * s * fd.db) / (2 * xi(fr.k()));
  return fd.eig.dU * xi + fr.U * dxi;
}

struct CurveLength {
  double value = 0;
  bool converged = true;
};

inline CurveLength curve_length_detail(const CurveFrame &fr) {
  if (!fr.intersects())
    return { 0.0, true };
  QuadratureResult q =
      romberg_clustered([&](double psi) { return arc_speed(fr, psi); }, 0.0, kPi / 2);
  return { 4 * q.value, q.converged };
}

inline double curve_length(const CurveFrame &fr) {
  return curve_length_detail(fr).value;
}

/// Total length of one intersection curve at γ; zero when there is none.
inline double curve_length(const RigidProblem &p, double gamma) {
  return curve_length(curve_frame(p, gamma));
}

inline double curve_length_dgamma(const RigidProblem &p, const CurveFrame &fr) {
  const FrameDerivative fd = frame_derivative(p, fr);
  const double a = fr.a(), b = fr.b(), ab = a - b;
  auto integrand = [&](double psi) {
    const double c = std::cos(psi), s = std::sin(psi);
    const double c2 = c * c, s2 = s * s;
    const double d = c2 * fr.om_i + s2 * fr.om_j;
    if (d <= 0)
      return 0.0;
    const double sc2 = s2 * c2;
    const double v = a * s2 + b * c2 + ab * ab * sc2 / d;
    if (v <= 0)
      return 0.0;
    const double fa = s2 + (2 * ab * sc2 * d + ab * ab * sc2 * c2) / (d * d);
    const double fb = c2 + (-2 * ab * sc2 * d + ab * ab * sc2 * s2) / (d * d);
    return (fa * fd.da + fb * fd.db) / (2 * std::sqrt(v));
  };
  QuadratureResult q = romberg_clustered(integrand, 0.0, kPi / 2);
  return 4 * q.value;
}

/// dL/dγ at γ.
inline double curve_length_dgamma(const RigidProblem &p, double gamma) {
  CurveFrame fr = curve_frame(p, gamma);
  if (!fr.intersects())
    throw CurveSingularityError("no intersection curve at this gamma");
  return curve_length_dgamma(p, fr);
}

/// Angle between the two merging curves at a bifurcation point.
inline double bifurcation_angle(const CurveFrame &fr) {
  const double l1 = fr.lambdas(0), l3 = fr.lambdas(2);
  if (!(l1 > 1) || !(l3 < 1))
    throw InvalidArgument("bifurcation angle needs lambda1 > 1 > lambda3");
  return 2 * std::atan(std::sqrt((1 - l3) / (l1 - 1)));
}

/// Half-angle of the cone enclosing the curve about its symmetry axis.
inline double cone_half_angle(const CurveFrame &fr) {
  return std::asin(std::min(1.0, std::max(fr.beta_i, fr.beta_j)));
}

/// Quantity that would equal 1 if p lay on both curves r(γ′) and r(γ″).
inline double nesting_quantity(const RigidProblem &p, const Vector3d &pt, double g1, double g2) {
  const VectorXd wp = p.W * pt;
  double q = 0;
  for (Index k = 0; k < p.sigma.size(); ++k) {
    const double sk = p.sigma(k);
    q += wp(k) * wp(k) * (2 * sk - g1 - g2) / (sqr(g1 - sk) * sqr(g2 - sk));
  }
  return q;
}

}  // namespace rse
