//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include "rse/cayley.hpp"
#include "rse/inertial_geometry.hpp"
#include "rse/spectral_bounds.hpp"

#include "test_support.hpp"

namespace rse {
namespace {

RigidProblem single_pole(double sigma, const Vector3d &w, const Matrix3d &g0 = Matrix3d::Identity()) {
  VectorXd s(1);
  s << sigma;
  MatrixX3d wm = w.transpose();
  return test::spectral_problem(g0, s, wm);
}

// Noisy problems whose γ₁ interval contains a bifurcation point.
struct Instance {
  RigidProblem p;
  GammaBounds b;
};

std::vector<Instance> instances_with_bifurcation(int count, std::uint64_t seed = 100) {
  std::vector<Instance> out;
  test::Rng rng(seed);
  for (int t = 0; t < 200 && static_cast<int>(out.size()) < count; ++t) {
    auto c = test::consistent_problem(rng, 6, 5, 0.3);
    GammaBounds b = compute_bounds(c.p);
    if (b.gamma_b && *b.gamma_b > c.p.sigma1() + 1e-3 && *b.gamma_b < b.gamma_plus - 1e-3)
      out.push_back({ c.p, b });
  }
  return out;
}

std::vector<Instance> generic_instances(int count, std::uint64_t seed = 200) {
  std::vector<Instance> out;
  test::Rng rng(seed);
  for (int t = 0; t < count; ++t) {
    auto c = test::consistent_problem(rng, 6, 5, 0.3);
    out.push_back({ c.p, compute_bounds(c.p) });
  }
  return out;
}

// A γ between the bifurcation (or pole) and the tangency point.
double upper_branch_gamma(const Instance &in, double t = 0.5) {
  const double lo = std::max(in.b.gamma_b1, in.b.gamma1_low);
  return lo + t * (in.b.gamma_plus - lo);
}

TEST(SMatrix, ZeroW) {
  RigidProblem p = single_pole(-3, Vector3d::Zero(), Vector3d(3, 2, 1).asDiagonal());
  for (double g: { 0.5, 1.0, 7.0 })
    EXPECT_LT((s_matrix(p, g) - p.G0).norm(), 1e-14);
}

TEST(SMatrix, SinglePoleHandValue) {
  RigidProblem p = single_pole(0, Vector3d(1, 0, 0));
  EXPECT_LT((s_matrix(p, 2) - Vector3d(1.25, 1, 1).asDiagonal().toDenseMatrix()).norm(), 1e-14);
}

TEST(SEigen, AgreesWithDirectAwayFromPoles) {
  test::Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    RigidProblem p = test::random_problem_raw(rng, 6, 4);
    const double g = p.sigma1() + rng.uniform(0.5, 3);
    const SymEigen3 a = s_eigen(p, g), b = sym_eigen3_desc(s_matrix(p, g));
    for (int k = 0; k < 3; ++k)
      EXPECT_LT(test::rel_err(a.values(k), b.values(k)), 1e-12);
  }
}

TEST(SEigen, SmallEigenvaluesNearPole) {
  // As γ → σ₁ the two small eigenvalues of S tend to those of the remaining
  // part A compressed onto the plane orthogonal to w₁.
  test::Rng rng(32);
  for (int t = 0; t < 10; ++t) {
    RigidProblem p = test::random_problem_raw(rng, 7, 5);
    const double g = p.sigma1() + 1e-8 * (1 + std::abs(p.sigma1()));
    Matrix3d a = p.G0;
    for (Index i = 1; i < p.N(); ++i)
      a += p.W.row(i).transpose() * p.W.row(i) / sqr(g - p.sigma(i));
    const Vector3d w = p.W.row(0).transpose().normalized();
    const Matrix3d proj = Matrix3d::Identity() - w * w.transpose();
    const Vector3d lim = sym_eigen3_desc(proj * a * proj).values;
    const SymEigen3 es = s_eigen(p, g);
    EXPECT_NEAR(es.values(1), lim(0), 1e-5 * lim(0));
    EXPECT_NEAR(es.values(2), lim(1), 1e-5 * lim(0));
    EXPECT_GT(es.values(0), 1e12);
  }
}

TEST(SMatrix, BivariateHandValue) {
  RigidProblem p = single_pole(0, Vector3d(1, 0, 0));
  EXPECT_LT((s_matrix_bi(p, 2, -1) - Vector3d(0.5, 1, 1).asDiagonal().toDenseMatrix()).norm(), 1e-14);
}

TEST(SMatrix, BivariateDiagonalAndSymmetry) {
  test::Rng rng(1);
  RigidProblem p = test::random_problem_raw(rng, 5, 4);
  const double g = p.sigma1() + 0.7, d = p.sigma1() + 2.3;
  EXPECT_LT((s_matrix_bi(p, g, g) - s_matrix(p, g)).norm(), 1e-14 * s_matrix(p, g).norm());
  EXPECT_LT((s_matrix_bi(p, g, d) - s_matrix_bi(p, d, g)).norm(), 1e-14 * s_matrix(p, g).norm());
}

TEST(SMatrix, PoleProximity) {
  test::Rng rng(2);
  RigidProblem p = test::random_problem_raw(rng, 5, 4);
  EXPECT_THROW(s_matrix(p, p.sigma(2)), PoleProximityError);
  EXPECT_THROW(s_matrix_bi(p, 1.0 + p.sigma1(), p.sigma(1)), PoleProximityError);
}

TEST(SMatrix, DerivativesMatchFiniteDifferences) {
  test::Rng rng(3);
  RigidProblem p = test::random_problem_raw(rng, 5, 4);
  const double g = p.sigma1() + 0.9, d = p.sigma1() + 1.6, h = 1e-6;
  Matrix3d fd = (s_matrix(p, g + h) - s_matrix(p, g - h)) / (2 * h);
  EXPECT_LT((fd - s_matrix_dgamma(p, g)).norm(), 1e-6 * (1 + fd.norm()));
  Matrix3d fdb = (s_matrix_bi(p, g + h, d) - s_matrix_bi(p, g - h, d)) / (2 * h);
  EXPECT_LT((fdb - s_matrix_bi_dgamma(p, g, d)).norm(), 1e-6 * (1 + fdb.norm()));
}

TEST(Frame, AxisThreeExample) {
  CurveFrame fr = frame_from_matrix(Vector3d(4, 1.5, 0.25).asDiagonal().toDenseMatrix(), 1.0);
  ASSERT_TRUE(fr.intersects());
  EXPECT_EQ(fr.axis_k, 3);
  EXPECT_NEAR(fr.beta_i, std::sqrt(0.2), 1e-15);
  EXPECT_NEAR(fr.beta_j, std::sqrt(0.6), 1e-15);
  EXPECT_NEAR(fr.om_i, 1 - 0.2, 1e-15);
}

TEST(Frame, AxisOneExample) {
  CurveFrame fr = frame_from_matrix(Vector3d(2, 0.5, 0.2).asDiagonal().toDenseMatrix(), 1.0);
  ASSERT_TRUE(fr.intersects());
  EXPECT_EQ(fr.axis_k, 1);
  EXPECT_NEAR(fr.beta_i, std::sqrt(1 / 1.5), 1e-15);
  EXPECT_NEAR(fr.beta_j, std::sqrt(1 / 1.8), 1e-15);
}

TEST(Frame, NoIntersection) {
  EXPECT_FALSE(frame_from_matrix(Vector3d(0.9, 0.5, 0.1).asDiagonal().toDenseMatrix(), 1).intersects());
  EXPECT_FALSE(frame_from_matrix(Vector3d(3, 2, 1.1).asDiagonal().toDenseMatrix(), 1).intersects());
}

TEST(Frame, BifurcationFlag) {
  CurveFrame fr = frame_from_matrix(Vector3d(3, 1 + 1e-10, 0.5).asDiagonal().toDenseMatrix(), 1);
  EXPECT_TRUE(fr.near_bifurcation);
  EXPECT_FALSE(frame_from_matrix(Vector3d(3, 1.1, 0.5).asDiagonal().toDenseMatrix(), 1).near_bifurcation);
}

TEST(Frame, ReconstructsMatrixAndSigns) {
  test::Rng rng(4);
  RigidProblem p = test::random_problem_raw(rng, 6, 4);
  const double g = p.sigma1() + 1.3;
  CurveFrame fr = curve_frame(p, g);
  Matrix3d qm = s_matrix(p, g) / g;
  EXPECT_LT((fr.U * fr.lambdas.asDiagonal() * fr.U.transpose() - qm).norm(), 1e-10 * qm.norm());
  for (int c = 0; c < 3; ++c) {
    Index imax;
    fr.U.col(c).cwiseAbs().maxCoeff(&imax);
    EXPECT_GT(fr.U(imax, c), 0);
  }
}

TEST(CurvePoint, PsiZero) {
  CurveFrame fr = frame_from_matrix(Vector3d(2, 0.5, 0.2).asDiagonal().toDenseMatrix(), 1.0);
  Vector3d xi = curve_xi(fr, 0.0);
  EXPECT_NEAR(xi(fr.i()), fr.beta_i, 1e-15);
  EXPECT_NEAR(xi(fr.j()), 0, 1e-15);
  EXPECT_NEAR(xi(fr.k()), std::sqrt(1 - fr.a()), 1e-15);
}

TEST(CurvePoint, MembershipProperty) {
  for (const auto &in: generic_instances(10)) {
    for (double t: { 0.1, 0.5, 0.9 }) {
      const double g = upper_branch_gamma(in, t);
      CurveFrame fr = curve_frame(in.p, g);
      ASSERT_TRUE(fr.intersects());
      const Matrix3d s = s_matrix(in.p, g);
      for (int k = 0; k < 16; ++k) {
        for (int hemi: { 1, -1 }) {
          Vector3d r = curve_point(fr, 2 * kPi * k / 16, hemi);
          EXPECT_NEAR(r.squaredNorm(), 1, 1e-12);
          EXPECT_NEAR(r.dot(s * r), g, 1e-10 * (1 + g));
        }
      }
    }
  }
}

TEST(CurvePoint, CircleAntipode) {
  CurveFrame fr = frame_from_matrix(Vector3d(2, 0.5, 0.5).asDiagonal().toDenseMatrix(), 1.0);
  ASSERT_NEAR(fr.beta_i, fr.beta_j, 1e-15);
  for (double psi: { 0.0, 0.3, 1.7, 4.0 })
    EXPECT_LT((curve_point(fr, psi, 1) + curve_point(fr, psi + kPi, -1)).norm(), 1e-14);
}

TEST(CurvePoint, DpsiCircleSpeed) {
  CurveFrame fr = frame_from_matrix(Vector3d(2, 0.5, 0.5).asDiagonal().toDenseMatrix(), 1.0);
  for (double psi: { 0.0, 0.4, 2.0, 5.5 })
    EXPECT_NEAR(curve_point_dpsi(fr, psi).norm(), fr.beta_i, 1e-14);
}

TEST(CurvePoint, DpsiFiniteDifferences) {
  const double h = 1e-6;
  for (const auto &in: generic_instances(8, 300)) {
    CurveFrame fr = curve_frame(in.p, upper_branch_gamma(in, 0.4));
    for (double psi: { 0.2, 1.1, 2.5, 4.4 }) {
      Vector3d fd = (curve_point(fr, psi + h) - curve_point(fr, psi - h)) / (2 * h);
      Vector3d an = curve_point_dpsi(fr, psi);
      EXPECT_LT((fd - an).norm(), 1e-6 * (1 + an.norm()));
    }
  }
}

TEST(CurvePoint, DpsiAtZeroHasNoIComponent) {
  CurveFrame fr = frame_from_matrix(Vector3d(4, 1.5, 0.25).asDiagonal().toDenseMatrix(), 1.0);
  Vector3d d = fr.U.transpose() * curve_point_dpsi(fr, 0.0);
  EXPECT_NEAR(d(fr.i()), 0, 1e-16);
}

TEST(EigDerivative, DiagonalPath) {
  Matrix3d q = Vector3d(1, 2, 3).asDiagonal();
  SymEigen3 es = sym_eigen3_desc(q);
  Matrix3d qp = Matrix3d::Zero();
  qp(0, 0) = 1;
  EigDerivative d = eig_derivative(q, qp, es.values, es.vectors);
  // Descending order places the perturbed eigenvalue last.
  EXPECT_LT((d.dlambda - Vector3d(0, 0, 1)).norm(), 1e-15);
  EXPECT_LT(d.dU.norm(), 1e-15);
}

TEST(EigDerivative, RotationPath) {
  test::Rng rng(5);
  const Matrix3d r0 = rng.rotation();
  const Matrix3d d = Vector3d(3, 2, 1).asDiagonal();
  const Matrix3d k = skew(Vector3d(0.3, -0.8, 0.5));
  const Matrix3d q = r0 * d * r0.transpose();
  const Matrix3d qp = k * q - q * k;  // d/dt of exp(tK) Q exp(−tK)
  SymEigen3 es = sym_eigen3_desc(q);
  EigDerivative der = eig_derivative(q, qp, es.values, es.vectors);
  EXPECT_LT(der.dlambda.norm(), 1e-12);
  EXPECT_LT((der.dU - k * es.vectors).norm(), 1e-12);
}

TEST(EigDerivative, FiniteDifferences) {
  test::Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    Matrix3d q = rng.symmetric(3), qp = rng.symmetric(3);
    SymEigen3 es = sym_eigen3_desc(q);
    EigDerivative d = eig_derivative(q, qp, es.values, es.vectors);
    const double h = 1e-6;
    SymEigen3 ep = sym_eigen3_desc(q + h * qp), em = sym_eigen3_desc(q - h * qp);
    // Align the sign of the perturbed eigenvectors to the base frame.
    for (int c = 0; c < 3; ++c) {
      if (ep.vectors.col(c).dot(es.vectors.col(c)) < 0)
        ep.vectors.col(c) *= -1;
      if (em.vectors.col(c).dot(es.vectors.col(c)) < 0)
        em.vectors.col(c) *= -1;
    }
    Vector3d fdl = (ep.values - em.values) / (2 * h);
    Matrix3d fdu = (ep.vectors - em.vectors) / (2 * h);
    EXPECT_LT((fdl - d.dlambda).norm(), 1e-5 * (1 + fdl.norm()));
    EXPECT_LT((fdu - d.dU).norm(), 1e-5 * (1 + fdu.norm()));
  }
}

TEST(EigDerivative, DegenerateSpectrum) {
  Matrix3d q = Vector3d(2, 2, 1).asDiagonal();
  SymEigen3 es = sym_eigen3_desc(q);
  EXPECT_THROW(eig_derivative(q, Matrix3d::Identity(), es.values, es.vectors), DegenerateSpectrumError);
}

TEST(CurveDgamma, ZeroWLimit) {
  RigidProblem p = single_pole(-5, Vector3d::Zero(), Vector3d(3, 2, 1).asDiagonal());
  const double g = 2.5;
  CurveFrame fr = curve_frame(p, g);
  ASSERT_TRUE(fr.intersects());
  FrameDerivative fd = frame_derivative(p, fr);
  EXPECT_LT(fd.eig.dU.norm(), 1e-14);
  EXPECT_LT((fd.eig.dlambda + fr.lambdas / g).norm(), 1e-14);
}

TEST(CurveDgamma, FiniteDifferences) {
  int checked = 0;
  for (const auto &in: generic_instances(10, 400)) {
    for (double t: { 0.3, 0.7 }) {
      const double g = upper_branch_gamma(in, t);
      CurveFrame fr = curve_frame(in.p, g);
      if (fr.near_bifurcation)
        continue;
      const double h = 1e-6 * g;
      CurveFrame fp = curve_frame(in.p, g + h), fm = curve_frame(in.p, g - h);
      ASSERT_EQ(fp.axis_k, fr.axis_k);
      ASSERT_EQ(fm.axis_k, fr.axis_k);
      for (double psi: { 0.3, 1.4, 2.9, 5.0 }) {
        Vector3d an = curve_point_dgamma(in.p, fr, psi);
        Vector3d num = (curve_point(fp, psi) - curve_point(fm, psi)) / (2 * h);
        EXPECT_LT((an - num).norm(), 1e-5 * (1 + an.norm()));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 40);
}

TEST(CurveDgamma, OnCurveConsistency) {
  for (const auto &in: generic_instances(6, 500)) {
    const double g = upper_branch_gamma(in, 0.5);
    CurveFrame fr = curve_frame(in.p, g);
    const Matrix3d s = s_matrix(in.p, g);
    const Matrix3d qp = s_matrix_dgamma(in.p, g) / g - s / (g * g);
    for (double psi: { 0.5, 2.0, 3.3 }) {
      Vector3d r = curve_point(fr, psi);
      Vector3d dr = curve_point_dgamma(in.p, fr, psi);
      const double dd = 2 * dr.dot(s / g * r) + r.dot(qp * r);
      EXPECT_NEAR(dd, 0, 1e-8 * (1 + dr.norm()));
    }
  }
}

TEST(ArcSpeed, Circle) {
  CurveFrame fr = frame_from_matrix(Vector3d(2, 0.5, 0.5).asDiagonal().toDenseMatrix(), 1.0);
  for (double psi: { 0.0, 0.7, 1.5, 3.0 })
    EXPECT_NEAR(arc_speed(fr, psi), fr.beta_i, 1e-14);
}

TEST(ArcSpeed, EndpointExtremes) {
  for (Vector3d l: { Vector3d(4, 1.5, 0.25), Vector3d(2, 0.5, 0.2), Vector3d(1.3, 0.9, 0.1) }) {
    CurveFrame fr = frame_from_matrix(l.asDiagonal().toDenseMatrix(), 1.0);
    const double lo = std::min(fr.beta_i, fr.beta_j), hi = std::max(fr.beta_i, fr.beta_j);
    EXPECT_NEAR(arc_speed(fr, 0.0), fr.beta_j, 1e-15);
    EXPECT_NEAR(arc_speed(fr, kPi / 2), fr.beta_i, 1e-15);
    double prev = arc_speed(fr, 0.0);
    const bool inc = fr.beta_i > fr.beta_j;
    for (int k = 1; k <= 50; ++k) {
      const double v = arc_speed(fr, kPi / 2 * k / 50);
      EXPECT_GE(v, lo - 1e-14);
      EXPECT_LE(v, hi + 1e-14);
      if (inc)
        EXPECT_GE(v, prev - 1e-14);
      else
        EXPECT_LE(v, prev + 1e-14);
      prev = v;
    }
  }
}

TEST(ArcSpeed, MatchesTangentNorm) {
  for (const auto &in: generic_instances(5, 600)) {
    CurveFrame fr = curve_frame(in.p, upper_branch_gamma(in, 0.6));
    for (double psi: { 0.1, 0.9, 2.2, 3.9, 6.0 })
      EXPECT_NEAR(arc_speed(fr, psi), curve_point_dpsi(fr, psi).norm(), 1e-12);
  }
}

TEST(ArcSpeed, PeriodicDoubleSymmetry) {
  CurveFrame fr = frame_from_matrix(Vector3d(4, 1.5, 0.25).asDiagonal().toDenseMatrix(), 1.0);
  auto sp = [&](double x) { return arc_speed(fr, x); };
  const double full = romberg(sp, 0, 2 * kPi, 1e-12, 16).value;
  const double quarter = romberg(sp, 0, kPi / 2, 1e-12, 16).value;
  EXPECT_NEAR(full, 4 * quarter, 1e-10);
  for (double psi: { 0.2, 0.9, 1.3 }) {
    EXPECT_NEAR(sp(psi), sp(psi + kPi), 1e-14);
    EXPECT_NEAR(sp(psi), sp(kPi - psi), 1e-14);
  }
}

TEST(CurveLength, Circle) {
  CurveFrame fr = frame_from_matrix(Vector3d(2, 0.5, 0.5).asDiagonal().toDenseMatrix(), 1.0);
  EXPECT_NEAR(curve_length(fr), 2 * kPi * fr.beta_i, 1e-10);
}

TEST(CurveLength, BifurcationAndTangency) {
  auto ins = instances_with_bifurcation(5);
  ASSERT_GE(ins.size(), 3u);
  for (const auto &in: ins) {
    EXPECT_NEAR(curve_length(in.p, *in.b.gamma_b), 2 * kPi, 1e-6);
    // Near tangency L shrinks like the square root of the distance to γ⁺.
    const double l8 = curve_length(in.p, in.b.gamma_plus * (1 - 1e-8));
    const double l6 = curve_length(in.p, in.b.gamma_plus * (1 - 1e-6));
    EXPECT_LT(l8, 2e-3);
    EXPECT_NEAR(l8 / l6, 0.1, 1e-3);
    EXPECT_EQ(curve_length(in.p, in.b.gamma_plus * (1 + 1e-6)), 0);
  }
}

TEST(CurveLength, DerivativeFiniteDifferences) {
  for (const auto &in: generic_instances(8, 700)) {
    for (double t: { 0.25, 0.6 }) {
      const double g = upper_branch_gamma(in, t), h = 1e-5 * g;
      const double an = curve_length_dgamma(in.p, g);
      const double num = (curve_length(in.p, g + h) - curve_length(in.p, g - h)) / (2 * h);
      EXPECT_LT(std::abs(an - num), 1e-5 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST(CurveLength, DerivativeSigns) {
  for (const auto &in: instances_with_bifurcation(4, 800)) {
    const double gb = *in.b.gamma_b, lo = std::max(in.p.sigma1(), 0.0);
    for (double t: { 0.2, 0.5, 0.8 }) {
      EXPECT_LT(curve_length_dgamma(in.p, gb + t * (in.b.gamma_plus - gb)), 0);
      EXPECT_GT(curve_length_dgamma(in.p, lo + t * (gb - lo)), 0);
    }
    // L has a square-root cusp at γ_b: |L′| grows like |γ - γ_b|^(-1/2).
    for (double side: { -1.0, 1.0 }) {
      const double near = curve_length_dgamma(in.p, gb * (1 + side * 1e-7));
      const double far = curve_length_dgamma(in.p, gb * (1 + side * 1e-5));
      EXPECT_NEAR(near / far, 10, 0.5);
    }
  }
}

TEST(BifurcationAngle, Examples) {
  CurveFrame fr = frame_from_matrix(Vector3d(3, 1, 1.0 / 3).asDiagonal().toDenseMatrix(), 1.0);
  EXPECT_NEAR(bifurcation_angle(fr), kPi / 3, 1e-14);
  CurveFrame nt = frame_from_matrix(Vector3d(3, 1, 1 - 1e-10).asDiagonal().toDenseMatrix(), 1.0);
  EXPECT_LT(bifurcation_angle(nt), 1e-4);
  CurveFrame big = frame_from_matrix(Vector3d(1e12, 1, 0.5).asDiagonal().toDenseMatrix(), 1.0);
  EXPECT_LT(bifurcation_angle(big), 1e-5);
  CurveFrame bad = frame_from_matrix(Vector3d(0.9, 0.8, 0.5).asDiagonal().toDenseMatrix(), 1.0);
  EXPECT_THROW(bifurcation_angle(bad), InvalidArgument);
}

TEST(Nesting, Property) {
  for (const auto &in: generic_instances(5, 900)) {
    const double lo = std::max(in.p.sigma1(), 0.0);
    const double top = in.b.gamma_plus;
    test::Rng rng(77);
    for (int t = 0; t < 200; ++t) {
      double g1 = lo + (top - lo) * rng.uniform(0.01, 0.99);
      double g2 = lo + (top - lo) * rng.uniform(0.01, 0.99);
      CurveFrame fr = curve_frame(in.p, g1);
      if (!fr.intersects())
        continue;
      Vector3d pt = curve_point(fr, rng.uniform(0, 2 * kPi));
      EXPECT_LT(nesting_quantity(in.p, pt, g1, g2), 0);
    }
  }
}

TEST(Cone, HalfAngleBound) {
  for (const auto &in: generic_instances(5, 1000)) {
    const double g = upper_branch_gamma(in, 0.5);
    CurveFrame fr = curve_frame(in.p, g);
    const double chi = cone_half_angle(fr);
    const Vector3d axis = fr.U.col(fr.k());
    for (int a = 0; a < 24; ++a) {
      Vector3d ra = curve_point(fr, 2 * kPi * a / 24);
      EXPECT_LE(std::acos(std::min(1.0, ra.dot(axis))), chi + 1e-12);
      for (int b = a + 1; b < 24; ++b) {
        Vector3d rb = curve_point(fr, 2 * kPi * b / 24);
        EXPECT_LE(std::acos(std::clamp(ra.dot(rb), -1.0, 1.0)), 2 * chi + 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace rse
