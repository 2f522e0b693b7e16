//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include "rse/cayley.hpp"
#include "rse/newton_solvers.hpp"

#include "test_support.hpp"

namespace rse {
namespace {

Matrix3d small_rotation(test::Rng &rng, double angle) {
  Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

// Critical point of a noisy consistent problem, found by NK from the
// noise-free coordinates.
struct Solved {
  RigidProblem p;
  MatrixX3d y;
};

std::vector<Solved> solved_instances(int count, std::uint64_t seed) {
  std::vector<Solved> out;
  test::Rng rng(seed);
  for (int t = 0; t < 10 * count && static_cast<int>(out.size()) < count; ++t) {
    auto c = test::consistent_problem(rng, 7, 5, 0.2);
    NKResult r = newton_kantorovitch(c.p, c.y);
    if (r.status != SolveStatus::kConverged)
      continue;
    InertialSolution s = inertial_from_matrix(c.p, r.cm.Y);
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      ok = ok && pole_distance(c.p, s.gammas(k)) > 1e-2;
      ok = ok && !curve_frame(c.p, s.gammas(k)).near_bifurcation;
    }
    ok = ok && s.gammas(0) - s.gammas(1) > 1e-2 && s.gammas(1) - s.gammas(2) > 1e-2;
    if (ok)
      out.push_back({ c.p, r.cm.Y });
  }
  return out;
}

double max_abs_diff(const MatrixXd &a, const MatrixXd &b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

TEST(Cayley, HandExample) {
  Matrix3d expected;
  expected << 0, 1, 0, -1, 0, 0, 0, 0, 1;
  EXPECT_LT(max_abs_diff(rotation_from_cayley(Vector3d(0, 0, 1)), expected), 1e-15);
  EXPECT_EQ(rotation_from_cayley(Vector3d::Zero()), Matrix3d::Identity());
}

TEST(Cayley, RotationProperties) {
  test::Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vector3d w = 3 * Vector3d(rng.normal(), rng.normal(), rng.normal());
    const Matrix3d r = rotation_from_cayley(w);
    EXPECT_LT(max_abs_diff(r.transpose() * r, Matrix3d::Identity()), 1e-13);
    EXPECT_NEAR(r.determinant(), 1, 1e-13);
    // ω is the axis, and tan(θ/2) = ‖ω‖.
    EXPECT_LT((r * w - w).norm(), 1e-12 * (1 + w.norm()));
    const double n2 = w.squaredNorm();
    EXPECT_NEAR(r.trace(), 1 + 2 * (1 - n2) / (1 + n2), 1e-13);
  }
}

TEST(Cayley, RoundTrip) {
  test::Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Vector3d w(rng.normal(), rng.normal(), rng.normal());
    EXPECT_LT((cayley_from_rotation(rotation_from_cayley(w)) - w).norm(), 1e-12 * (1 + w.norm()));
    const Matrix3d r = rng.rotation();
    if (r.trace() > -0.9)
      EXPECT_LT(max_abs_diff(rotation_from_cayley(cayley_from_rotation(r)), r), 1e-12);
  }
}

TEST(Cayley, HalfTurnIsSingular) {
  EXPECT_THROW(cayley_from_rotation(Vector3d(1, -1, -1).asDiagonal().toDenseMatrix()),
               CayleySingularityError);
}

TEST(Cayley, ApproximatelyOrthogonalInput) {
  test::Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Matrix3d r = rng.rotation();
    if (r.trace() < 0)
      continue;
    r += 1e-3 * Matrix3d(rng.gaussian(3, 3));
    const Matrix3d back = rotation_from_cayley(cayley_from_rotation(r));
    EXPECT_LT(max_abs_diff(back.transpose() * back, Matrix3d::Identity()), 1e-14);
    EXPECT_LT(max_abs_diff(back, r), 1e-2);
  }
}

TEST(Cayley, DerivativeFiniteDifferences) {
  test::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const Vector3d w(rng.normal(), rng.normal(), rng.normal());
    const auto d = rotation_dcayley(w);
    for (int m = 0; m < 3; ++m) {
      const double h = 1e-6;
      const Matrix3d num = (rotation_from_cayley(w + h * Vector3d::Unit(m)) -
                            rotation_from_cayley(w - h * Vector3d::Unit(m))) /
                           (2 * h);
      EXPECT_LT(max_abs_diff(num, d[m]), 1e-8);
    }
  }
}

TEST(OrientColumns, ProperAndMaximalTrace) {
  test::Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Matrix3d r = rng.rotation();
    Matrix3d flipped = r;
    for (int k = 0; k < 3; ++k)
      if (rng.uniform() < 0.5)
        flipped.col(k) = -flipped.col(k);
    const Matrix3d o = orient_columns(flipped);
    EXPECT_NEAR(o.determinant(), 1, 1e-12);
    EXPECT_GE(o.trace(), 0);
    for (int k = 0; k < 3; ++k)
      EXPECT_NEAR(std::abs(o.col(k).dot(r.col(k))), 1, 1e-12);
    // No other proper sign pattern has a larger trace.
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        Matrix3d alt = o;
        alt.col(a) = -alt.col(a);
        alt.col(b) = -alt.col(b);
        EXPECT_LE(alt.trace(), o.trace() + 1e-14);
      }
    }
  }
}

// ---------------------------------------------------------------------------

TEST(NK, MatrixMatchesDirectionalDerivative) {
  test::Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    RigidProblem p = test::random_problem_raw(rng, 6, 5);
    const MatrixX3d y = rng.gaussian(5, 3), d = rng.gaussian(5, 3);
    const MatrixXd k = nk_matrix(p, y);
    const VectorXd kd = k * Eigen::Map<const VectorXd>(d.data(), 15);
    const MatrixX3d dir = phi_directional(p, y, d);
    EXPECT_LT((kd - Eigen::Map<const VectorXd>(dir.data(), 15)).cwiseAbs().maxCoeff(),
              1e-12 * (1 + dir.norm()));

    const double h = 1e-6;
    const MatrixX3d num = (phi(p, y + h * d) - phi(p, y - h * d)) / (2 * h);
    EXPECT_LT(max_abs_diff(num, dir), 1e-6 * (1 + dir.norm()));
  }
}

TEST(NK, MatrixIsSymmetric) {
  // K is half the Hessian of the strain.
  test::Rng rng(7);
  RigidProblem p = test::random_problem_raw(rng, 5, 4);
  const MatrixXd k = nk_matrix(p, rng.gaussian(4, 3));
  EXPECT_LT(max_abs_diff(k, k.transpose()), 1e-12);
}

TEST(NK, RecoversExactFit) {
  test::Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    auto c = test::consistent_problem(rng, 6, 5);
    const MatrixX3d y0 = c.y + 0.05 * MatrixX3d(rng.gaussian(5, 3));
    NKResult r = newton_kantorovitch(c.p, y0);
    ASSERT_EQ(r.status, SolveStatus::kConverged);
    EXPECT_LT(max_abs_diff(r.cm.Y, c.y), 1e-9);
    EXPECT_LT(r.cm.strain_value, 1e-12);
    EXPECT_LT(r.iterations, 20);
  }
}

TEST(NK, ConvergedPointIsCritical) {
  for (const auto &s: solved_instances(8, 9)) {
    EXPECT_LT(phi(s.p, s.y).norm(), scaled_tolerance(s.p, {}));
    // The strain reported at a critical point matches direct evaluation.
    EXPECT_NEAR(strain_at_critical(s.p, s.y), strain(s.p, s.y), 1e-8 * (1 + strain(s.p, s.y)));
  }
}

TEST(NK, DivergenceGuard) {
  test::Rng rng(10);
  RigidProblem p = test::random_problem_raw(rng, 5, 4);
  SolveOptions o;
  o.divergence_guard = 1e-3;
  o.max_iters = 5;
  o.damping = 1;
  o.n_damp = 0;
  NKResult r = newton_kantorovitch(p, 50 * MatrixX3d(rng.gaussian(4, 3)), o);
  EXPECT_NE(r.status, SolveStatus::kConverged);
}

// ---------------------------------------------------------------------------

TEST(CayleyNewton, JacobianFiniteDifferences) {
  for (const auto &s: solved_instances(6, 11)) {
    InertialSolution sol = inertial_from_matrix(s.p, s.y);
    const Vector3d gam = sol.gammas * 1.01;
    const Vector3d w = 0.3 * Vector3d(0.2, -0.5, 0.4);
    Matrix6d jac;
    cayley_system(s.p, gam, w, &jac);
    const double h = 1e-6;
    for (int c = 0; c < 6; ++c) {
      Vector3d gp = gam, gm = gam, wp = w, wm = w;
      const double hc = c < 3 ? h * (1 + std::abs(gam(c))) : h;
      if (c < 3) {
        gp(c) += hc;
        gm(c) -= hc;
      } else {
        wp(c - 3) += hc;
        wm(c - 3) -= hc;
      }
      const Vector6d num = (cayley_system(s.p, gp, wp) - cayley_system(s.p, gm, wm)) / (2 * hc);
      EXPECT_LT((num - jac.col(c)).cwiseAbs().maxCoeff(), 1e-5 * (1 + jac.col(c).norm())) << c;
    }
  }
}

TEST(CayleyNewton, ResidualVanishesAtCriticalPoints) {
  for (const auto &s: solved_instances(6, 12)) {
    InertialSolution sol = inertial_from_matrix(s.p, s.y);
    EXPECT_LT(inertial_residual(s.p, sol).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(CayleyNewton, ConvergesFromPerturbedStart) {
  test::Rng rng(13);
  for (const auto &s: solved_instances(8, 13)) {
    InertialSolution exact = inertial_from_matrix(s.p, s.y);
    InertialSolution init { exact.gammas * (1 + 1e-3), small_rotation(rng, 0.02) * exact.R };
    InertialResult r = cayley_newton(s.p, init);
    ASSERT_EQ(r.status, SolveStatus::kConverged) << to_string(r.status);
    const MatrixX3d y = reconstruct_critical(s.p, r.solution);
    EXPECT_LT(max_abs_diff(y, s.y), 1e-8);
    EXPECT_NEAR(r.solution.R.determinant(), 1, 1e-12);
    EXPECT_GE(r.solution.gammas(0), r.solution.gammas(1));
    EXPECT_GE(r.solution.gammas(1), r.solution.gammas(2));
  }
}

TEST(CayleyNewton, ColumnSignsOfStartDoNotMatter) {
  test::Rng rng(14);
  for (const auto &s: solved_instances(3, 14)) {
    InertialSolution exact = inertial_from_matrix(s.p, s.y);
    InertialSolution init { exact.gammas * (1 + 1e-4), exact.R };
    init.R.col(0) = -init.R.col(0);
    init.R.col(2) = -init.R.col(2);
    init.R = init.R * Eigen::AngleAxisd(0.01, Vector3d::UnitZ()).toRotationMatrix();
    InertialResult r = cayley_newton(s.p, init);
    ASSERT_EQ(r.status, SolveStatus::kConverged);
    EXPECT_LT(max_abs_diff(reconstruct_critical(s.p, r.solution), s.y), 1e-8);
  }
}

TEST(PoleSafeStep, RejectsCrossingAndGap) {
  VectorXd sig(2);
  sig << 2.0, -1.0;
  MatrixX3d w = MatrixX3d::Ones(2, 3);
  RigidProblem p = test::spectral_problem(Matrix3d::Identity(), sig, w);
  const Vector3d g(3, 1, 0);
  EXPECT_TRUE(detail::pole_safe_step(p, g, Vector3d(0.5, 0.5, 0.5)));
  EXPECT_FALSE(detail::pole_safe_step(p, g, Vector3d(-1.5, 0, 0)));
  EXPECT_FALSE(detail::pole_safe_step(p, g, Vector3d(0, 0, -1.0)));
  EXPECT_FALSE(detail::pole_safe_step(p, g, Vector3d(0, 0, -2.0)));
}

TEST(NormalizeInertial, SortsAndFixesDeterminant) {
  InertialSolution s { Vector3d(1, 3, 2), Matrix3d::Identity() };
  InertialSolution n = normalize_inertial(s);
  EXPECT_EQ(n.gammas, Vector3d(3, 2, 1));
  EXPECT_NEAR(n.R.determinant(), 1, 1e-15);
  EXPECT_EQ(n.R.col(0), Vector3d::UnitY());
  EXPECT_EQ(n.R.col(1), Vector3d::UnitZ());
}

// ---------------------------------------------------------------------------

TEST(AngularNewton, StartRecoversCurveParameters) {
  for (const auto &s: solved_instances(4, 15)) {
    InertialSolution exact = inertial_from_matrix(s.p, s.y);
    auto q = angular_start(s.p, exact);
    ASSERT_TRUE(q.has_value());
    Matrix3d r;
    const Vector6d h = angular_system(s.p, *q, nullptr, &r);
    EXPECT_LT(h.cwiseAbs().maxCoeff(), 1e-8);
    for (int k = 0; k < 3; ++k)
      EXPECT_NEAR(std::abs(r.col(k).dot(exact.R.col(k))), 1, 1e-9);
  }
}

TEST(AngularNewton, JacobianFiniteDifferences) {
  for (const auto &s: solved_instances(5, 16)) {
    InertialSolution exact = inertial_from_matrix(s.p, s.y);
    auto q0 = angular_start(s.p, exact);
    ASSERT_TRUE(q0.has_value());
    Vector6d q = *q0;
    for (int k = 0; k < 3; ++k)
      q(2 * k + 1) += 0.05;
    Matrix6d jac;
    angular_system(s.p, q, &jac);
    for (int c = 0; c < 6; ++c) {
      const double h = 1e-6 * (c % 2 == 0 ? 1 + std::abs(q(c)) : 1);
      Vector6d qp = q, qm = q;
      qp(c) += h;
      qm(c) -= h;
      const Vector6d num = (angular_system(s.p, qp) - angular_system(s.p, qm)) / (2 * h);
      EXPECT_LT((num - jac.col(c)).cwiseAbs().maxCoeff(), 1e-5 * (1 + jac.col(c).norm())) << c;
    }
  }
}

TEST(AngularNewton, ConvergesAndAgreesWithOtherSolvers) {
  test::Rng rng(17);
  int checked = 0;
  for (const auto &s: solved_instances(8, 17)) {
    InertialSolution exact = inertial_from_matrix(s.p, s.y);
    auto q0 = angular_start(s.p, exact);
    ASSERT_TRUE(q0.has_value());
    Vector6d q = *q0;
    for (int k = 0; k < 3; ++k) {
      q(2 * k) *= 1 + 1e-4;
      q(2 * k + 1) += 1e-3;
    }
    InertialResult ra = angular_newton(s.p, q);
    ASSERT_EQ(ra.status, SolveStatus::kConverged) << to_string(ra.status);
    const MatrixX3d ya = reconstruct_critical(s.p, ra.solution);

    InertialSolution init { exact.gammas * (1 + 1e-4), small_rotation(rng, 1e-3) * exact.R };
    InertialResult rc = cayley_newton(s.p, init);
    ASSERT_EQ(rc.status, SolveStatus::kConverged);
    const MatrixX3d yc = reconstruct_critical(s.p, rc.solution);

    EXPECT_LT(max_abs_diff(ya, s.y), 1e-8);
    EXPECT_LT(max_abs_diff(yc, s.y), 1e-8);
    EXPECT_NEAR(strain_at_critical(s.p, ya), strain(s.p, s.y), 1e-8);
    ++checked;
  }
  EXPECT_GE(checked, 5);
}

TEST(CriticalFromInertial, ReportsSourceAndResidual) {
  for (const auto &s: solved_instances(2, 18)) {
    CriticalMatrix cm = critical_from_inertial(s.p, inertial_from_matrix(s.p, s.y), "cayley", 4);
    EXPECT_EQ(cm.source, "cayley");
    EXPECT_EQ(cm.iterations, 4);
    EXPECT_LT(cm.residual_norm, 1e-9);
    EXPECT_LT(max_abs_diff(cm.Y.cwiseAbs(), s.y.cwiseAbs()), 1e-9);
  }
}

}  // namespace
}  // namespace rse
