//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "rse/core.hpp"
#include "rse/metric_gram.hpp"
#include "rse/strain_core.hpp"

namespace rse {

/// Seedable 64-bit generator. Each block of a problem draws from its own
/// stream, seeded from (seed, stream id), so that changing one block's size
/// does not shift the others.
class Rng {
public:
  enum Stream : std::uint32_t { kCoordinates = 0, kPerturbB = 1, kPerturbC = 2, kChemical = 3 };

  Rng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq { static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        stream };
    gen_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal by the Box–Muller transform.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(2 * kPi * u2);
    has_spare_ = true;
    return rad * std::cos(2 * kPi * u2);
  }

  /// Uniform point in the ball of radius r about c.
  Vector3d in_ball(const Vector3d &c, double r) {
    Vector3d d;
    do {
      d = Vector3d(normal(), normal(), normal());
    } while (d.norm() == 0);
    return c + r * std::cbrt(uniform()) * d.normalized();
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0;
  bool has_spare_ = false;
};

struct GenParams {
  Index M = 0;
  Index N = 0;
  double s_xy = 0;
  double eps_b = 0;
  double eps_c = 0;
  std::uint64_t seed = 0;
};

struct GeneratedProblem {
  RigidProblem problem;
  MatrixX3d Y_true;
  GenParams params;
};

enum class PerturbKind { kNone, kMultiplicative, kChemical };

struct Perturbation {
  PerturbKind kind = PerturbKind::kNone;
  double eps_b = 0;  // multiplicative only
  double eps_c = 0;
};

/// Distances under 3 are kept; longer ones are redrawn uniformly from
/// [max(3, d/√2), d√2].
inline double perturb_distance_chemical(double d, Rng &rng) {
  require(d >= 0, "distance must be non-negative");
  if (d < 3.0)
    return d;
  return rng.uniform(std::max(3.0, d / std::sqrt(2.0)), d * std::sqrt(2.0));
}

namespace detail {
  struct Normalized {
    MatrixX3d x, y;
    Vector3d zeta;
  };

  /// Centers both sets on the centroid of x and rotates to the principal axes
  /// of xᵀx. Fails when the centered x has rank below min(3, M − 1); three
  /// points about their centroid are always planar.
  inline std::optional<Normalized> normalize_coordinates(const MatrixX3d &x, const MatrixX3d &y) {
    const Eigen::RowVector3d cx = x.colwise().mean();
    MatrixX3d xc = x.rowwise() - cx;
    MatrixX3d yc = y.rowwise() - cx;
    SymEigen3 es = sym_eigen3_desc(xc.transpose() * xc);
    const int need = static_cast<int>(std::min<Index>(3, x.rows() - 1));
    if (!(es.values(need - 1) > 1e-10 * es.values(0)))
      return std::nullopt;
    Matrix3d l = es.vectors;
    if (l.determinant() < 0)
      l.col(2) = -l.col(2);
    return Normalized { xc * l, yc * l, es.values };
  }

  /// Gram blocks about the centroid of x from the blocks of squared distances.
  inline std::pair<MatrixXd, MatrixXd> gram_blocks(const MatrixXd &da, const MatrixXd &db,
                                                   const MatrixXd &dc) {
    const Index m = da.rows(), n = dc.rows();
    MatrixXd d(m + n, m + n);
    d.topLeftCorner(m, m) = da;
    d.topRightCorner(m, n) = db;
    d.bottomLeftCorner(n, m) = db.transpose();
    d.bottomRightCorner(n, n) = dc;
    VectorXd mass = VectorXd::Zero(m + n);
    mass.head(m).setOnes();
    const MatrixXd g = gram_from_squared_distances(d, mass);
    return { g.topRightCorner(m, n), g.bottomRightCorner(n, n) };
  }

  inline void perturb_b(MatrixXd &db, double eps, Rng &rng) {
    for (Index j = 0; j < db.cols(); ++j)
      for (Index i = 0; i < db.rows(); ++i)
        db(i, j) *= sqr(1 + rng.uniform(-eps, eps));
  }

  inline void perturb_c(MatrixXd &dc, double eps, Rng &rng) {
    for (Index j = 1; j < dc.cols(); ++j) {
      for (Index i = 0; i < j; ++i) {
        dc(i, j) *= sqr(1 + rng.uniform(-eps, eps));
        dc(j, i) = dc(i, j);
      }
    }
  }
}  // namespace detail

/// Random problem: uniform points in two balls, normalized and perturbed.
inline GeneratedProblem random_problem(Index m, Index n, double s_xy, double eps_b, double eps_c,
                                       std::uint64_t seed) {
  require(m >= 3, "M must be at least 3");
  require(n >= 1, "N must be at least 1");
  require(s_xy >= 0 && eps_b >= 0 && eps_c >= 0, "generator parameters must be non-negative");
  require(eps_b < 1 && eps_c < 1, "perturbation magnitudes must be below 1");

  Rng rng(seed, Rng::kCoordinates);
  const double rx = std::cbrt(static_cast<double>(m)), ry = std::cbrt(static_cast<double>(n));
  std::optional<detail::Normalized> nz;
  for (int attempt = 0; !nz; ++attempt) {
    require(attempt < 100, "could not sample a three-dimensional X");
    Vector3d dir;
    do {
      dir = Vector3d(rng.normal(), rng.normal(), rng.normal());
    } while (dir.norm() == 0);
    const Vector3d cy = s_xy * (rx + ry) * dir.normalized();
    MatrixX3d x(m, 3), y(n, 3);
    for (Index i = 0; i < m; ++i)
      x.row(i) = rng.in_ball(Vector3d::Zero(), rx).transpose();
    for (Index i = 0; i < n; ++i)
      y.row(i) = rng.in_ball(cy, ry).transpose();
    nz = detail::normalize_coordinates(x, y);
  }
  const double scale = 1 / std::sqrt(nz->zeta(0));
  const MatrixX3d x = nz->x * scale, y = nz->y * scale;

  const MatrixXd da = squared_distances(x);
  MatrixXd db = squared_distances(x, y);
  MatrixXd dc = squared_distances(y);
  Rng rb(seed, Rng::kPerturbB), rc(seed, Rng::kPerturbC);
  if (eps_b > 0)
    detail::perturb_b(db, eps_b, rb);
  if (eps_c > 0)
    detail::perturb_c(dc, eps_c, rc);

  auto [b, c] = detail::gram_blocks(da, db, dc);
  return { assemble_problem(x, b, c), y, { m, n, s_xy, eps_b, eps_c, seed } };
}

/// Problem from given coordinates. Only distances that involve Y are
/// perturbed.
inline GeneratedProblem problem_from_coordinates(const MatrixX3d &x_coords,
                                                 const MatrixX3d &y_coords,
                                                 const Perturbation &pert, std::uint64_t seed) {
  require(x_coords.rows() >= 3 && y_coords.rows() >= 1, "need at least 3 X and 1 Y point");
  require(x_coords.allFinite() && y_coords.allFinite(), "coordinates must be finite");
  auto nz = detail::normalize_coordinates(x_coords, y_coords);
  if (!nz)
    throw InvalidArgument("X coordinates are rank deficient");
  const MatrixX3d &x = nz->x, &y = nz->y;

  const MatrixXd da = squared_distances(x);
  MatrixXd db = squared_distances(x, y);
  MatrixXd dc = squared_distances(y);
  GenParams gp { x.rows(), y.rows(), 0, 0, 0, seed };
  switch (pert.kind) {
  case PerturbKind::kNone:
    break;
  case PerturbKind::kMultiplicative: {
    require(pert.eps_b >= 0 && pert.eps_b < 1 && pert.eps_c >= 0 && pert.eps_c < 1,
            "perturbation magnitudes must lie in [0, 1)");
    Rng rb(seed, Rng::kPerturbB), rc(seed, Rng::kPerturbC);
    detail::perturb_b(db, pert.eps_b, rb);
    detail::perturb_c(dc, pert.eps_c, rc);
    gp.eps_b = pert.eps_b;
    gp.eps_c = pert.eps_c;
    break;
  }
  case PerturbKind::kChemical: {
    Rng rr(seed, Rng::kChemical);
    for (Index j = 0; j < db.cols(); ++j)
      for (Index i = 0; i < db.rows(); ++i)
        db(i, j) = sqr(perturb_distance_chemical(std::sqrt(db(i, j)), rr));
    for (Index j = 1; j < dc.cols(); ++j) {
      for (Index i = 0; i < j; ++i) {
        const double d = std::sqrt(dc(i, j));
        if (d < 3.0)
          continue;
        dc(i, j) = dc(j, i) = sqr(perturb_distance_chemical(d, rr));
      }
    }
    break;
  }
  }
  auto [b, c] = detail::gram_blocks(da, db, dc);
  return { assemble_problem(x, b, c), y, gp };
}

}  // namespace rse
