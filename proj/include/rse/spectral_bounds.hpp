//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "rse/core.hpp"
#include "rse/inertial_geometry.hpp"
#include "rse/strain_core.hpp"

namespace rse {

struct GammaBounds {
  double gamma_plus = 0;
  double gamma_minus = 0;
  double gamma2_plus = 0;
  std::optional<double> gamma_b;
  double gamma_b1 = 0;
  double gamma1_low = 0;
};

/// Eigenvalues of S(γ)/γ in descending order.
inline Vector3d scaled_lambdas(const RigidProblem &p, double gamma) {
  return scaled_eigen(p, gamma).values;
}

namespace detail {
  /// Positive root of δ³ + e δ² − d = 0 for d > 0, by Newton inside the
  /// enclosing interval of the special cubic.
  inline double special_cubic_root(double e, double d) {
    if (d <= 0)
      return std::max(0.0, -e);
    double lo, hi;
    if (e > 0) {
      lo = std::sqrt(d / (e + std::sqrt(d / e)));
      hi = std::sqrt(d / e);
    } else if (e < 0) {
      lo = -e;
      hi = -e + d / (e * e);
    } else {
      return std::cbrt(d);
    }

    auto f = [&](double x) { return x * x * (x + e) - d; };
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      const double fx = f(x);
      if (fx > 0)
        hi = x;
      else
        lo = x;
      const double df = x * (3 * x + 2 * e);
      double xn = df > 0 ? x - fx / df : 0.5 * (lo + hi);
      if (!(xn > lo && xn < hi))
        xn = 0.5 * (lo + hi);
      if (std::abs(xn - x) <= 4 * std::numeric_limits<double>::epsilon() * x) {
        x = xn;
        break;
      }
      x = xn;
    }
    return x;
  }

  template <class F>
  double refine_root(F &&f, double a, double b, double fa, double fb) {
    if (fa == 0)
      return a;
    if (fb == 0)
      return b;
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return 0.5 * (r.first + r.second);
  }

  /// Mesh on (lo, hi) combining a uniform grid with points clustered
  /// geometrically toward lo, in ascending order.
  inline std::vector<double> scan_mesh(double lo, double hi, int uniform = 200) {
    std::vector<double> pts;
    const double w = hi - lo;
    for (int k = 1; k < uniform; ++k)
      pts.push_back(lo + w * k / uniform);
    for (int k = 1; k <= 12; ++k) {
      const double t = std::pow(10.0, -k * 0.5) / uniform;
      pts.push_back(lo + w * t);
    }
    std::sort(pts.begin(), pts.end());
    return pts;
  }
}  // namespace detail

/// Largest solution of γ = λ_max(S(γ)) above σ₁.
inline double gamma_plus(const RigidProblem &p) {
  const double gmax = lambda_max(p.G0);
  const double wn2 = p.W.squaredNorm();
  const double s1 = p.sigma1();
  if (wn2 <= 1e-28 * std::max(1.0, gmax * gmax))
    return gmax;

  const double gap = 2 * p.pole_gap();
  auto rho = [&](double g) { return lambda_max(ellipsoid_matrix_unchecked(p, g, g)); };

  const double delta0 = detail::special_cubic_root(s1 - gmax, wn2);
  double lo = s1 + gap, hi = s1 + std::max(delta0, 2 * gap);
  if (rho(lo) - lo <= 0) {
    // No pole contribution from σ₁; the bound touches the pole gap.
    return lo;
  }

  double gp = s1 + 0.5 * (hi - s1), gc = hi;
  double rp = rho(gp), rc = rho(gc);
  auto update = [&](double g, double r) {
    if (r - g > 0)
      lo = std::max(lo, g);
    else
      hi = std::min(hi, g);
  };
  update(gp, rp);
  update(gc, rc);

  // Rational interpolation, with a bisection whenever three successive
  // iterates fall on the same side of the root.
  int streak = 0;
  bool last_side = rc > gc;
  for (int it = 0; it < 100; ++it) {
    if (std::abs(rc - gc) < 1e-12 * (1 + gc))
      return gc;
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi)
      return 0.5 * (lo + hi);

    double gn = 0.5 * (lo + hi);
    if (streak < 3) {
      const double ip = 1 / sqr(gp - s1), ic = 1 / sqr(gc - s1);
      const double d = (rc - rp) / (ic - ip);
      const double c = rc - d * ic;
      if (std::isfinite(d) && d > 0)
        gn = s1 + detail::special_cubic_root(s1 - c, d);
      if (!(gn > lo && gn < hi))
        gn = 0.5 * (lo + hi);
    } else {
      streak = 0;
    }

    gp = gc;
    rp = rc;
    gc = gn;
    rc = rho(gc);
    update(gc, rc);

    const bool side = rc > gc;
    streak = side == last_side ? streak + 1 : 0;
    last_side = side;
  }
  throw ConvergenceError("gamma_plus iteration cap exceeded");
}

/// Smallest solution of γ = λ_min(S(γ)), searched upward from λ_min(G0).
inline double gamma_minus(const RigidProblem &p, std::optional<double> upper = std::nullopt) {
  const double g0min = lambda_min(p.G0);
  const double gap = 2 * p.pole_gap();

  auto nudge = [&](double g) {
    for (int t = 0; t < 4 && pole_distance(p, g) < gap; ++t)
      g += 2 * gap;
    return g;
  };
  auto mu_min = [&](double g) {
    const SymEigen3 es = s_eigen(p, g);
    return std::pair<double, Vector3d>(es.values(2), es.vectors.col(2));
  };

  double g = nudge(g0min);
  auto [mu, u] = mu_min(g);
  double f = mu - g;
  if (f <= 1e-12 * (1 + std::abs(g)))
    return g;

  const double top = upper ? *upper : gamma_plus(p);
  const double step_max = std::max(top - g0min, 1e-12) / 256;
  auto fn = [&](double x) { return mu_min(x).first - x; };

  for (int it = 0; it < 100000; ++it) {
    const VectorXd inv3 = (g - p.sigma.array()).cube().inverse();
    const VectorXd wu = p.W * u;
    double dmu = 0;
    for (Index i = 0; i < wu.size(); ++i)
      dmu += -2 * wu(i) * wu(i) * inv3(i);
    // The floor keeps the march moving where S' is large near a pole;
    // overshooting the root is caught by the sign test below.
    const double step = std::clamp(f / (1 + std::abs(dmu)), 1e-3 * step_max, step_max);
    const double gn = nudge(g + std::max(step, 1e-15 * (1 + std::abs(g))));
    auto [mun, un] = mu_min(gn);
    const double fnv = mun - gn;
    if (fnv <= 0)
      return detail::refine_root(fn, g, gn, f, fnv);
    if (fnv < 1e-12 * (1 + std::abs(gn)))
      return gn;
    g = gn;
    mu = mun;
    u = un;
    f = fnv;
  }
  throw ConvergenceError("gamma_minus iteration cap exceeded");
}

/// λ₂(γ) = 1 inside (lo, hi); picks the sign change closest to hi.
inline std::optional<double> find_bifurcation(const RigidProblem &p, double lo, double hi) {
  lo = std::max(lo, 0.0);
  if (!(hi > lo))
    return std::nullopt;
  const double gap = 2 * p.pole_gap();
  auto h = [&](double g) { return scaled_lambdas(p, g)(1) - 1; };

  std::vector<double> mesh = detail::scan_mesh(lo, hi);
  double prev_g = std::numeric_limits<double>::quiet_NaN(), prev_h = 0;
  for (auto it = mesh.rbegin(); it != mesh.rend(); ++it) {
    const double g = *it;
    if (g <= 0 || pole_distance(p, g) < gap)
      continue;
    const double hv = h(g);
    if (!std::isfinite(hv))
      continue;
    if (!std::isnan(prev_g) && ((hv > 0) != (prev_h > 0) || hv == 0)) {
      double gb = detail::refine_root(h, g, prev_g, hv, prev_h);
      // Polish with the analytic derivative of λ₂.
      for (int k = 0; k < 3; ++k) {
        CurveFrame fr = curve_frame(p, gb);
        const Matrix3d s = s_matrix(p, gb);
        const Matrix3d qp = s_matrix_dgamma(p, gb) / gb - s / (gb * gb);
        const double r = fr.lambdas(1) - 1;
        if (r == 0)
          break;
        double d2;
        try {
          d2 = eig_derivative(s / gb, qp, fr.lambdas, fr.U).dlambda(1);
        } catch (const DegenerateSpectrumError &) {
          break;
        }
        const double gn = gb - r / d2;
        if (!(gn >= g && gn <= prev_g) || !(std::abs(h(gn)) < std::abs(r)))
          break;
        gb = gn;
      }
      return gb;
    }
    prev_g = g;
    prev_h = hv;
  }
  return std::nullopt;
}

/// Solution of λ₁(γ) + λ₂(γ) = 2 in (γ_b1, γ⁺).
inline double gamma2_plus(const RigidProblem &p, double gamma_b1, double gamma_plus_value) {
  const double gap = 2 * p.pole_gap();
  const double lo = std::max(gamma_b1, 0.0);
  const double hi = gamma_plus_value;
  if (!(hi > lo))
    return hi;
  auto h = [&](double g) {
    const Vector3d l = scaled_lambdas(p, g);
    return l(0) + l(1) - 2;
  };

  std::vector<double> mesh = detail::scan_mesh(lo, hi);
  mesh.push_back(hi);
  double prev_g = std::numeric_limits<double>::quiet_NaN(), prev_h = 0;
  for (auto it = mesh.rbegin(); it != mesh.rend(); ++it) {
    const double g = *it;
    if (g <= lo || pole_distance(p, g) < gap)
      continue;
    const double hv = h(g);
    if (!std::isfinite(hv))
      continue;
    if (!std::isnan(prev_g) && hv >= 0 && prev_h < 0)
      return detail::refine_root(h, g, prev_g, hv, prev_h);
    prev_g = g;
    prev_h = hv;
  }
  return hi;
}

inline GammaBounds compute_bounds(const RigidProblem &p) {
  GammaBounds b;
  const double s1 = p.sigma1();
  b.gamma1_low = std::max(s1, lambda_max(p.G0));
  b.gamma_plus = gamma_plus(p);
  b.gamma_minus = gamma_minus(p, b.gamma_plus);

  const double lo = std::max(s1, 0.0) + 2 * p.pole_gap();
  b.gamma_b = find_bifurcation(p, lo, b.gamma_plus);
  b.gamma_b1 = (b.gamma_b && *b.gamma_b > s1) ? *b.gamma_b : s1;
  b.gamma2_plus = gamma2_plus(p, b.gamma_b1, b.gamma_plus);
  return b;
}

}  // namespace rse
