//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace rse {

struct QuadratureResult {
  double value = 0;
  double error = 0;
  int halvings = 0;
  bool converged = false;
};

/// Romberg integration of f over [a, b]. Stops when two successive diagonal
/// extrapolants agree within abs_tol, after at least min_halvings.
template <class F>
QuadratureResult romberg(F &&f, double a, double b, double abs_tol = 1e-10,
                         int max_halvings = 12, int min_halvings = 3) {
  constexpr int kMax = 32;
  max_halvings = std::min(max_halvings, kMax - 1);

  std::array<double, kMax> prev {}, cur {};
  const double h0 = b - a;
  prev[0] = 0.5 * h0 * (f(a) + f(b));

  QuadratureResult res;
  res.value = prev[0];
  long n = 1;
  for (int k = 1; k <= max_halvings; ++k) {
    const double h = h0 / static_cast<double>(2 * n);
    double sum = 0;
    for (long m = 0; m < n; ++m)
      sum += f(a + static_cast<double>(2 * m + 1) * h);
    cur[0] = 0.5 * prev[0] + h * sum;
    n *= 2;

    double p4 = 1;
    for (int j = 1; j <= k; ++j) {
      p4 *= 4;
      cur[j] = cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (p4 - 1);
    }

    res.error = std::abs(cur[k] - prev[k - 1]);
    res.value = cur[k];
    res.halvings = k;
    if (k >= min_halvings && res.error <= abs_tol) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  return res;
}

/// Romberg integration after applying the endpoint-clustering map
/// m(t) = t - sin(2πt)/2π twice, so that x - a grows like t⁹ near each end.
/// Suited to integrands with a thin layer at an endpoint.
template <class F>
QuadratureResult romberg_clustered(F &&f, double a, double b, double abs_tol = 1e-10,
                                   int max_halvings = 12, int min_halvings = 3) {
  constexpr double kTwoPi = 6.283185307179586;
  const double w = b - a;
  auto m = [](double t) { return t - std::sin(kTwoPi * t) / kTwoPi; };
  auto dm = [](double t) { return 1 - std::cos(kTwoPi * t); };
  auto g = [&](double t) {
    const double u = m(t);
    const double jac = dm(u) * dm(t);
    if (jac == 0)
      return 0.0;
    return w * jac * f(a + w * m(u));
  };
  return romberg(g, 0.0, 1.0, abs_tol, max_halvings, min_halvings);
}

}  // namespace rse
