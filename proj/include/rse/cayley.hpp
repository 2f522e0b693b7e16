//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <limits>

#include "rse/core.hpp"

namespace rse {

class CayleySingularityError: public Error {
public:
  using Error::Error;
};

inline Matrix3d skew(const Vector3d &w) {
  Matrix3d o;
  o << 0, -w(2), w(1),  //
      w(2), 0, -w(0),   //
      -w(1), w(0), 0;
  return o;
}

inline Vector3d unskew(const Matrix3d &o) {
  return { o(2, 1), o(0, 2), o(1, 0) };
}

/// R = (I − Ω)(I + Ω)⁻¹.
inline Matrix3d rotation_from_cayley(const Vector3d &omega) {
  const Matrix3d o = skew(omega);
  const Matrix3d ip = Matrix3d::Identity() + o;
  return (Matrix3d::Identity() - o) * ip.inverse();
}

/// Inverse transform; the result is skew-symmetrized so that approximately
/// orthogonal input still maps to an exact rotation.
inline Vector3d cayley_from_rotation(const Matrix3d &r) {
  if (r.trace() < -1 + 1e-10)
    throw CayleySingularityError("rotation by pi has no Cayley parameters");
  const Matrix3d ip = Matrix3d::Identity() + r;
  const Matrix3d ot = (Matrix3d::Identity() - r) * ip.inverse();
  return unskew(0.5 * (ot - ot.transpose()));
}

/// ∂R/∂ω_m = −2 (I + Ω)⁻¹ Δ_m (I + Ω)⁻¹.
inline std::array<Matrix3d, 3> rotation_dcayley(const Vector3d &omega) {
  const Matrix3d inv = (Matrix3d::Identity() + skew(omega)).inverse();
  std::array<Matrix3d, 3> d;
  for (int m = 0; m < 3; ++m)
    d[m] = -2 * inv * skew(Vector3d::Unit(m)) * inv;
  return d;
}

/// Chooses the column signs giving a proper rotation of maximal trace.
inline Matrix3d orient_columns(const Matrix3d &raw) {
  const bool proper = raw.determinant() > 0;
  static constexpr int even[4][3] = {
    {  1,  1,  1 },
    {  1, -1, -1 },
    { -1,  1, -1 },
    { -1, -1,  1 },
  };
  static constexpr int odd[4][3] = {
    { -1, -1, -1 },
    { -1,  1,  1 },
    {  1, -1,  1 },
    {  1,  1, -1 },
  };
  const auto &pats = proper ? even : odd;

  Matrix3d best = raw;
  double best_tr = -std::numeric_limits<double>::infinity();
  for (const auto &s: pats) {
    Matrix3d c = raw;
    for (int k = 0; k < 3; ++k)
      c.col(k) *= s[k];
    if (c.trace() > best_tr) {
      best_tr = c.trace();
      best = c;
    }
  }
  return best;
}

}  // namespace rse
