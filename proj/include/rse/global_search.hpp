//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rse/cayley.hpp"
#include "rse/core.hpp"
#include "rse/inertial_geometry.hpp"
#include "rse/metric_gram.hpp"
#include "rse/newton_solvers.hpp"
#include "rse/parallel.hpp"
#include "rse/spectral_bounds.hpp"
#include "rse/strain_core.hpp"

namespace rse {

class NoSolutionError: public Error {
public:
  using Error::Error;
};

enum class RefineMethod { kCayley, kAngular };

struct SearchConfig {
  double delta_L = kPi / 6;
  std::optional<double> delta_theta;  // defaults to delta_L
  double eps_perp = 0.354;
  double densify_eccentricity = 0.1;
  double bifurcation_window = 1e-2;
  double dedup_rel_tol = 1e-6;
  double dedup_y_tol = 1e-5;
  bool refine_on_empty = true;
  int max_restarts = 3;
  RefineMethod method = RefineMethod::kCayley;
  unsigned threads = 1;  // 0 = hardware concurrency
  int max_mesh_points = 2000;  // per mesh segment
  std::size_t max_candidates = 200000;
  SolveOptions solve;

  double theta() const { return delta_theta.value_or(delta_L); }

  void validate() const {
    require(delta_L > 0 && delta_L <= kPi, "delta_L must lie in (0, pi]");
    require(theta() > 0, "delta_theta must be positive");
    require(eps_perp >= 0, "eps_perp must be non-negative");
    require(densify_eccentricity > 0 && bifurcation_window > 0, "densification parameters must be positive");
    require(dedup_rel_tol > 0 && dedup_y_tol > 0, "dedup tolerances must be positive");
    require(max_restarts >= 0 && max_mesh_points > 0, "invalid iteration limits");
  }
};

struct InertialPair {
  double gamma = 0;
  Vector3d r = Vector3d::Zero();
};

/// Approximate inertial solution: columns of R are r₁, r₂, r₃.
struct CandidateTriple {
  Vector3d gammas = Vector3d::Zero();
  Matrix3d R = Matrix3d::Identity();
};

struct GammaMeshes {
  std::vector<double> gamma1;   // descending
  std::vector<double> gamma23;  // descending
};

// ---------------------------------------------------------------------------
// Stage 1: γ meshes

namespace detail {
  inline double offset(double g) {
    return 1e-6 * std::max(std::abs(g), 1e-12);
  }

  inline bool mesh_usable(const RigidProblem &p, double g) {
    return g > 0 && pole_distance(p, g) > 2 * p.pole_gap() && curve_frame(p, g).intersects();
  }

  /// Bisects [a, b] for the edge of the set where curves exist; returns the
  /// point on the intersecting side.
  inline double intersection_edge(const RigidProblem &p, double a, double b, bool a_usable) {
    for (int it = 0; it < 60 && std::abs(b - a) > 1e-13 * std::max(std::abs(a), std::abs(b)); ++it) {
      const double m = 0.5 * (a + b);
      if (mesh_usable(p, m) == a_usable)
        a = m;
      else
        b = m;
    }
    return a_usable ? a : b;
  }

  /// Points from hi down to lo spaced so that the curve length changes by
  /// about ΔL between neighbours. Gaps without curves are scanned finely and
  /// their edges located by bisection.
  inline void mesh_segment(const RigidProblem &p, double hi, double lo, std::optional<double> gb,
                           const SearchConfig &cfg, std::vector<double> &out) {
    if (!(hi > lo))
      return;
    const double width = hi - lo;
    const double max_step = width / 4;
    // Finer than the endpoint offsets is not resolvable.
    const double min_step =
      std::min(max_step, std::max(1e-9 * width, 2e-7 * std::max(std::abs(hi), std::abs(lo))));
    const double scan_step = width / 256;
    const double win = gb ? cfg.bifurcation_window * std::abs(*gb) : 0;
    const double gap = 2 * p.pole_gap();

    double g = hi, last = scan_step;
    bool usable = mesh_usable(p, g);
    for (int count = 0; g > lo && count < cfg.max_mesh_points; ++count) {
      double step = scan_step;
      if (usable) {
        const CurveFrame fr = curve_frame(p, g);
        out.push_back(g);
        step = 0.5 * last;
        try {
          const double s = cfg.delta_L / std::abs(curve_length_dgamma(p, fr));
          if (std::isfinite(s) && s > 0)
            step = s;
        } catch (const Error &) {
        }
        const double ecc = fr.eccentricity();
        if (ecc < cfg.densify_eccentricity)
          step *= std::max(ecc / cfg.densify_eccentricity, 1e-3);
      }
      if (gb && std::abs(g - *gb) < win)
        step = std::min(step, win / 8);
      // Geometric approach to the singular end of the segment and to poles.
      if (g - lo < 0.05 * width)
        step = std::max(step, 0.2 * (g - lo));
      if (hi - g < 0.05 * width)
        step = std::max(step, 0.1 * (hi - g));
      const double pd = pole_distance(p, g);
      if (pd < 0.05 * width)
        step = std::max(step, 0.1 * pd);
      step = std::clamp(step, min_step, usable ? max_step : scan_step);
      last = step;

      double next = g - step;
      if (next <= lo)
        break;
      const bool next_usable = mesh_usable(p, next);
      if (next_usable != usable) {
        const double edge = intersection_edge(p, g, next, usable);
        if (usable && edge < g && (edge > next))
          out.push_back(edge);  // curve vanishes below this point
        else if (!usable)
          next = edge;          // curve appears here
      }
      g = next;
      usable = next_usable;
    }
    if (pole_distance(p, lo) > gap && lo > 0 && curve_frame(p, lo).intersects() &&
        (out.empty() || out.back() - lo > min_step))
      out.push_back(lo);
  }
}  // namespace detail

inline GammaMeshes discretize_gamma(const RigidProblem &p, const GammaBounds &b,
                                    const SearchConfig &cfg) {
  GammaMeshes m;

  // γ₁ ∈ (γ1_low, γ⁺], split at the bifurcation point. The end offsets shrink
  // with the interval so that a narrow one still gets points.
  const double top = b.gamma_plus, low = b.gamma1_low;
  const double span = top - low;
  auto off = [&](double g) { return std::min(detail::offset(g), 0.1 * span); };
  if (!(span > 0)) {
    if (top > 0 && pole_distance(p, top) > 2 * p.pole_gap() && curve_frame(p, top).intersects())
      m.gamma1.push_back(top);
  } else if (b.gamma_b && *b.gamma_b - off(*b.gamma_b) > low + off(low) &&
             *b.gamma_b + off(*b.gamma_b) < top - off(top)) {
    const double gb = *b.gamma_b;
    detail::mesh_segment(p, top - off(top), gb + off(gb), gb, cfg, m.gamma1);
    detail::mesh_segment(p, gb - off(gb), low + off(low), gb, cfg, m.gamma1);
  } else {
    detail::mesh_segment(p, top - off(top), low + off(low), b.gamma_b, cfg, m.gamma1);
  }

  // γ₂, γ₃ ∈ (γ⁻, γ₂⁺], split at every pole inside.
  const double a0 = b.gamma_minus, b0 = b.gamma2_plus;
  if (b0 > a0) {
    std::vector<double> cuts { b0 };
    for (Index i = 0; i < p.sigma.size(); ++i)
      if (p.sigma(i) > a0 && p.sigma(i) < b0)
        cuts.push_back(p.sigma(i));
    cuts.push_back(a0);
    std::sort(cuts.begin(), cuts.end(), std::greater<>());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double hi = c == 0 ? cuts[c] : cuts[c] - detail::offset(cuts[c]);
      const double lo = cuts[c + 1] + detail::offset(cuts[c + 1]);
      if (!(hi > lo))
        continue;
      std::optional<double> gb;
      try {
        gb = find_bifurcation(p, lo, hi);
      } catch (const Error &) {
      }
      detail::mesh_segment(p, hi, lo, gb, cfg, m.gamma23);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Stage 2: curve sampling and elimination

/// Curve parameters with roughly uniform spherical spacing Δθ, arranged with
/// the double symmetry of the curve.
inline std::vector<double> discretize_psi(const CurveFrame &fr, double delta_theta) {
  require(fr.intersects(), "discretize_psi needs an intersection curve");
  require(delta_theta > 0, "delta_theta must be positive");
  if (std::max(fr.beta_i, fr.beta_j) <= 0)
    return { 0.0 };

  // March from the end with the larger arc speed; from π/2 the walk runs on
  // the mirrored variable t = π/2 − ψ.
  const bool from_top = fr.beta_i > fr.beta_j;
  auto speed = [&](double t) { return arc_speed(fr, from_top ? kPi / 2 - t : t); };

  std::vector<double> steps;
  double t = 0;
  while (t < kPi / 2 && steps.size() < 100000) {
    const double sp = speed(t);
    double d = sp > 0 ? delta_theta / sp : kPi / 2;
    if (!std::isfinite(d) || d <= 0)
      d = kPi / 2;
    steps.push_back(d);
    t += d;
  }
  const double eta = (kPi / 2) / t;

  const std::size_t k = steps.size();
  std::vector<double> quarter(k + 1);
  quarter[0] = 0;
  for (std::size_t i = 0; i < k; ++i)
    quarter[i + 1] = quarter[i] + steps[i] * eta;
  quarter[k] = kPi / 2;
  if (from_top) {
    for (double &q: quarter)
      q = kPi / 2 - q;
    std::reverse(quarter.begin(), quarter.end());
    quarter[0] = 0;
  }

  std::vector<double> out;
  out.reserve(4 * k);
  for (std::size_t i = 0; i <= k; ++i)
    out.push_back(quarter[i]);
  for (std::size_t i = k; i-- > 0;)
    out.push_back(kPi - quarter[i]);
  for (std::size_t i = 1; i <= k; ++i)
    out.push_back(kPi + quarter[i]);
  for (std::size_t i = k; i-- > 1;)
    out.push_back(2 * kPi - quarter[i]);
  return out;
}

/// Orthonormal N = [n₁, n₂] completing r to a proper frame [r, n₁, n₂],
/// from the Householder reflector pivoted on the largest component of r.
inline Eigen::Matrix<double, 3, 2> orthonormal_completion(const Vector3d &r) {
  Index piv;
  r.cwiseAbs().maxCoeff(&piv);
  Vector3d v = r;
  v(piv) += r(piv) >= 0 ? 1.0 : -1.0;
  const Matrix3d h = Matrix3d::Identity() - 2 * v * v.transpose() / v.squaredNorm();
  Eigen::Matrix<double, 3, 2> n;
  int c = 0;
  for (int q = 0; q < 3; ++q)
    if (q != piv)
      n.col(c++) = h.col(q);
  Matrix3d f;
  f << r, n;
  if (f.determinant() < 0)
    n.col(1) = -n.col(1);
  return n;
}

/// In-plane points of the intersection of the plane spanned by n with the
/// curve at γ_t. Writes 0, 1 or 2 unit vectors.
inline int plane_intersections(const Matrix3d &st, const Eigen::Matrix<double, 3, 2> &n,
                               Vector3d out[2]) {
  const Eigen::Matrix2d m2 = n.transpose() * st * n;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (m2 + m2.transpose()));
  const double mu_min = es.eigenvalues()(0), mu_max = es.eigenvalues()(1);
  if (!(mu_min <= 1 && 1 <= mu_max))
    return 0;
  const Eigen::Vector2d pmin = es.eigenvectors().col(0), pmax = es.eigenvectors().col(1);
  const double d = mu_max - mu_min;
  if (d < 1e-14) {
    out[0] = n * pmin;
    out[1] = n * pmax;
    return 2;
  }
  // t = a p_min + b p_max with a² + b² = 1 and μ_min a² + μ_max b² = 1.
  const double a = std::sqrt(std::max(0.0, (mu_max - 1) / d));
  const double b = std::sqrt(std::max(0.0, (1 - mu_min) / d));
  out[0] = n * (a * pmin + b * pmax);
  if (b == 0 || a == 0)
    return 1;
  out[1] = n * (a * pmin - b * pmax);
  return 2;
}

namespace detail {
  /// S(γ_t)/γ_t for every mesh point; invalid entries are flagged.
  struct Gamma23Table {
    std::vector<double> gamma;
    std::vector<Matrix3d> scaled;
    std::vector<char> valid;
  };

  inline Gamma23Table make_table(const RigidProblem &p, const std::vector<double> &mesh) {
    Gamma23Table t;
    t.gamma = mesh;
    t.scaled.resize(mesh.size());
    t.valid.assign(mesh.size(), 0);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      const double g = mesh[i];
      if (g <= 0 || pole_distance(p, g) <= p.pole_gap())
        continue;
      t.scaled[i] = ellipsoid_matrix_unchecked(p, g, g) / g;
      t.valid[i] = 1;
    }
    return t;
  }

  inline void candidates_from_table(const RigidProblem &p, double gamma1, const Vector3d &r1,
                                    const Gamma23Table &t, double eps_perp,
                                    std::vector<InertialPair> &out) {
    const auto n = orthonormal_completion(r1);
    for (std::size_t i = 0; i < t.gamma.size(); ++i) {
      if (!t.valid[i])
        continue;
      Vector3d pts[2];
      const int cnt = plane_intersections(t.scaled[i], n, pts);
      if (cnt == 0)
        continue;
      const Matrix3d sb = ellipsoid_matrix_unchecked(p, gamma1, t.gamma[i]);
      const double bound = eps_perp * norm1(sb);
      const Vector3d sr = sb.transpose() * r1;
      for (int c = 0; c < cnt; ++c)
        if (std::abs(sr.dot(pts[c])) < bound)
          out.push_back({ t.gamma[i], pts[c] });
    }
  }
}  // namespace detail

/// Inertial pairs (γ_t, r_t) that solve their quadratic equation exactly,
/// lie in the plane orthogonal to r₁ and pass the bilinear screen.
inline std::vector<InertialPair> candidates_for_r1(const RigidProblem &p, double gamma1,
                                                   const Vector3d &r1,
                                                   const std::vector<double> &gamma23_mesh,
                                                   const SearchConfig &cfg) {
  check_pole(p, gamma1);
  std::vector<InertialPair> out;
  detail::candidates_from_table(p, gamma1, r1, detail::make_table(p, gamma23_mesh), cfg.eps_perp,
                                out);
  return out;
}

/// Pairs of list entries that are nearly orthogonal and nearly satisfy the
/// last bilinear equation, completed with (γ₁, r₁).
inline std::vector<CandidateTriple> assemble_triples(const RigidProblem &p,
                                                     const std::vector<InertialPair> &temp,
                                                     const InertialPair &first,
                                                     const SearchConfig &cfg) {
  std::vector<CandidateTriple> out;
  for (std::size_t a = 0; a < temp.size(); ++a) {
    for (std::size_t b = a + 1; b < temp.size(); ++b) {
      if (!(std::abs(temp[a].r.dot(temp[b].r)) < cfg.eps_perp))
        continue;
      const InertialPair &hi = temp[a].gamma >= temp[b].gamma ? temp[a] : temp[b];
      const InertialPair &lo = temp[a].gamma >= temp[b].gamma ? temp[b] : temp[a];
      const Matrix3d sb = ellipsoid_matrix_unchecked(p, hi.gamma, lo.gamma);
      if (!(std::abs(hi.r.dot(sb * lo.r)) < cfg.eps_perp * norm1(sb)))
        continue;
      CandidateTriple t;
      t.gammas = Vector3d(first.gamma, hi.gamma, lo.gamma);
      t.R << first.r, hi.r, lo.r;
      out.push_back(t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stages 3 and 4

struct SearchStats {
  GammaBounds bounds;
  std::size_t gamma1_points = 0;
  std::size_t gamma23_points = 0;
  std::size_t r1_points = 0;
  std::size_t candidates = 0;
  std::size_t converged = 0;
  std::size_t distinct = 0;
  std::size_t rejected = 0;
  bool truncated = false;
  int restarts = 0;
  double eps_perp = 0;
  double delta_L = 0;
  double delta_theta = 0;
  double bounds_ms = 0;
  double mesh_ms = 0;
  double candidates_ms = 0;
  double refine_ms = 0;
  double total_ms = 0;
};

struct SearchResult {
  std::vector<CriticalMatrix> minima;  // ascending strain
  SearchStats stats;

  bool found() const { return !minima.empty(); }
  const CriticalMatrix &best() const {
    require(found(), "search found no critical point");
    return minima.front();
  }
};

namespace detail {
  using Clock = std::chrono::steady_clock;

  inline double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  }

  inline std::optional<CriticalMatrix> refine_triple(const RigidProblem &p,
                                                     const CandidateTriple &t,
                                                     const SearchConfig &cfg) {
    try {
      InertialSolution init { t.gammas, t.R };
      InertialResult r;
      const char *src = "cayley";
      if (cfg.method == RefineMethod::kCayley) {
        r = cayley_newton(p, init, cfg.solve);
      } else {
        src = "angular";
        auto q = angular_start(p, init);
        if (!q)
          return std::nullopt;
        r = angular_newton(p, *q, cfg.solve);
      }
      if (r.status != SolveStatus::kConverged)
        return std::nullopt;
      CriticalMatrix cm = critical_from_inertial(p, r.solution, src, r.iterations);
      if (!cm.Y.allFinite())
        return std::nullopt;
      return cm;
    } catch (const Error &) {
      return std::nullopt;
    }
  }

  inline bool same_critical(const CriticalMatrix &a, const CriticalMatrix &b,
                            const SearchConfig &cfg) {
    const double fa = a.strain_value, fb = b.strain_value;
    if (std::abs(fa - fb) >= cfg.dedup_rel_tol * (1 + std::max(std::abs(fa), std::abs(fb))))
      return false;
    return (a.Y - b.Y).norm() < cfg.dedup_y_tol * (1 + a.Y.norm());
  }

  inline void dedup(std::vector<CriticalMatrix> &list, const SearchConfig &cfg) {
    std::vector<CriticalMatrix> out;
    for (auto &c: list) {
      bool dup = false;
      for (const auto &d: out)
        dup = dup || same_critical(c, d, cfg);
      if (!dup)
        out.push_back(std::move(c));
    }
    list.swap(out);
  }

  /// Tolerance on ‖Φ(Y)‖_F for a returned critical matrix.
  inline double soundness_tol(const RigidProblem &p, const SearchConfig &cfg) {
    return 10 * cfg.solve.residual_tol * (1 + p.V.norm());
  }

  /// A few undamped full-variable Newton steps to tighten ‖Φ‖.
  inline void polish(const RigidProblem &p, CriticalMatrix &cm, const SearchConfig &cfg) {
    SolveOptions o = cfg.solve;
    o.max_iters = 8;
    o.n_damp = 0;
    try {
      NKResult r = newton_kantorovitch(p, cm.Y, o);
      if (r.cm.Y.allFinite() && r.cm.residual_norm < cm.residual_norm) {
        const std::string src = cm.source;
        const int it = cm.iterations;
        cm = r.cm;
        cm.source = src;
        cm.iterations = it;
      }
    } catch (const Error &) {
    }
  }

  struct Attempt {
    std::vector<CriticalMatrix> minima;
    SearchStats stats;
  };

  inline Attempt run_attempt(const RigidProblem &p, const GammaBounds &b, const SearchConfig &cfg) {
    Attempt at;
    SearchStats &st = at.stats;
    st.bounds = b;
    st.eps_perp = cfg.eps_perp;
    st.delta_L = cfg.delta_L;
    st.delta_theta = cfg.theta();

    auto t0 = Clock::now();
    const GammaMeshes meshes = discretize_gamma(p, b, cfg);
    st.gamma1_points = meshes.gamma1.size();
    st.gamma23_points = meshes.gamma23.size();
    st.mesh_ms = ms_since(t0);

    t0 = Clock::now();
    const Gamma23Table table = make_table(p, meshes.gamma23);
    const std::size_t n1 = meshes.gamma1.size();
    // γ₁ points are processed in blocks and merged in mesh order, stopping
    // once the candidate cap is reached; the kept set does not depend on the
    // thread count.
    std::vector<CandidateTriple> triples;
    const std::size_t block = std::max<unsigned>(1, resolve_threads(cfg.threads));
    for (std::size_t start = 0; start < n1 && !st.truncated; start += block) {
      const std::size_t stop = std::min(n1, start + block);
      std::vector<std::vector<CandidateTriple>> per(stop - start);
      std::vector<std::size_t> r1count(stop - start, 0);
      parallel_for(stop - start, cfg.threads, [&](std::size_t k) {
        const double g1 = meshes.gamma1[start + k];
        const CurveFrame fr = curve_frame(p, g1);
        if (!fr.intersects())
          return;
        const std::vector<double> psis = discretize_psi(fr, cfg.theta());
        std::vector<InertialPair> temp;
        for (double psi: psis) {
          const Vector3d r1 = curve_point(fr, psi);
          temp.clear();
          candidates_from_table(p, g1, r1, table, cfg.eps_perp, temp);
          auto tr = assemble_triples(p, temp, { g1, r1 }, cfg);
          per[k].insert(per[k].end(), tr.begin(), tr.end());
          ++r1count[k];
          if (per[k].size() > cfg.max_candidates)
            break;
        }
      });
      for (std::size_t k = 0; k < per.size() && !st.truncated; ++k) {
        st.r1_points += r1count[k];
        triples.insert(triples.end(), per[k].begin(), per[k].end());
        if (triples.size() > cfg.max_candidates) {
          triples.resize(cfg.max_candidates);
          st.truncated = true;
        }
      }
    }
    st.candidates = triples.size();
    st.candidates_ms = ms_since(t0);

    t0 = Clock::now();
    std::vector<std::optional<CriticalMatrix>> refined(triples.size());
    parallel_for(triples.size(), cfg.threads,
                 [&](std::size_t i) { refined[i] = refine_triple(p, triples[i], cfg); });
    std::vector<CriticalMatrix> conv;
    for (auto &r: refined)
      if (r)
        conv.push_back(std::move(*r));
    st.converged = conv.size();

    dedup(conv, cfg);
    const double sound = soundness_tol(p, cfg);
    parallel_for(conv.size(), cfg.threads, [&](std::size_t i) {
      if (conv[i].residual_norm >= 1e-3 * sound)
        polish(p, conv[i], cfg);
    });
    std::vector<CriticalMatrix> ok;
    for (auto &c: conv) {
      if (c.residual_norm < sound)
        ok.push_back(std::move(c));
      else
        ++st.rejected;
    }
    dedup(ok, cfg);
    std::stable_sort(ok.begin(), ok.end(), [](const CriticalMatrix &a, const CriticalMatrix &b) {
      return a.strain_value < b.strain_value;
    });
    st.distinct = ok.size();
    st.refine_ms = ms_since(t0);
    at.minima = std::move(ok);
    return at;
  }
}  // namespace detail

/// Full search. Returns an empty list when every restart fails.
inline SearchResult global_search(const RigidProblem &p, const SearchConfig &config = {}) {
  config.validate();
  const auto t0 = detail::Clock::now();
  const GammaBounds b = compute_bounds(p);
  const double bounds_ms = detail::ms_since(t0);

  SearchConfig cfg = config;
  SearchResult res;
  for (int attempt = 0;; ++attempt) {
    detail::Attempt at = detail::run_attempt(p, b, cfg);
    at.stats.restarts = attempt;
    res.minima = std::move(at.minima);
    res.stats = at.stats;
    const bool empty = res.stats.candidates == 0 || res.stats.converged == 0 || res.minima.empty();
    if (!empty || !cfg.refine_on_empty || attempt >= cfg.max_restarts)
      break;
    cfg.eps_perp *= 0.5;
    cfg.delta_theta = cfg.theta() * 0.5;
    cfg.delta_L *= 0.5;
  }
  res.stats.bounds_ms = bounds_ms;
  res.stats.total_ms = detail::ms_since(t0);
  return res;
}

/// Global minimum search; throws NoSolutionError when restarts are exhausted.
inline SearchResult global_minimize(const RigidProblem &p, const SearchConfig &config = {}) {
  SearchResult r = global_search(p, config);
  if (!r.found())
    throw NoSolutionError("no critical point found after " + std::to_string(r.stats.restarts) +
                          " restarts");
  return r;
}

// ---------------------------------------------------------------------------

/// Cheap starting matrix for standalone Newton–Kantorovitch.
inline MatrixX3d initial_guess(const RigidProblem &p) {
  const Index n = p.N();
  const double g0n = norm1(p.G0);
  const double gm = gamma_minus(p);
  if (p.V.norm() == 0 || g0n < 0.1 * gm)
    return classic_embed(p.C);

  const double l0 = lambda_min(p.G0);
  if (norm1(p.C) < 0.1 * l0) {
    require(l0 > 0, "G0 is singular");
    return p.V * p.G0.inverse();
  }

  // Embed the joint Gram estimate and rotate it onto X.
  const Index m = p.M();
  MatrixXd g(m + n, m + n);
  g.topLeftCorner(m, m) = p.X * p.X.transpose();
  g.topRightCorner(m, n) = p.B;
  g.bottomLeftCorner(n, m) = p.B.transpose();
  g.bottomRightCorner(n, n) = p.C;
  const MatrixX3d e = classic_embed(g);
  const Matrix3d h = e.topRows(m).transpose() * p.X;
  Eigen::JacobiSVD<Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3d q = svd.matrixU() * svd.matrixV().transpose();

  std::vector<MatrixX3d> cands { e.bottomRows(n) * q, MatrixX3d::Zero(n, 3) };
  if (l0 > 1e-12 * (1 + g0n))
    cands.push_back(p.V * p.G0.inverse());
  MatrixX3d best = cands[0];
  double fbest = strain(p, best);
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double f = strain(p, cands[i]);
    if (f < fbest) {
      fbest = f;
      best = cands[i];
    }
  }
  return best;
}

}  // namespace rse
