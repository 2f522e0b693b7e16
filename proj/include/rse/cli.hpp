//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rse/global_search.hpp"
#include "rse/inertial_geometry.hpp"
#include "rse/io.hpp"
#include "rse/metric_gram.hpp"
#include "rse/parallel.hpp"
#include "rse/problem_gen.hpp"

namespace rse::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kNoSolution = 4,
};

/// Worker count: the request (0 = auto) capped by RSE_THREADS when set.
inline unsigned thread_count(unsigned requested) {
  unsigned t = resolve_threads(requested);
  if (const char *env = std::getenv("RSE_THREADS")) {
    char *end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0')
      t = std::min(t, resolve_threads(static_cast<unsigned>(cap)));
  }
  return t;
}

namespace detail {
  inline void emit(const std::string &path, const std::string &content, std::ostream &out) {
    if (path.empty() || path == "-")
      out << content;
    else
      io::write_text_atomic(path, content);
  }

  inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    if (n == 1)
      return { a };
    for (int i = 0; i < n; ++i)
      v.push_back(a + (b - a) * i / (n - 1));
    return v;
  }

  inline std::string csv_num(double v) {
    if (!std::isfinite(v))
      return "nan";
    return io::format_double(v);
  }
}  // namespace detail

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  Index m = 0, n = 0;
  double sxy = 0;
  std::optional<double> eps, eps_b, eps_c;
  std::uint64_t seed = 1;
  std::string x_file, y_file, perturb = "multiplicative";
  std::string out;
};

inline int cmd_generate(const GenerateArgs &a, std::ostream &out) {
  const double eb = a.eps_b.value_or(a.eps.value_or(0)), ec = a.eps_c.value_or(a.eps.value_or(0));
  GeneratedProblem g;
  if (!a.x_file.empty() || !a.y_file.empty()) {
    if (a.x_file.empty() || a.y_file.empty())
      throw InvalidArgument("--x-coords and --y-coords go together");
    Perturbation pert;
    if (a.perturb == "none")
      pert.kind = PerturbKind::kNone;
    else if (a.perturb == "chemical")
      pert.kind = PerturbKind::kChemical;
    else
      pert = { PerturbKind::kMultiplicative, eb, ec };
    g = problem_from_coordinates(io::parse_coordinates(io::read_text(a.x_file), a.x_file),
                                 io::parse_coordinates(io::read_text(a.y_file), a.y_file), pert,
                                 a.seed);
  } else {
    if (a.m <= 0 || a.n <= 0)
      throw InvalidArgument("--m and --n are required");
    g = random_problem(a.m, a.n, a.sxy, eb, ec, a.seed);
  }
  io::ProblemFile f = io::problem_file(g);
  if (!a.x_file.empty())
    f.meta["perturb"] = a.perturb;
  detail::emit(a.out, io::to_json(f).dump(1) + "\n", out);
  return kOk;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::string problem;
  std::string out, coords;
  std::optional<double> delta_l, delta_theta, eps_perp;
  std::optional<int> max_restarts;
  std::string method = "cayley";
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

inline int cmd_solve(const SolveArgs &a, std::ostream &out, std::ostream &err) {
  const io::ProblemFile f = io::read_problem(a.problem);
  const RigidProblem p = f.problem();
  SearchConfig cfg;
  if (a.delta_l)
    cfg.delta_L = *a.delta_l;
  if (a.delta_theta)
    cfg.delta_theta = *a.delta_theta;
  if (a.eps_perp)
    cfg.eps_perp = *a.eps_perp;
  if (a.max_restarts)
    cfg.max_restarts = *a.max_restarts;
  cfg.method = a.method == "angular" ? RefineMethod::kAngular : RefineMethod::kCayley;
  cfg.threads = thread_count(a.threads);

  const SearchResult r = global_search(p, cfg);
  io::Report rep = io::make_report(r, f.Y_true);
  json j = io::to_json(rep);
  j["parameters"]["seed"] = a.seed;
  j["parameters"]["method"] = a.method;
  detail::emit(a.out, j.dump(1) + "\n", out);
  if (!r.found()) {
    err << "rse solve: no critical point found after " << r.stats.restarts << " restarts ("
        << r.stats.candidates << " candidates, " << r.stats.converged << " converged)\n";
    return kNoSolution;
  }
  if (!a.coords.empty())
    io::write_text_atomic(a.coords, io::format_coordinates(r.best().Y));
  return kOk;
}

// ---------------------------------------------------------------------------
// embed

struct EmbedArgs {
  std::string in, masses, out;
};

inline int cmd_embed(const EmbedArgs &a, std::ostream &out) {
  const MatrixXd d = checked_symmetric(io::parse_square_matrix(io::read_text(a.in), a.in));
  VectorXd m = VectorXd::Ones(d.rows());
  if (!a.masses.empty()) {
    const auto rows = io::parse_rows(io::read_text(a.masses), a.masses);
    std::vector<double> vals;
    for (const auto &r: rows)
      vals.insert(vals.end(), r.begin(), r.end());
    if (static_cast<Index>(vals.size()) != d.rows())
      throw InvalidArgument("mass count does not match the matrix order");
    m = Eigen::Map<VectorXd>(vals.data(), d.rows());
    for (double x: vals)
      if (!(x >= 0))
        throw InvalidArgument("masses must be non-negative");
  }
  const MatrixX3d x = classic_embed(gram_from_squared_distances(d, m));
  detail::emit(a.out, io::format_coordinates(x), out);
  return kOk;
}

// ---------------------------------------------------------------------------
// curves

struct CurvesArgs {
  std::string problem, out;
  std::optional<double> gamma_min, gamma_max;
  int points = 200;
};

inline std::string curves_csv(const RigidProblem &p, const std::vector<double> &grid) {
  std::ostringstream ss;
  ss << "gamma,lambda1,lambda2,lambda3,beta_i,beta_j,axis_k,L,dL_dgamma,flag\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double g: grid) {
    ss << detail::csv_num(g) << ',';
    if (g <= 0 || pole_distance(p, g) <= p.pole_gap()) {
      ss << "nan,nan,nan,nan,nan,nan,nan,nan," << (g <= 0 ? "nonpositive" : "pole") << '\n';
      continue;
    }
    const CurveFrame fr = curve_frame(p, g);
    ss << detail::csv_num(fr.lambdas(0)) << ',' << detail::csv_num(fr.lambdas(1)) << ','
       << detail::csv_num(fr.lambdas(2)) << ',';
    if (!fr.intersects()) {
      ss << "nan,nan,nan,0,nan,no_intersection\n";
      continue;
    }
    double len = nan, dl = nan;
    std::string flag = fr.near_bifurcation ? "bifurcation" : "ok";
    try {
      len = curve_length(fr);
      dl = curve_length_dgamma(p, fr);
    } catch (const Error &) {
      flag = "singular";
    }
    ss << detail::csv_num(fr.beta_i) << ',' << detail::csv_num(fr.beta_j) << ',' << fr.axis_k << ','
       << detail::csv_num(len) << ',' << detail::csv_num(dl) << ',' << flag << '\n';
  }
  return ss.str();
}

inline int cmd_curves(const CurvesArgs &a, std::ostream &out) {
  if (a.points < 1)
    throw InvalidArgument("--points must be positive");
  const RigidProblem p = io::read_problem(a.problem).problem();
  double lo, hi;
  if (a.gamma_min && a.gamma_max) {
    lo = *a.gamma_min;
    hi = *a.gamma_max;
  } else {
    const GammaBounds b = compute_bounds(p);
    lo = a.gamma_min.value_or(b.gamma_minus);
    hi = a.gamma_max.value_or(1.05 * b.gamma_plus);
  }
  if (!(hi >= lo))
    throw InvalidArgument("empty gamma range");
  detail::emit(a.out, curves_csv(p, detail::linspace(lo, hi, a.points)), out);
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchClass {
  double eps_pct = 0;
  Index m = 0, n = 0;
  double sxy = 0;
};

/// The 27 classes of the random benchmark: ε × (M, N) × s_XY.
inline std::vector<BenchClass> table1_classes() {
  std::vector<BenchClass> out;
  for (double e: { 0.5, 5.0, 50.0 })
    for (auto mn: { std::pair<Index, Index> { 50, 10 }, { 30, 30 }, { 10, 50 } })
      for (double s: { 0.0, 0.5, 1.0 })
        out.push_back({ e, mn.first, mn.second, s });
  return out;
}

inline BenchClass parse_class(const std::string &text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception &) {
      throw InvalidArgument("bad --class '" + text + "'");
    }
  }
  if (v.size() != 4)
    throw InvalidArgument("--class expects eps_pct:M:N:s_xy");
  return { v[0], static_cast<Index>(v[1]), static_cast<Index>(v[2]), v[3] };
}

struct BenchRow {
  BenchClass cls;
  int trials = 0;
  int failures = 0;
  double gamma1 = 0, gamma23 = 0, r1 = 0, candidates = 0, converged = 0, distinct = 0;
  double min_strain = 0, time_ms = 0;
  std::vector<std::size_t> distinct_per_trial;
  std::vector<double> min_strain_per_trial;
};

/// Instances of one (M, N, s_XY) geometry share seeds across ε, so the
/// perturbation levels compare paired draws.
inline std::uint64_t bench_seed(std::uint64_t base, const BenchClass &c, int trial) {
  const std::uint64_t geom = static_cast<std::uint64_t>(c.m) * 1000003u +
                             static_cast<std::uint64_t>(c.n) * 1009u +
                             static_cast<std::uint64_t>(std::llround(c.sxy * 100));
  return base * 1000000007ull + geom * 101u + static_cast<std::uint64_t>(trial);
}

inline std::vector<BenchRow> run_bench(const std::vector<BenchClass> &classes, int trials,
                                       std::uint64_t seed, unsigned threads,
                                       const SearchConfig &base_cfg = {}) {
  struct Job {
    std::size_t cls;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (int t = 0; t < trials; ++t)
      jobs.push_back({ c, t });
  std::vector<SearchResult> res(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const BenchClass &c = classes[jobs[i].cls];
    const double eps = c.eps_pct / 100;
    const GeneratedProblem g = random_problem(c.m, c.n, c.sxy, eps, eps, bench_seed(seed, c, jobs[i].trial));
    SearchConfig cfg = base_cfg;
    cfg.threads = 1;
    res[i] = global_search(g.problem, cfg);
  });

  std::vector<BenchRow> rows(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c)
    rows[c].cls = classes[c];
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    BenchRow &r = rows[jobs[i].cls];
    const SearchStats &s = res[i].stats;
    ++r.trials;
    r.gamma1 += s.gamma1_points;
    r.gamma23 += s.gamma23_points;
    r.r1 += s.r1_points;
    r.candidates += s.candidates;
    r.converged += s.converged;
    r.distinct += s.distinct;
    r.time_ms += s.total_ms;
    r.distinct_per_trial.push_back(s.distinct);
    if (res[i].found()) {
      r.min_strain += res[i].best().strain_value;
      r.min_strain_per_trial.push_back(res[i].best().strain_value);
    } else {
      ++r.failures;
      r.min_strain_per_trial.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  for (BenchRow &r: rows) {
    const double t = std::max(1, r.trials);
    r.gamma1 /= t;
    r.gamma23 /= t;
    r.r1 /= t;
    r.candidates /= t;
    r.converged /= t;
    r.distinct /= t;
    r.time_ms /= t;
    const int ok = r.trials - r.failures;
    r.min_strain = ok > 0 ? r.min_strain / ok : std::numeric_limits<double>::quiet_NaN();
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow> &rows) {
  std::ostringstream ss;
  ss << "eps_pct,M,N,s_xy,trials,gamma1_points,gamma23_points,r1_points,candidates,converged,"
        "distinct,min_strain,time_ms,failures\n";
  for (const BenchRow &r: rows)
    ss << detail::csv_num(r.cls.eps_pct) << ',' << r.cls.m << ',' << r.cls.n << ','
       << detail::csv_num(r.cls.sxy) << ',' << r.trials << ',' << detail::csv_num(r.gamma1) << ','
       << detail::csv_num(r.gamma23) << ',' << detail::csv_num(r.r1) << ','
       << detail::csv_num(r.candidates) << ',' << detail::csv_num(r.converged) << ','
       << detail::csv_num(r.distinct) << ',' << detail::csv_num(r.min_strain) << ','
       << detail::csv_num(r.time_ms) << ',' << r.failures << '\n';
  return ss.str();
}

struct BenchArgs {
  std::string classes = "table1";
  std::vector<std::string> custom;
  std::vector<double> eps_filter;
  int trials = 3;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
};

inline int cmd_bench(const BenchArgs &a, std::ostream &out) {
  if (a.trials < 1)
    throw InvalidArgument("--trials must be positive");
  std::vector<BenchClass> classes;
  if (a.classes == "table1")
    classes = table1_classes();
  for (const auto &c: a.custom)
    classes.push_back(parse_class(c));
  if (!a.eps_filter.empty()) {
    std::erase_if(classes, [&](const BenchClass &c) {
      return std::none_of(a.eps_filter.begin(), a.eps_filter.end(),
                          [&](double e) { return std::abs(e - c.eps_pct) < 1e-12; });
    });
  }
  if (classes.empty())
    throw InvalidArgument("no benchmark classes selected");
  const auto rows = run_bench(classes, a.trials, a.seed, thread_count(a.threads));
  detail::emit(a.out, bench_csv(rows), out);
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(int argc, const char *const *argv, std::ostream &out = std::cout,
               std::ostream &err = std::cerr) {
  CLI::App app { "Global minimization of STRAIN with a rigid substructure", "rse" };
  app.require_subcommand(1);

  GenerateArgs ga;
  auto *gen = app.add_subcommand("generate", "write a random or coordinate-derived problem");
  gen->add_option("--m", ga.m, "number of fixed points");
  gen->add_option("--n", ga.n, "number of free points");
  gen->add_option("--sxy", ga.sxy, "ball separation in units of r_X + r_Y");
  gen->add_option("--eps", ga.eps, "perturbation of both blocks (fraction)");
  gen->add_option("--eps-b", ga.eps_b, "perturbation of D^B (fraction)");
  gen->add_option("--eps-c", ga.eps_c, "perturbation of D^C (fraction)");
  gen->add_option("--seed", ga.seed, "random seed");
  gen->add_option("--x-coords", ga.x_file, "fixed coordinates file");
  gen->add_option("--y-coords", ga.y_file, "free coordinates file");
  gen->add_option("--perturb", ga.perturb, "none, multiplicative or chemical")
    ->check(CLI::IsMember({ "none", "multiplicative", "chemical" }));
  gen->add_option("--out", ga.out, "output file (default stdout)");

  SolveArgs sa;
  auto *sol = app.add_subcommand("solve", "run the global search on a problem file");
  sol->add_option("problem", sa.problem, "problem file")->required();
  sol->add_option("--out", sa.out, "report file (default stdout)");
  sol->add_option("--coords", sa.coords, "write the global minimum Y here");
  sol->add_option("--delta-l", sa.delta_l, "curve-length step of the gamma meshes");
  sol->add_option("--delta-theta", sa.delta_theta, "spherical step along curves");
  sol->add_option("--eps-perp", sa.eps_perp, "orthogonality threshold");
  sol->add_option("--max-restarts", sa.max_restarts, "refinement restarts on failure");
  sol->add_option("--method", sa.method, "cayley or angular")
    ->check(CLI::IsMember({ "cayley", "angular" }));
  sol->add_option("--seed", sa.seed, "recorded in the report; the search is deterministic");
  sol->add_option("--threads", sa.threads, "worker threads (0 = auto)");

  EmbedArgs ea;
  auto *emb = app.add_subcommand("embed", "classic embedding of a squared-distance matrix");
  emb->add_option("input", ea.in, "squared-distance matrix file")->required();
  emb->add_option("--masses", ea.masses, "mass file (default unit masses)");
  emb->add_option("--out", ea.out, "coordinates file (default stdout)");

  CurvesArgs ca;
  auto *cur = app.add_subcommand("curves", "curve spectra and lengths over a gamma grid (CSV)");
  cur->add_option("problem", ca.problem, "problem file")->required();
  cur->add_option("--gamma-min", ca.gamma_min, "grid start (default gamma_minus)");
  cur->add_option("--gamma-max", ca.gamma_max, "grid end (default 1.05 gamma_plus)");
  cur->add_option("--points", ca.points, "grid size");
  cur->add_option("--out", ca.out, "CSV file (default stdout)");

  BenchArgs ba;
  auto *ben = app.add_subcommand("bench", "random benchmark (CSV of per-class averages)");
  ben->add_option("--classes", ba.classes, "table1 or custom")
    ->check(CLI::IsMember({ "table1", "custom" }));
  ben->add_option("--class", ba.custom, "extra class eps_pct:M:N:s_xy (repeatable)");
  ben->add_option("--eps-pct", ba.eps_filter, "keep only these perturbation levels");
  ben->add_option("--trials", ba.trials, "trials per class");
  ben->add_option("--seed", ba.seed, "base seed");
  ben->add_option("--threads", ba.threads, "worker threads (0 = auto)");
  ben->add_option("--out", ba.out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen)
      return cmd_generate(ga, out);
    if (*sol)
      return cmd_solve(sa, out, err);
    if (*emb)
      return cmd_embed(ea, out);
    if (*cur)
      return cmd_curves(ca, out);
    if (*ben)
      return cmd_bench(ba, out);
  } catch (const IoError &e) {
    err << "rse: " << e.what() << '\n';
    return kIo;
  } catch (const InvalidArgument &e) {
    err << "rse: " << e.what() << '\n';
    return kUsage;
  } catch (const NoSolutionError &e) {
    err << "rse: " << e.what() << '\n';
    return kNoSolution;
  } catch (const std::exception &e) {
    err << "rse: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace rse::cli
