//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rse/global_search.hpp"
#include "rse/problem_gen.hpp"

namespace rse {

class IoError: public Error {
public:
  using Error::Error;
};

using nlohmann::json;

namespace io {

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw IoError("read failed on '" + path + "'");
  return ss.str();
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
inline void write_text_atomic(const std::string &path, const std::string &content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  std::random_device rd;
  const fs::path tmp = dir / (target.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IoError("cannot create '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed on '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path + "'");
  }
}

// ---------------------------------------------------------------------------
// Text matrices

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

/// Rows of whitespace-separated numbers; '#' lines and blank lines skipped.
inline std::vector<std::vector<double>> parse_rows(const std::string &text,
                                                   const std::string &what) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
      continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != tok.size())
        throw InvalidArgument(what + ": bad number '" + tok + "' on line " +
                              std::to_string(lineno));
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline MatrixX3d parse_coordinates(const std::string &text, const std::string &what = "coordinates") {
  const auto rows = parse_rows(text, what);
  MatrixX3d out(static_cast<Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 3)
      throw InvalidArgument(what + ": expected 3 values per line");
    for (int c = 0; c < 3; ++c)
      out(static_cast<Index>(i), c) = rows[i][c];
  }
  return out;
}

inline std::string format_coordinates(const MatrixX3d &y) {
  std::ostringstream ss;
  for (Index i = 0; i < y.rows(); ++i)
    ss << format_double(y(i, 0)) << ' ' << format_double(y(i, 1)) << ' ' << format_double(y(i, 2))
       << '\n';
  return ss.str();
}

/// Square matrix file: a line holding the order M, then M rows of M values.
inline MatrixXd parse_square_matrix(const std::string &text, const std::string &what = "matrix") {
  const auto rows = parse_rows(text, what);
  if (rows.empty() || rows[0].size() != 1)
    throw InvalidArgument(what + ": first line must hold the order");
  const double mo = rows[0][0];
  if (!(mo >= 1) || mo != std::floor(mo))
    throw InvalidArgument(what + ": bad order");
  const auto m = static_cast<std::size_t>(mo);
  if (rows.size() != m + 1)
    throw InvalidArgument(what + ": expected " + std::to_string(m) + " rows");
  MatrixXd out(static_cast<Index>(m), static_cast<Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i + 1].size() != m)
      throw InvalidArgument(what + ": row " + std::to_string(i + 1) + " has wrong length");
    for (std::size_t j = 0; j < m; ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i + 1][j];
  }
  return out;
}

inline std::string format_square_matrix(const MatrixXd &d) {
  std::ostringstream ss;
  ss << d.rows() << '\n';
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j)
      ss << (j ? " " : "") << format_double(d(i, j));
    ss << '\n';
  }
  return ss.str();
}

// ---------------------------------------------------------------------------
// JSON helpers. nlohmann::json prints the shortest decimal that reads back
// to the same double, so numeric fields round-trip exactly.

inline json matrix_to_json(const MatrixXd &a) {
  json rows = json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < a.cols(); ++j)
      r.push_back(a(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline MatrixXd matrix_from_json(const json &j, Index rows, Index cols, const std::string &what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    throw InvalidArgument(what + ": expected " + std::to_string(rows) + " rows");
  MatrixXd a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json &r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Index>(r.size()) != cols)
      throw InvalidArgument(what + ": row " + std::to_string(i) + " must have " +
                            std::to_string(cols) + " entries");
    for (Index c = 0; c < cols; ++c) {
      const json &v = r[static_cast<std::size_t>(c)];
      if (!v.is_number())
        throw InvalidArgument(what + ": non-numeric entry");
      a(i, c) = v.get<double>();
    }
  }
  return a;
}

inline json vector_to_json(const Vector3d &v) {
  return json::array({ v(0), v(1), v(2) });
}

inline Vector3d vector3_from_json(const json &j, const std::string &what) {
  return matrix_from_json(json::array({ j }), 1, 3, what).row(0).transpose();
}

inline Index index_field(const json &j, const char *key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw InvalidArgument(std::string("field '") + key + "' must be a non-negative integer");
  return static_cast<Index>(j[key].get<long long>());
}

inline json parse_json(const std::string &text, const std::string &what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw InvalidArgument(what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Problem files

struct ProblemFile {
  MatrixX3d X;
  MatrixXd B;
  MatrixXd C;
  std::optional<MatrixX3d> Y_true;
  json meta;  // null when absent

  RigidProblem problem() const { return assemble_problem(X, B, C); }
};

inline ProblemFile problem_file(const GeneratedProblem &g) {
  ProblemFile f { g.problem.X, g.problem.B, g.problem.C, g.Y_true, json::object() };
  f.meta["M"] = g.params.M;
  f.meta["N"] = g.params.N;
  f.meta["s_xy"] = g.params.s_xy;
  f.meta["eps_b"] = g.params.eps_b;
  f.meta["eps_c"] = g.params.eps_c;
  f.meta["seed"] = g.params.seed;
  return f;
}

inline json to_json(const ProblemFile &f) {
  json j;
  j["M"] = f.X.rows();
  j["N"] = f.C.rows();
  j["X"] = matrix_to_json(f.X);
  j["B"] = matrix_to_json(f.B);
  j["C"] = matrix_to_json(f.C);
  if (f.Y_true)
    j["Y_true"] = matrix_to_json(*f.Y_true);
  if (!f.meta.is_null())
    j["meta"] = f.meta;
  return j;
}

inline ProblemFile problem_from_json(const json &j) {
  if (!j.is_object())
    throw InvalidArgument("problem file must hold a JSON object");
  const Index m = index_field(j, "M"), n = index_field(j, "N");
  if (m < 1 || n < 1)
    throw InvalidArgument("problem needs M >= 1 and N >= 1");
  for (const char *k: { "X", "B", "C" })
    if (!j.contains(k))
      throw InvalidArgument(std::string("problem file lacks '") + k + "'");
  ProblemFile f;
  f.X = matrix_from_json(j["X"], m, 3, "X");
  f.B = matrix_from_json(j["B"], m, n, "B");
  f.C = matrix_from_json(j["C"], n, n, "C");
  const double asym = (f.C - f.C.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * std::max(1.0, f.C.cwiseAbs().maxCoeff()))
    throw InvalidArgument("C is not symmetric");
  if (j.contains("Y_true") && !j["Y_true"].is_null())
    f.Y_true = matrix_from_json(j["Y_true"], n, 3, "Y_true");
  if (j.contains("meta"))
    f.meta = j["meta"];
  return f;
}

inline ProblemFile read_problem(const std::string &path) {
  return problem_from_json(parse_json(read_text(path), path));
}

inline void write_problem(const std::string &path, const ProblemFile &f) {
  write_text_atomic(path, to_json(f).dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Reports

struct SolutionRecord {
  double strain = 0;
  Vector3d gammas = Vector3d::Zero();
  double residual = 0;
  std::string source;
};

struct Report {
  GammaBounds bounds;
  SearchStats stats;
  std::vector<SolutionRecord> solutions;  // ascending strain
  std::optional<MatrixX3d> Y;             // global minimum
  std::optional<double> rmsd_true;        // against Y_true when known
  bool found = false;
};

inline Report make_report(const SearchResult &r, const std::optional<MatrixX3d> &y_true = {}) {
  Report rep;
  rep.bounds = r.stats.bounds;
  rep.stats = r.stats;
  rep.found = r.found();
  for (const auto &c: r.minima)
    rep.solutions.push_back({ c.strain_value, c.gammas, c.residual_norm, c.source });
  if (r.found()) {
    rep.Y = r.best().Y;
    if (y_true && y_true->rows() == rep.Y->rows())
      rep.rmsd_true = std::sqrt((*rep.Y - *y_true).squaredNorm() / static_cast<double>(y_true->rows()));
  }
  return rep;
}

inline json to_json(const Report &r) {
  json j;
  j["found"] = r.found;
  j["bounds"] = { { "gamma_minus", r.bounds.gamma_minus },
                  { "gamma_plus", r.bounds.gamma_plus },
                  { "gamma2_plus", r.bounds.gamma2_plus },
                  { "gamma_b", r.bounds.gamma_b ? json(*r.bounds.gamma_b) : json(nullptr) },
                  { "gamma_b1", r.bounds.gamma_b1 },
                  { "gamma1_low", r.bounds.gamma1_low } };
  const SearchStats &s = r.stats;
  j["mesh"] = { { "gamma1", s.gamma1_points }, { "gamma23", s.gamma23_points }, { "r1", s.r1_points } };
  j["counts"] = { { "candidates", s.candidates }, { "converged", s.converged },
                  { "distinct", s.distinct },     { "rejected", s.rejected },
                  { "restarts", s.restarts },     { "truncated", s.truncated } };
  j["parameters"] = { { "delta_L", s.delta_L }, { "delta_theta", s.delta_theta }, { "eps_perp", s.eps_perp } };
  j["timings_ms"] = { { "bounds", s.bounds_ms },
                      { "mesh", s.mesh_ms },
                      { "candidates", s.candidates_ms },
                      { "refine", s.refine_ms },
                      { "total", s.total_ms } };
  json sols = json::array();
  for (const auto &x: r.solutions)
    sols.push_back({ { "strain", x.strain },
                     { "gammas", vector_to_json(x.gammas) },
                     { "residual", x.residual },
                     { "source", x.source } });
  j["solutions"] = std::move(sols);
  j["Y"] = r.Y ? matrix_to_json(*r.Y) : json(nullptr);
  if (r.rmsd_true)
    j["rmsd_true"] = *r.rmsd_true;
  return j;
}

inline Report report_from_json(const json &j) {
  try {
    Report r;
    r.found = j.at("found").get<bool>();
    const json &b = j.at("bounds");
    r.bounds.gamma_minus = b.at("gamma_minus").get<double>();
    r.bounds.gamma_plus = b.at("gamma_plus").get<double>();
    r.bounds.gamma2_plus = b.at("gamma2_plus").get<double>();
    if (!b.at("gamma_b").is_null())
      r.bounds.gamma_b = b.at("gamma_b").get<double>();
    r.bounds.gamma_b1 = b.at("gamma_b1").get<double>();
    r.bounds.gamma1_low = b.at("gamma1_low").get<double>();
    SearchStats &s = r.stats;
    s.bounds = r.bounds;
    s.gamma1_points = j.at("mesh").at("gamma1").get<std::size_t>();
    s.gamma23_points = j.at("mesh").at("gamma23").get<std::size_t>();
    s.r1_points = j.at("mesh").at("r1").get<std::size_t>();
    const json &c = j.at("counts");
    s.candidates = c.at("candidates").get<std::size_t>();
    s.converged = c.at("converged").get<std::size_t>();
    s.distinct = c.at("distinct").get<std::size_t>();
    s.rejected = c.at("rejected").get<std::size_t>();
    s.restarts = c.at("restarts").get<int>();
    s.truncated = c.at("truncated").get<bool>();
    const json &p = j.at("parameters");
    s.delta_L = p.at("delta_L").get<double>();
    s.delta_theta = p.at("delta_theta").get<double>();
    s.eps_perp = p.at("eps_perp").get<double>();
    const json &t = j.at("timings_ms");
    s.bounds_ms = t.at("bounds").get<double>();
    s.mesh_ms = t.at("mesh").get<double>();
    s.candidates_ms = t.at("candidates").get<double>();
    s.refine_ms = t.at("refine").get<double>();
    s.total_ms = t.at("total").get<double>();
    for (const json &x: j.at("solutions"))
      r.solutions.push_back({ x.at("strain").get<double>(), vector3_from_json(x.at("gammas"), "gammas"),
                              x.at("residual").get<double>(), x.at("source").get<std::string>() });
    if (!j.at("Y").is_null()) {
      const json &y = j.at("Y");
      r.Y = matrix_from_json(y, static_cast<Index>(y.size()), 3, "Y");
    }
    if (j.contains("rmsd_true"))
      r.rmsd_true = j.at("rmsd_true").get<double>();
    return r;
  } catch (const json::exception &e) {
    throw InvalidArgument(std::string("malformed report: ") + e.what());
  }
}

}  // namespace io
}  // namespace rse
