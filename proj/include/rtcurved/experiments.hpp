#pragma once

// Test-problem registry, error norms, convergence-order regression, the
// per-problem driver, the small-nu stability sweep and table output.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rtcurved/assembly.hpp"
#include "rtcurved/errors.hpp"
#include "rtcurved/geometry.hpp"
#include "rtcurved/mesh.hpp"
#include "rtcurved/quadrature.hpp"
#include "rtcurved/solvers.hpp"
#include "rtcurved/spaces.hpp"

namespace rtcurved {

struct TestProblemSpec {
  std::string id;
  DomainSpec domain = DomainSpec::solid(EllipsoidShape::ball());
  MeshMode mode = MeshMode::Ellipsoid;
  double nu = 1.0;
  ExactSolution exact;
  BoundaryAssignment assignment;
  Method method = Method::RT0;
  std::vector<TrialKind> trials{TrialKind::PetrovGalerkin, TrialKind::Galerkin};
  std::vector<int> Ls{2, 4, 8, 16};
  /// Impose the exact u on Dirichlet faces (unit-cube validation runs);
  /// otherwise u = 0 there.
  bool dirichlet_data = false;
};

inline TestProblemSpec make_problem(std::string id, DomainSpec domain, Profile profile, double nu,
                                    NeumannSurface neumann, Method method) {
  TestProblemSpec s;
  s.id = std::move(id);
  s.domain = domain;
  s.nu = nu;
  s.exact = make_exact_solution(domain, {profile, nu});
  s.assignment.neumann = neumann;
  s.method = method;
  s.Ls = method == Method::RT1 ? std::vector<int>{2, 4, 8} : std::vector<int>{2, 4, 8, 16};
  return s;
}

inline EllipsoidShape reference_ellipsoid() { return {0.6, 0.8, 1.0}; }

/// Test problems 1-6. Problems 1-3 default to RT0, 4-6 to RT1; any method
/// may be requested.
inline TestProblemSpec test_problem(int id, std::optional<Method> method = std::nullopt) {
  const auto ball = EllipsoidShape::ball();
  const auto ell = reference_ellipsoid();
  const Method m = method.value_or(id <= 3 ? Method::RT0 : Method::RT1);
  const std::string name = std::to_string(id);
  switch (id) {
    case 1: return make_problem(name, DomainSpec::solid(ball), Profile::G1, 1.0, NeumannSurface::Outer, m);
    case 2: return make_problem(name, DomainSpec::solid(ball), Profile::G1, 0.0, NeumannSurface::Outer, m);
    case 3: return make_problem(name, DomainSpec::holed(ell), Profile::G2, 0.0, NeumannSurface::Outer, m);
    case 4: return make_problem(name, DomainSpec::solid(ball), Profile::G1, 1.0, NeumannSurface::Outer, m);
    case 5: return make_problem(name, DomainSpec::solid(ell), Profile::G1, 1.0, NeumannSurface::Outer, m);
    case 6: return make_problem(name, DomainSpec::holed(ball), Profile::G2, 1.0, NeumannSurface::Outer, m);
    default: throw ParameterError("unknown test problem " + name + " (expected 1..6)");
  }
}

enum class StabilityDomain { Ball, Ellipsoid };

inline const char* to_string(StabilityDomain d) { return d == StabilityDomain::Ball ? "S" : "E"; }

/// Hollow domain, u = eta^2 - eta, p.n = 0 on the inner surface, RT1 Petrov-Galerkin.
inline TestProblemSpec stability_problem(StabilityDomain domain, double nu) {
  const EllipsoidShape shape = domain == StabilityDomain::Ball ? EllipsoidShape::ball() : reference_ellipsoid();
  TestProblemSpec s = make_problem(std::string("stability-") + to_string(domain), DomainSpec::holed(shape),
                                   Profile::G3, nu, NeumannSurface::Inner, Method::RT1);
  s.trials = {TrialKind::PetrovGalerkin};
  return s;
}

struct ErrorNorms {
  double p = 0.0;    // ||p_h - p|| (HRT0: ||grad_h(u_h - u)||)
  double div = 0.0;  // ||div(p_h - p)|| (HRT0: ||lap_h(u_h - u)||)
  double u = 0.0;
};

constexpr int kErrorDegree = 6;

/// Local flux DOFs of the discrete solution: curved-face DOFs of constrained
/// tets come from the constraints for the Petrov-Galerkin trial and are zero
/// for the Galerkin one.
inline Eigen::VectorXd solution_flux_dofs(const DofMap& dm, int t, const Eigen::VectorXd& x) {
  return local_flux_dofs(dm, t, x, dm.uses_constraints());
}

/// L2 errors over the octant mesh, by element-wise degree-6 quadrature.
inline ErrorNorms error_norms(const TetMesh& mesh, const DofMap& dm, const Eigen::VectorXd& x,
                              const ExactSolution& exact) {
  if (x.size() != dm.size()) throw ParameterError("error_norms: solution size mismatch");
  const auto& rule = tet_rule(kErrorDegree);
  double ep = 0.0, ed = 0.0, eu = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto verts = mesh.tet_vertices(t);
    const double vol = mesh.volumes[t];
    const Eigen::VectorXd a = solution_flux_dofs(dm, t, x);
    if (dm.method == Method::HRT0) {
      const HermiteLocalBasis hb = HermiteLocalBasis::of_tet(mesh, t);
      const auto lap = hb.laplacians();
      const double c = x[dm.scalar_index(t, 0)];
      double lap_h = 0.0;
      for (int f = 0; f < 4; ++f) lap_h += a[f] * lap[f + 1];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3 p = map_point<4>(verts, rule.points[q]);
        const double w = rule.weights[q] * vol;
        const Fields ex = exact(p);
        const auto v = hb.values(p);
        const auto g = hb.gradients(p);
        double uh = c;
        Vec3 gh = Vec3::Zero();
        for (int f = 0; f < 4; ++f) {
          uh += a[f] * v[f + 1];
          gh += a[f] * g[f + 1];
        }
        ep += w * (gh - ex.p).squaredNorm();
        ed += w * (lap_h - ex.divp) * (lap_h - ex.divp);
        eu += w * (uh - ex.u) * (uh - ex.u);
      }
    } else if (dm.k == 0) {
      const RTBasis<0> basis = build_rt0_local(mesh, t);
      const LocalVector<0> av = a;
      const double uh = x[dm.scalar_index(t, 0)];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3 p = map_point<4>(verts, rule.points[q]);
        const double w = rule.weights[q] * vol;
        const Fields ex = exact(p);
        const double dh = basis.divergence(p, av);
        ep += w * (basis.field(p, av) - ex.p).squaredNorm();
        ed += w * (dh - ex.divp) * (dh - ex.divp);
        eu += w * (uh - ex.u) * (uh - ex.u);
      }
    } else {
      const RTBasis<1> basis = build_rt1_local(mesh, t);
      const LocalVector<1> av = a;
      Eigen::Vector4d uv;
      for (int i = 0; i < 4; ++i) uv[i] = x[dm.scalar_index(t, i)];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3 p = map_point<4>(verts, rule.points[q]);
        const double w = rule.weights[q] * vol;
        const Fields ex = exact(p);
        const double dh = basis.divergence(p, av);
        const auto& b = rule.points[q];
        const double uh = uv[0] * b[0] + uv[1] * b[1] + uv[2] * b[2] + uv[3] * b[3];
        ep += w * (basis.field(p, av) - ex.p).squaredNorm();
        ed += w * (dh - ex.divp) * (dh - ex.divp);
        eu += w * (uh - ex.u) * (uh - ex.u);
      }
    }
  }
  return {std::sqrt(ep), std::sqrt(ed), std::sqrt(eu)};
}

/// Least-squares slope of log(error) against log(h).
inline double eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2) {
    throw ParameterError("eoc needs at least two (error, h) pairs of equal length");
  }
  const auto n = static_cast<double>(errors.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(hs[i] > 0.0)) {
      throw DomainError("eoc: errors and mesh sizes must be positive");
    }
    sx += std::log(hs[i]);
    sy += std::log(errors[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double dx = std::log(hs[i]) - mx;
    sxy += dx * (std::log(errors[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw DomainError("eoc: mesh sizes must be distinct");
  return sxy / sxx;
}

/// EOC, or NaN when any error is at roundoff level (below `floor`).
inline double guarded_eoc(const std::vector<double>& errors, const std::vector<double>& hs,
                          double floor = 1e-13) {
  if (errors.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  for (double e : errors) {
    if (!(e > floor)) return std::numeric_limits<double>::quiet_NaN();
  }
  return eoc(errors, hs);
}

enum class SolveStrategy {
  Default,  // the per-method strategy of the experiments
  Direct,   // whole-system sparse LU (RT1 uses the enriched form)
};

struct RunOptions {
  SolveStrategy strategy = SolveStrategy::Default;
  OuterOptions outer;
  Logger log;
  std::string dump_mesh;  // non-empty: write each mesh to <path>.L<L>
};

struct Solution {
  TetMesh mesh;
  DofMap dofs;
  Eigen::VectorXd x;
  int n_it = 0;
  bool capped = false;
};

inline bool has_dirichlet(const TetMesh& mesh) {
  return std::any_of(mesh.faces.begin(), mesh.faces.end(),
                     [](const Face& f) { return f.tag.is_dirichlet(); });
}

inline TetMesh problem_mesh(const TestProblemSpec& spec, int L) {
  MeshParams params;
  params.L = L;
  params.spec = spec.domain;
  params.mode = spec.mode;
  return generate(params, spec.assignment);
}

inline ProblemData problem_data(const TestProblemSpec& spec) {
  ProblemData data;
  data.nu = spec.nu;
  const ExactSolution exact = spec.exact;
  data.source = [exact](const Vec3& x) { return exact(x).f; };
  if (spec.dirichlet_data) data.dirichlet = [exact](const Vec3& x) { return exact(x).u; };
  return data;
}

inline Eigen::VectorXd solve_condensed_direct(const CondensedSystem& cs, const Eigen::VectorXd& rhs) {
  SparseSystem reduced = cs.reduced();
  reduced.rhs = cs.reduce_rhs(rhs);
  return cs.recover(direct_solve(reduced), rhs);
}

/// Builds the mesh, assembles and solves one (problem, trial kind, L).
inline Solution solve_problem(const TestProblemSpec& spec, TrialKind trial, int L,
                              const RunOptions& options = {}) {
  Solution s;
  s.mesh = problem_mesh(spec, L);
  if (!options.dump_mesh.empty()) dump_mesh(s.mesh, options.dump_mesh + ".L" + std::to_string(L));
  s.dofs = build_dof_map(s.mesh, spec.method, trial);
  const ProblemData data = problem_data(spec);
  const bool pure_neumann = !has_dirichlet(s.mesh);
  const bool direct = options.strategy == SolveStrategy::Direct;

  switch (spec.method) {
    case Method::RT0: {
      SparseSystem sys = assemble_rt0(s.mesh, s.dofs, data);
      if (spec.nu == 0.0) {
        if (pure_neumann) sys = pin_constant(std::move(sys), s.mesh, s.dofs, origin_tet(s.mesh));
        s.x = direct_solve(sys);
      } else if (direct) {
        s.x = direct_solve(sys);
      } else {
        s.x = solve_condensed_direct(condense_rt0(sys, s.dofs), sys.rhs);
      }
      break;
    }
    case Method::HRT0: {
      SparseSystem sys = assemble_hrt0(s.mesh, s.dofs, data);
      if (spec.nu == 0.0) {
        if (pure_neumann) sys = pin_constant(std::move(sys), s.mesh, s.dofs, origin_tet(s.mesh));
        s.x = direct_solve(sys);
      } else if (direct) {
        s.x = direct_solve(sys);
      } else {
        s.x = solve_condensed_direct(condense_cells(sys, s.dofs), sys.rhs);
      }
      break;
    }
    case Method::RT1: {
      if (!(spec.nu > 0.0)) throw ParameterError("RT1 runs use the enriched form and need nu > 0");
      if (direct) {
        s.x = direct_solve(assemble_rt1_enriched(s.mesh, s.dofs, data));
        s.n_it = 1;
      } else if (trial == TrialKind::PetrovGalerkin) {
        OuterOptions outer = options.outer;
        if (!outer.log) outer.log = options.log;
        OuterResult r = outer_iteration(s.mesh, s.dofs, data, outer);
        s.x = std::move(r.x);
        s.n_it = r.iterations;
        s.capped = r.capped;
      } else {
        const SparseSystem sys = assemble_rt1_enriched(s.mesh, s.dofs, data);
        const CondensedSystem cs = condense_rt1(sys, s.dofs);
        s.x = condensed_cg_solve(cs, sys.rhs, Eigen::VectorXd::Zero(cs.reduced_size()), options.outer.cg);
        s.n_it = 1;
      }
      break;
    }
  }
  return s;
}

struct ResultRow {
  int L = 0;
  double h = 0.0;
  ErrorNorms errors;
  int n_it = 0;  // RT1 only
  bool capped = false;
  double seconds = 0.0;
};

struct Series {
  TrialKind trial = TrialKind::PetrovGalerkin;
  std::vector<ResultRow> rows;
  double eoc_p = std::numeric_limits<double>::quiet_NaN();
  double eoc_div = std::numeric_limits<double>::quiet_NaN();
  double eoc_u = std::numeric_limits<double>::quiet_NaN();

  void update_eoc() {
    std::vector<double> hs, p, d, u;
    for (const ResultRow& r : rows) {
      hs.push_back(r.h);
      p.push_back(r.errors.p);
      d.push_back(r.errors.div);
      u.push_back(r.errors.u);
    }
    eoc_p = guarded_eoc(p, hs);
    eoc_div = guarded_eoc(d, hs);
    eoc_u = guarded_eoc(u, hs);
  }
};

struct ReportTable {
  std::string problem_id;
  Method method = Method::RT0;
  std::vector<Series> series;

  [[nodiscard]] const Series* find(TrialKind trial) const {
    for (const Series& s : series) {
      if (s.trial == trial) return &s;
    }
    return nullptr;
  }
};

inline std::string run_label(const TestProblemSpec& spec, TrialKind trial, int L) {
  return "problem " + spec.id + ", " + to_string(spec.method) + "/" + to_string(trial) + ", L=" +
         std::to_string(L);
}

/// Solves every (trial kind, L) of a test problem and collects the error table.
inline ReportTable run_problem(const TestProblemSpec& spec, const RunOptions& options = {}) {
  ReportTable table;
  table.problem_id = spec.id;
  table.method = spec.method;
  for (TrialKind trial : spec.trials) {
    Series series;
    series.trial = trial;
    for (int L : spec.Ls) {
      const auto start = std::chrono::steady_clock::now();
      ResultRow row;
      row.L = L;
      row.h = 1.0 / L;
      try {
        const Solution sol = solve_problem(spec, trial, L, options);
        row.errors = error_norms(sol.mesh, sol.dofs, sol.x, spec.exact);
        row.n_it = sol.n_it;
        row.capped = sol.capped;
      } catch (const Error& e) {
        throw Error(run_label(spec, trial, L) + ": " + e.what());
      }
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (options.log) {
        std::ostringstream msg;
        msg << run_label(spec, trial, L) << ": e_p=" << row.errors.p << " e_div=" << row.errors.div
            << " e_u=" << row.errors.u;
        if (spec.method == Method::RT1) msg << " N_it=" << row.n_it << (row.capped ? "*" : "");
        msg << " (" << std::fixed << std::setprecision(2) << row.seconds << " s)";
        options.log(msg.str());
      }
      series.rows.push_back(row);
    }
    series.update_eoc();
    table.series.push_back(std::move(series));
  }
  return table;
}

struct StabilityCell {
  double value = 0.0;
  bool capped = false;
  int n_it = 0;
};

/// One error metric: rows are meshes (h), columns are nu values.
struct StabilityTable {
  std::string metric;
  StabilityDomain domain = StabilityDomain::Ball;
  std::vector<int> Ls;
  std::vector<double> nus;
  std::vector<std::vector<StabilityCell>> cells;  // [L][nu]
};

inline std::array<StabilityTable, 3> stability_sweep(StabilityDomain domain, const std::vector<int>& Ls,
                                                     const std::vector<double>& nus,
                                                     const RunOptions& options = {}) {
  std::array<StabilityTable, 3> tables;
  const std::array<const char*, 3> metrics{"p", "div p", "u"};
  for (int m = 0; m < 3; ++m) {
    tables[m].metric = metrics[m];
    tables[m].domain = domain;
    tables[m].Ls = Ls;
    tables[m].nus = nus;
    tables[m].cells.assign(Ls.size(), std::vector<StabilityCell>(nus.size()));
  }
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    for (std::size_t j = 0; j < nus.size(); ++j) {
      TestProblemSpec spec = stability_problem(domain, nus[j]);
      spec.Ls = {Ls[i]};
      const ReportTable r = run_problem(spec, options);
      const ResultRow& row = r.series.front().rows.front();
      const std::array<double, 3> vals{row.errors.p, row.errors.div, row.errors.u};
      for (int m = 0; m < 3; ++m) tables[m].cells[i][j] = {vals[m], row.capped, row.n_it};
    }
  }
  return tables;
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_number(double v, int precision = 17) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

inline std::string format_sci(double v) {
  std::ostringstream out;
  out << std::scientific << std::setprecision(8) << v;
  return out.str();
}

inline std::string h_label(int L) { return "1/" + std::to_string(L); }

inline const char* kCsvHeader =
    "problem_id,method,trial_kind,L,h,e_p,e_div,e_u,eoc_p,eoc_div,eoc_u,n_it,flags";

inline void write_csv_rows(const ReportTable& table, std::ostream& out) {
  for (const Series& s : table.series) {
    for (const ResultRow& r : s.rows) {
      out << table.problem_id << ',' << to_string(table.method) << ',' << to_string(s.trial) << ','
          << r.L << ',' << format_number(r.h) << ',' << format_number(r.errors.p) << ','
          << format_number(r.errors.div) << ',' << format_number(r.errors.u) << ','
          << format_number(s.eoc_p) << ',' << format_number(s.eoc_div) << ','
          << format_number(s.eoc_u) << ',' << r.n_it << ',' << (r.capped ? "capped" : "") << '\n';
    }
  }
}

inline void write_csv(const std::vector<ReportTable>& tables, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const ReportTable& t : tables) write_csv_rows(t, out);
}

inline void write_csv(const ReportTable& table, std::ostream& out) {
  write_csv(std::vector<ReportTable>{table}, out);
}

struct CsvRecord {
  std::string problem_id, method, trial_kind;
  int L = 0;
  double h = 0, e_p = 0, e_div = 0, e_u = 0, eoc_p = 0, eoc_div = 0, eoc_u = 0;
  int n_it = 0;
  std::string flags;
};

inline std::vector<CsvRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error("CSV header mismatch");
  std::vector<CsvRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 13) throw Error("CSV row with " + std::to_string(f.size()) + " fields");
    auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    CsvRecord r;
    r.problem_id = f[0];
    r.method = f[1];
    r.trial_kind = f[2];
    r.L = std::stoi(f[3]);
    r.h = num(f[4]);
    r.e_p = num(f[5]);
    r.e_div = num(f[6]);
    r.e_u = num(f[7]);
    r.eoc_p = num(f[8]);
    r.eoc_div = num(f[9]);
    r.eoc_u = num(f[10]);
    r.n_it = std::stoi(f[11]);
    r.flags = f[12];
    out.push_back(r);
  }
  return out;
}

/// Paired rows per quantity (Petrov-Galerkin first), one column per mesh and
/// a final EOC column; RT1 tables end with the outer iteration counts.
inline void write_markdown(const ReportTable& table, std::ostream& out) {
  const bool hermite = table.method == Method::HRT0;
  out << "### Problem " << table.problem_id << ", " << to_string(table.method) << "\n\n";
  if (table.series.empty()) return;
  const auto& ref = table.series.front().rows;
  out << "| quantity | trial |";
  for (const ResultRow& r : ref) out << " h=" << h_label(r.L) << " |";
  out << " EOC |\n|---|---|";
  for (std::size_t i = 0; i < ref.size(); ++i) out << "---|";
  out << "---|\n";
  const std::array<const char*, 3> names = hermite
      ? std::array<const char*, 3>{"grad_h(u_h - u)", "lap_h(u_h - u)", "u_h - u"}
      : std::array<const char*, 3>{"p_h - p", "div(p_h - p)", "u_h - u"};
  for (int q = 0; q < 3; ++q) {
    for (const Series& s : table.series) {
      out << "| " << names[q] << " | " << to_string(s.trial) << " |";
      for (const ResultRow& r : s.rows) {
        const double v = q == 0 ? r.errors.p : q == 1 ? r.errors.div : r.errors.u;
        out << ' ' << format_sci(v) << " |";
      }
      const double e = q == 0 ? s.eoc_p : q == 1 ? s.eoc_div : s.eoc_u;
      out << ' ' << (std::isnan(e) ? std::string("-") : format_number(e, 5)) << " |\n";
    }
  }
  if (table.method == Method::RT1) {
    if (const Series* pg = table.find(TrialKind::PetrovGalerkin)) {
      out << "| N_it | pg |";
      for (const ResultRow& r : pg->rows) out << ' ' << r.n_it << (r.capped ? "*" : "") << " |";
      out << " |\n";
    }
  }
  out << '\n';
}

inline void write_markdown(const StabilityTable& table, std::ostream& out) {
  out << "### Error in " << table.metric << ", hollow domain " << to_string(table.domain) << "\n\n";
  out << "| h |";
  for (double nu : table.nus) out << " nu=" << format_number(nu, 3) << " |";
  out << "\n|---|";
  for (std::size_t j = 0; j < table.nus.size(); ++j) out << "---|";
  out << '\n';
  for (std::size_t i = 0; i < table.Ls.size(); ++i) {
    out << "| " << h_label(table.Ls[i]) << " |";
    for (const StabilityCell& c : table.cells[i]) out << ' ' << format_sci(c.value) << (c.capped ? "*" : "") << " |";
    out << '\n';
  }
  out << '\n';
}

/// The sweep in the common CSV schema; problem_id carries the nu value.
inline ReportTable stability_as_report(const std::array<StabilityTable, 3>& tables, std::size_t nu_index) {
  const StabilityTable& t = tables[0];
  ReportTable r;
  r.problem_id = std::string("stability-") + to_string(t.domain) + "-nu" + format_number(t.nus.at(nu_index), 3);
  r.method = Method::RT1;
  Series s;
  s.trial = TrialKind::PetrovGalerkin;
  for (std::size_t i = 0; i < t.Ls.size(); ++i) {
    ResultRow row;
    row.L = t.Ls[i];
    row.h = 1.0 / t.Ls[i];
    row.errors = {tables[0].cells[i][nu_index].value, tables[1].cells[i][nu_index].value,
                  tables[2].cells[i][nu_index].value};
    row.n_it = t.cells[i][nu_index].n_it;
    row.capped = t.cells[i][nu_index].capped;
    s.rows.push_back(row);
  }
  s.update_eoc();
  r.series.push_back(std::move(s));
  return r;
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  writer(out);
  if (!out) throw Error("failed writing output file: " + path);
}

}  // namespace rtcurved
