// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Tolerances are fixed below.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "oracles.hpp"

using namespace rtcurved;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [violated: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

bool run_criterion(int id, const std::string& title, double budget_seconds, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.passed = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  o.require(secs < budget_seconds, "runtime budget " + format_number(budget_seconds, 6) + " s");
  std::printf("%s %2d %s (%.1f s)%s\n", o.passed ? "PASS" : "FAIL", id, title.c_str(), secs, o.detail.str().c_str());
  std::fflush(stdout);
  return o.passed;
}

std::string num(double v) { return format_number(v, 5); }

void log_line(const std::string& s) { std::cout << "    " << s << '\n' << std::flush; }

ReportTable run(TestProblemSpec spec, const std::vector<int>& Ls) {
  spec.Ls = Ls;
  RunOptions opts;
  opts.log = log_line;
  return run_problem(spec, opts);
}

std::array<double, 3> eocs(const Series& s) { return {s.eoc_p, s.eoc_div, s.eoc_u}; }
std::array<double, 3> errs(const ResultRow& r) { return {r.errors.p, r.errors.div, r.errors.u}; }

TestProblemSpec cube_problem(Method method, double nu, double alpha) {
  TestProblemSpec spec;
  spec.id = "patch";
  spec.mode = MeshMode::UnitCube;
  spec.method = method;
  spec.nu = nu;
  spec.dirichlet_data = true;
  const Vec3 b(0.3, -0.7, 1.1);
  spec.exact = [b, alpha, nu](const Vec3& x) {
    Fields f;
    f.u = 0.5 + b.dot(x) + alpha * x.squaredNorm();
    f.p = b + 2.0 * alpha * x;
    f.divp = 6.0 * alpha;
    f.f = nu * f.u - f.divp;
    return f;
  };
  spec.trials = {TrialKind::Galerkin};
  return spec;
}

// Criterion bodies ----------------------------------------------------------

void mesh_exactness(Outcome& o) {
  for (int L : {2, 4, 8, 16}) {
    for (bool hollow : {false, true}) {
      MeshParams p;
      p.L = L;
      p.spec = hollow ? DomainSpec::holed({0.6, 0.8, 1.0}) : DomainSpec::solid({0.6, 0.8, 1.0});
      const TetMesh m = generate(p);
      const MeshStatistics s = mesh_statistics(m);
      const int expected = hollow ? 6 * L * L * L - 3 * L * L * L / 4 : 6 * L * L * L;
      const std::string tag = (hollow ? "hollow L=" : "solid L=") + std::to_string(L);
      o.require(s.tets == expected, tag + " tet count");
      o.require(s.min_volume > 0.0, tag + " positive volumes");
      o.require(s.max_curved_level_error <= 1e-12, tag + " curved vertices on the surface");
      bool single = true;
      for (int t = 0; t < m.num_tets(); ++t) {
        int curved = 0;
        for (int f = 0; f < 4; ++f) curved += m.faces[m.tet_faces[t][f]].tag.kind == FaceKind::Curved;
        single = single && curved <= 1;
      }
      o.require(single, tag + " at most one curved face per tet");
    }
  }
}

void eoc_reproduction(Outcome& o) {
  const std::vector<double> hs{0.5, 0.25, 0.125, 0.0625};
  const double a = eoc({0.62009878e-1, 0.30260267e-1, 0.15024034e-1, 0.74926747e-2}, hs);
  const double b = eoc({0.33901594e-1, 0.72607746e-2, 0.16389278e-2, 0.38660695e-3}, hs);
  const double c = eoc({0.20358578e-2, 0.64933204e-3, 0.17145397e-3, 0.43711080e-4}, hs);
  o.detail << " slopes " << num(a) << ' ' << num(b) << ' ' << num(c);
  o.require(std::abs(a - 1.0157) <= 1e-3, "first regression");
  o.require(std::abs(b - 2.1510) <= 1e-3, "second regression");
  o.require(std::abs(c - 1.8546) <= 1e-3, "third regression");
}

void patch_tests(Outcome& o) {
  double worst = 0.0;
  for (Method method : {Method::RT0, Method::RT1}) {
    const TestProblemSpec spec = cube_problem(method, 1.0, 0.0);
    for (int L : {2, 4}) {
      const Solution s = solve_problem(spec, TrialKind::Galerkin, L);
      const ErrorNorms e = error_norms(s.mesh, s.dofs, s.x, spec.exact);
      double scalar = e.u;
      if (method == Method::RT0) {
        // Cell values reproduce the cell means of the affine u.
        scalar = 0.0;
        for (int t = 0; t < s.mesh.num_tets(); ++t) {
          scalar = std::max(scalar, std::abs(s.x[s.dofs.scalar_index(t, 0)] - spec.exact(s.mesh.centroid(t)).u));
        }
      }
      worst = std::max({worst, e.p, e.div, scalar});
    }
  }
  for (double nu : {0.0, 1.0}) {
    const TestProblemSpec spec = cube_problem(Method::HRT0, nu, 0.8);
    const Solution s = solve_problem(spec, TrialKind::Galerkin, 2);
    const ErrorNorms e = error_norms(s.mesh, s.dofs, s.x, spec.exact);
    worst = std::max({worst, e.p, e.div, e.u});
  }
  o.detail << " worst error " << format_sci(worst);
  o.require(worst <= 1e-10, "reproduction to 1e-10");
}

void formulation_equivalence(Outcome& o) {
  const TestProblemSpec spec = test_problem(4);
  double worst = 0.0;
  for (int L : {2, 4}) {
    const TetMesh m = problem_mesh(spec, L);
    for (TrialKind trial : {TrialKind::PetrovGalerkin, TrialKind::Galerkin}) {
      const DofMap dm = build_dof_map(m, Method::RT1, trial);
      const Eigen::VectorXd x3 = direct_solve(assemble_mixed(m, dm, problem_data(spec)));
      const Eigen::VectorXd x5 = direct_solve(assemble_rt1_enriched(m, dm, problem_data(spec)));
      worst = std::max(worst, (x3 - x5).norm() / x3.norm());
    }
  }
  o.detail << " max relative difference " << format_sci(worst);
  o.require(worst <= 1e-8, "agreement to 1e-8");
}

void problem1_rt0(Outcome& o) {
  const ReportTable t = run(test_problem(1), {2, 4, 8, 16});
  const Series& pg = *t.find(TrialKind::PetrovGalerkin);
  const Series& gal = *t.find(TrialKind::Galerkin);
  for (const Series* s : {&pg, &gal}) {
    const std::string k = to_string(s->trial);
    o.detail << ' ' << k << " EOC p/div/u " << num(s->eoc_p) << '/' << num(s->eoc_div) << '/' << num(s->eoc_u);
    o.require(s->eoc_p >= 0.85 && s->eoc_p <= 1.2, k + " EOC(p) in [0.85, 1.2]");
    o.require(s->eoc_div >= 0.85 && s->eoc_div <= 1.15, k + " EOC(div p) in [0.85, 1.15]");
  }
  o.require(pg.eoc_u >= 1.25, "pg EOC(u) >= 1.25");
  for (std::size_t i = 0; i < pg.rows.size(); ++i) {
    o.require(pg.rows[i].errors.u <= gal.rows[i].errors.u, "pg u <= galerkin u at L=" + std::to_string(pg.rows[i].L));
  }
}

void problem1_hrt0(Outcome& o) {
  const ReportTable t = run(test_problem(1, Method::HRT0), {2, 4, 8, 16});
  const Series& pg = *t.find(TrialKind::PetrovGalerkin);
  const Series& gal = *t.find(TrialKind::Galerkin);
  for (const Series* s : {&pg, &gal}) {
    const std::string k = to_string(s->trial);
    o.detail << ' ' << k << " EOC grad/u " << num(s->eoc_p) << '/' << num(s->eoc_u);
    o.require(s->eoc_u >= 1.9, k + " EOC(u) >= 1.9");
    o.require(s->eoc_p >= 1.0, k + " EOC(grad) >= 1.0");
  }
  o.require(pg.eoc_p > gal.eoc_p, "pg gradient slope exceeds galerkin slope");
  for (std::size_t i = 0; i < pg.rows.size(); ++i) {
    o.require(pg.rows[i].errors.u < gal.rows[i].errors.u, "pg u < galerkin u at L=" + std::to_string(pg.rows[i].L));
  }
}

void problem2(Outcome& o) {
  const ReportTable t = run(test_problem(2), {2, 4, 8, 16});
  const Series& pg = *t.find(TrialKind::PetrovGalerkin);
  const Series& gal = *t.find(TrialKind::Galerkin);
  o.require(pg.rows.size() == 4 && gal.rows.size() == 4, "all meshes solved");
  for (const Series* s : {&pg, &gal}) {
    o.detail << ' ' << to_string(s->trial) << " EOC p/div/u " << num(s->eoc_p) << '/' << num(s->eoc_div) << '/'
             << num(s->eoc_u);
    o.require(s->eoc_p >= 0.9, std::string(to_string(s->trial)) + " EOC(p) >= 0.9");
  }
  const std::array<const char*, 3> names{"p", "div p", "u"};
  for (std::size_t i = 0; i < pg.rows.size(); ++i) {
    const auto a = errs(pg.rows[i]), b = errs(gal.rows[i]);
    for (int q = 0; q < 3; ++q) {
      o.require(a[q] <= b[q], std::string("pg ") + names[q] + " <= galerkin at L=" + std::to_string(pg.rows[i].L));
    }
  }
}

void problem3(Outcome& o) {
  const ReportTable rt0 = run(test_problem(3), {2, 4, 8, 16});
  const ReportTable hrt0 = run(test_problem(3, Method::HRT0), {2, 4, 8, 16});
  for (const ReportTable* t : {&rt0, &hrt0}) {
    for (const Series& s : t->series) {
      const std::string k = std::string(to_string(t->method)) + "/" + to_string(s.trial);
      o.detail << ' ' << k << " EOC(u) " << num(s.eoc_u);
      o.require(s.eoc_u >= 1.7, k + " EOC(u) >= 1.7");
    }
  }
  for (TrialKind trial : {TrialKind::PetrovGalerkin, TrialKind::Galerkin}) {
    const Series& a = *hrt0.find(trial);
    const Series& b = *rt0.find(trial);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      o.require(a.rows[i].errors.u < b.rows[i].errors.u,
                std::string(to_string(trial)) + " hrt0 u < rt0 u at L=" + std::to_string(a.rows[i].L));
    }
  }
}

void problem4(Outcome& o) {
  const ReportTable t = run(test_problem(4), {2, 4, 8});
  const Series& pg = *t.find(TrialKind::PetrovGalerkin);
  const Series& gal = *t.find(TrialKind::Galerkin);
  for (const Series* s : {&pg, &gal}) {
    const auto e = eocs(*s);
    o.detail << ' ' << to_string(s->trial) << " EOC " << num(e[0]) << '/' << num(e[1]) << '/' << num(e[2]);
    for (double v : e) o.require(v >= 1.6, std::string(to_string(s->trial)) + " EOC >= 1.6");
  }
  o.detail << " N_it";
  for (std::size_t i = 0; i < pg.rows.size(); ++i) {
    const double ratio = gal.rows[i].errors.u / pg.rows[i].errors.u;
    o.detail << ' ' << pg.rows[i].n_it;
    o.require(ratio >= 3.0, "u ratio >= 3 at L=" + std::to_string(pg.rows[i].L) + " (got " + num(ratio) + ")");
    o.require(pg.rows[i].n_it <= 30 && !pg.rows[i].capped, "N_it <= 30 at L=" + std::to_string(pg.rows[i].L));
  }
}

void stability(Outcome& o) {
  RunOptions opts;
  opts.log = log_line;
  const auto tables = stability_sweep(StabilityDomain::Ball, {4}, {1.0, 1e-2, 1e-4, 1e-6, 1e-8}, opts);
  for (const StabilityTable& t : tables) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int j = 0; j < 4; ++j) {
      lo = std::min(lo, t.cells[0][j].value);
      hi = std::max(hi, t.cells[0][j].value);
      o.require(!t.cells[0][j].capped, t.metric + " converged at nu=" + num(t.nus[j]));
    }
    o.detail << ' ' << t.metric << " max/min " << num(hi / lo);
    o.require(hi / lo <= 1.10, t.metric + " max/min <= 1.10");
    const StabilityCell& last = t.cells[0][4];
    o.require(std::isfinite(last.value), t.metric + " finite at nu=1e-8");
    o.require(last.capped == (last.n_it >= OuterOptions{}.max_iterations), "cap flag consistent at nu=1e-8");
  }
  o.detail << " nu=1e-8 N_it " << tables[0].cells[0][4].n_it << (tables[0].cells[0][4].capped ? " (capped)" : "");
}

void oracle_suite(Outcome& o) {
  // Exact fields against finite differences.
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coord(0.15, 0.55);
  const DomainSpec holed = DomainSpec::holed({0.6, 0.8, 1.0});
  double fd_worst = 0.0;
  for (Profile prof : {Profile::G1, Profile::G2, Profile::G3}) {
    const SolutionProfile sp{prof, 1.0};
    auto u = [&](const Vec3& x) { return exact_fields(holed, sp, x).u; };
    for (int k = 0; k < 20; ++k) {
      Vec3 x(coord(rng), coord(rng), coord(rng));
      if (eta(holed.shape, x) < 0.55) continue;  // stay clear of the singular core
      const Fields f = exact_fields(holed, sp, x);
      fd_worst = std::max(fd_worst, (oracle::fd_gradient(u, x) - f.p).norm() / f.p.norm());
      fd_worst = std::max(fd_worst, std::abs(oracle::fd_laplacian(u, x) - f.divp) / std::abs(f.divp));
    }
  }
  o.detail << " fd " << format_sci(fd_worst);
  o.require(fd_worst <= 1e-4, "finite differences at 1e-4");

  // Divergence theorem for every RT0 and RT1 basis field on a curved mesh.
  const TetMesh m = oracle::ball_mesh(2, true);
  double div_worst = 0.0;
  for (int t = 0; t < m.num_tets(); t += 5) {
    const RTBasis<0> b0 = build_rt0_local(m, t);
    const RTBasis<1> b1 = build_rt1_local(m, t);
    auto defect = [&](const auto& basis, int j) {
      double flux = 0.0;
      for (int f = 0; f < 4; ++f) {
        const Vec3 n = m.outward_normal(t, f);
        flux += oracle::triangle_integral(m.face_vertices(m.tet_faces[t][f]),
                                          [&](const Vec3& x) { return basis.values(x)[j].dot(n); });
      }
      return std::abs(oracle::tet_integral(m.tet_vertices(t), [&](const Vec3& x) { return basis.divergences(x)[j]; }, 0) -
                      flux);
    };
    for (int j = 0; j < 4; ++j) div_worst = std::max(div_worst, defect(b0, j));
    for (int j = 0; j < 15; ++j) div_worst = std::max(div_worst, defect(b1, j));
  }
  o.detail << " divergence " << format_sci(div_worst);
  o.require(div_worst <= 1e-12, "divergence theorem at 1e-12");

  // Quadrature exactness on monomials.
  double q_worst = 0.0;
  for (int d = 1; d <= 12; ++d) {
    const TetRule& tr = tet_rule(d);
    const TriangleRule& fr = triangle_rule(d);
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        double qf = 0.0;
        for (std::size_t i = 0; i < fr.size(); ++i) qf += fr.weights[i] * std::pow(fr.points[i][1], a) * std::pow(fr.points[i][2], b);
        const double ef = oracle::ref_triangle_monomial(a, b);
        q_worst = std::max(q_worst, std::abs(qf / 2.0 - ef) / ef);
        for (int c = 0; a + b + c <= d; ++c) {
          double qt = 0.0;
          for (std::size_t i = 0; i < tr.size(); ++i) {
            qt += tr.weights[i] * std::pow(tr.points[i][1], a) * std::pow(tr.points[i][2], b) * std::pow(tr.points[i][3], c);
          }
          const double et = oracle::ref_tet_monomial(a, b, c);
          q_worst = std::max(q_worst, std::abs(qt / 6.0 - et) / et);
        }
      }
    }
  }
  o.detail << " quadrature " << format_sci(q_worst);
  o.require(q_worst <= 1e-13, "quadrature exactness at 1e-13");
}

}  // namespace

int main() {
  int failed = 0;
  auto c = [&](int id, const std::string& title, double budget, const std::function<void(Outcome&)>& body) {
    if (!run_criterion(id, title, budget, body)) ++failed;
  };
  c(1, "mesh exactness", 10, mesh_exactness);
  c(2, "EOC regression", 1, eoc_reproduction);
  c(3, "patch tests", 30, patch_tests);
  c(4, "mixed and enriched forms agree", 120, formulation_equivalence);
  c(5, "problem 1, rt0", 900, problem1_rt0);
  c(6, "problem 1, hrt0", 900, problem1_hrt0);
  c(7, "problem 2, pinned constant", 900, problem2);
  c(8, "problem 3, rt0 and hrt0", 900, problem3);
  c(9, "problem 4, rt1", 1800, problem4);
  c(10, "stability sweep", 1200, stability);
  c(11, "analytic oracles", 60, oracle_suite);
  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
