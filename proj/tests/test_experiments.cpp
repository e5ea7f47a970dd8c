#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "oracles.hpp"

using namespace rtcurved;

namespace {

const std::vector<double> kH{0.5, 0.25, 0.125, 0.0625};

ReportTable small_table() {
  ReportTable t;
  t.problem_id = "9";
  t.method = Method::RT1;
  for (TrialKind trial : {TrialKind::PetrovGalerkin, TrialKind::Galerkin}) {
    Series s;
    s.trial = trial;
    for (int L : {2, 4}) {
      ResultRow r;
      r.L = L;
      r.h = 1.0 / L;
      const double scale = trial == TrialKind::PetrovGalerkin ? 1.0 : 3.0;
      r.errors = {scale * 0.1 / (L * L), scale * 0.3 / (L * L), scale * 1.0 / 3.0 / (L * L)};
      r.n_it = L + 3;
      r.capped = L == 4;
      s.rows.push_back(r);
    }
    s.update_eoc();
    t.series.push_back(s);
  }
  return t;
}

}  // namespace

TEST(Eoc, ReproducesReferenceRegressions) {
  EXPECT_NEAR(eoc({0.62009878e-1, 0.30260267e-1, 0.15024034e-1, 0.74926747e-2}, kH), 1.0157, 6e-5);
  EXPECT_NEAR(eoc({0.33901594e-1, 0.72607746e-2, 0.16389278e-2, 0.38660695e-3}, kH), 2.1510, 6e-5);
  EXPECT_NEAR(eoc({0.20358578e-2, 0.64933204e-3, 0.17145397e-3, 0.43711080e-4}, kH), 1.8546, 6e-5);
}

TEST(Eoc, ExactPowerLawsAndInvariance) {
  std::vector<double> e;
  for (double h : kH) e.push_back(7.0 * std::pow(h, 1.5));
  EXPECT_NEAR(eoc(e, kH), 1.5, 1e-12);
  std::vector<double> scaled = e;
  for (double& v : scaled) v *= std::sqrt(8.0);
  EXPECT_NEAR(eoc(scaled, kH), eoc(e, kH), 1e-12);
}

TEST(Eoc, RejectsBadInput) {
  EXPECT_THROW(eoc({1.0, 0.0}, {0.5, 0.25}), DomainError);
  EXPECT_THROW(eoc({1.0}, {0.5}), ParameterError);
  EXPECT_THROW(eoc({1.0, 0.5}, {0.5}), ParameterError);
  EXPECT_TRUE(std::isnan(guarded_eoc({1e-15, 1e-16}, {0.5, 0.25})));
  EXPECT_TRUE(std::isnan(guarded_eoc({1.0}, {0.5})));
  EXPECT_NEAR(guarded_eoc({1.0, 0.25}, {0.5, 0.25}), 2.0, 1e-12);
}

TEST(Registry, ProblemsMatchTheirDefinitions) {
  for (int id = 1; id <= 6; ++id) {
    const TestProblemSpec s = test_problem(id);
    EXPECT_EQ(s.id, std::to_string(id));
    EXPECT_EQ(s.method, id <= 3 ? Method::RT0 : Method::RT1);
    EXPECT_EQ(s.Ls.size(), id <= 3 ? 4u : 3u);
    EXPECT_EQ(s.nu, (id == 2 || id == 3) ? 0.0 : 1.0);
    EXPECT_EQ(s.domain.hollow, id == 3 || id == 6);
    EXPECT_EQ(s.assignment.neumann, NeumannSurface::Outer);
  }
  EXPECT_EQ(test_problem(5).domain.shape.a, 0.6);
  EXPECT_EQ(test_problem(1, Method::HRT0).method, Method::HRT0);
  EXPECT_THROW(test_problem(7), ParameterError);
  const TestProblemSpec st = stability_problem(StabilityDomain::Ellipsoid, 1e-4);
  EXPECT_TRUE(st.domain.hollow);
  EXPECT_EQ(st.assignment.neumann, NeumannSurface::Inner);
  EXPECT_EQ(st.nu, 1e-4);
  ASSERT_EQ(st.trials.size(), 1u);
  EXPECT_EQ(st.trials[0], TrialKind::PetrovGalerkin);
}

TEST(ErrorNorms, ZeroDataGivesZeroErrors) {
  TestProblemSpec spec = test_problem(1);
  spec.exact = [](const Vec3&) { return Fields{}; };
  spec.Ls = {2};
  const ReportTable t = run_problem(spec);
  for (const Series& s : t.series) {
    EXPECT_EQ(s.rows[0].errors.p, 0.0);
    EXPECT_EQ(s.rows[0].errors.u, 0.0);
    EXPECT_TRUE(std::isnan(s.eoc_p));
  }
}

TEST(ErrorNorms, InterpolantErrorMatchesAnIndependentIntegration) {
  // u = 1 against a zero discrete solution: ||u|| is the mesh volume.
  const TestProblemSpec spec = test_problem(1);
  const TetMesh m = problem_mesh(spec, 2);
  const DofMap dm = build_dof_map(m, Method::RT0, TrialKind::Galerkin);
  const ExactSolution one = [](const Vec3& x) {
    Fields f;
    f.u = 1.0;
    f.p = Vec3(x[0], 0.0, 0.0);
    f.divp = 1.0;
    return f;
  };
  const ErrorNorms e = error_norms(m, dm, Eigen::VectorXd::Zero(dm.size()), one);
  const double vol = mesh_statistics(m).total_volume;
  EXPECT_NEAR(e.u * e.u, vol, 1e-13);
  EXPECT_NEAR(e.div * e.div, vol, 1e-13);
  double xx = 0.0;
  for (int t = 0; t < m.num_tets(); ++t) {
    xx += oracle::tet_integral(m.tet_vertices(t), [](const Vec3& x) { return x[0] * x[0]; }, 0);
  }
  EXPECT_NEAR(e.p * e.p, xx, 1e-13);
}

TEST(Solve, IsInvariantUnderTetPermutation) {
  const TestProblemSpec spec = test_problem(1);
  const TetMesh m = problem_mesh(spec, 2);
  std::vector<int> perm(m.tets.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(21);
  std::shuffle(perm.begin(), perm.end(), rng);
  TetMesh pm = permute_tets(m, perm);
  for (TrialKind trial : {TrialKind::PetrovGalerkin, TrialKind::Galerkin}) {
    ErrorNorms e[2];
    int i = 0;
    for (const TetMesh* mesh : std::array<const TetMesh*, 2>{&m, &pm}) {
      const DofMap dm = build_dof_map(*mesh, Method::RT0, trial);
      const Eigen::VectorXd x = direct_solve(assemble_rt0(*mesh, dm, problem_data(spec)));
      e[i++] = error_norms(*mesh, dm, x, spec.exact);
    }
    EXPECT_NEAR(e[0].p, e[1].p, 1e-12);
    EXPECT_NEAR(e[0].div, e[1].div, 1e-12);
    EXPECT_NEAR(e[0].u, e[1].u, 1e-12);
  }
}

TEST(Solve, StrategiesAgree) {
  for (Method method : {Method::RT0, Method::HRT0, Method::RT1}) {
    const TestProblemSpec spec = test_problem(method == Method::RT1 ? 4 : 1, method);
    for (TrialKind trial : {TrialKind::PetrovGalerkin, TrialKind::Galerkin}) {
      const Solution a = solve_problem(spec, trial, 2);
      RunOptions direct;
      direct.strategy = SolveStrategy::Direct;
      const Solution b = solve_problem(spec, trial, 2, direct);
      const ErrorNorms ea = error_norms(a.mesh, a.dofs, a.x, spec.exact);
      const ErrorNorms eb = error_norms(b.mesh, b.dofs, b.x, spec.exact);
      // The outer iteration stops at an increment of 1e-5.
      const double tol = method == Method::RT1 && trial == TrialKind::PetrovGalerkin ? 1e-4 : 1e-9;
      EXPECT_NEAR(ea.u, eb.u, tol * eb.u) << to_string(method) << '/' << to_string(trial);
      EXPECT_NEAR(ea.p, eb.p, tol * eb.p) << to_string(method) << '/' << to_string(trial);
    }
  }
}

TEST(Solve, PureNeumannPoissonIsPinned) {
  const TestProblemSpec spec = test_problem(2);
  const Solution s = solve_problem(spec, TrialKind::PetrovGalerkin, 2);
  EXPECT_EQ(s.x[s.dofs.scalar_index(origin_tet(s.mesh), 0)], 0.0);
  EXPECT_TRUE(s.x.allFinite());
}

TEST(RunProblem, ErrorsCarryTheRunLabel) {
  TestProblemSpec spec = test_problem(2, Method::RT1);
  spec.Ls = {2};
  try {
    run_problem(spec);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("problem 2, rt1/pg, L=2"), std::string::npos) << e.what();
  }
}

TEST(RunProblem, PetrovGalerkinBeatsGalerkinOnCoarseMeshes) {
  TestProblemSpec spec = test_problem(1);
  spec.Ls = {2, 4};
  std::vector<std::string> log;
  RunOptions opts;
  opts.log = [&](const std::string& s) { log.push_back(s); };
  const ReportTable t = run_problem(spec, opts);
  EXPECT_EQ(log.size(), 4u);
  const Series* pg = t.find(TrialKind::PetrovGalerkin);
  const Series* gal = t.find(TrialKind::Galerkin);
  ASSERT_TRUE(pg && gal);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(pg->rows[i].errors.u, gal->rows[i].errors.u);
  EXPECT_GT(pg->eoc_p, 0.8);
}

TEST(RunProblem, DumpsMeshesOnRequest) {
  TestProblemSpec spec = test_problem(1);
  spec.Ls = {2};
  spec.trials = {TrialKind::Galerkin};
  RunOptions opts;
  opts.dump_mesh = ::testing::TempDir() + "dumped";
  run_problem(spec, opts);
  std::ifstream in(opts.dump_mesh + ".L2");
  int nv = 0;
  in >> nv;
  EXPECT_EQ(nv, 27);
  std::remove((opts.dump_mesh + ".L2").c_str());
}

TEST(Stability, SingleNuSweep) {
  const auto tables = stability_sweep(StabilityDomain::Ball, {2}, {1e-2}, {});
  EXPECT_EQ(tables[0].metric, "p");
  for (const auto& t : tables) {
    ASSERT_EQ(t.cells.size(), 1u);
    ASSERT_EQ(t.cells[0].size(), 1u);
    EXPECT_GT(t.cells[0][0].value, 0.0);
    EXPECT_LT(t.cells[0][0].value, 1.0);
  }
  EXPECT_GE(tables[0].cells[0][0].n_it, 1);
  const ReportTable r = stability_as_report(tables, 0);
  EXPECT_EQ(r.problem_id, "stability-S-nu0.01");
  EXPECT_EQ(r.series[0].rows[0].errors.div, tables[1].cells[0][0].value);
}

TEST(Output, CsvRoundTrip) {
  const ReportTable t = small_table();
  std::stringstream ss;
  write_csv(t, ss);
  const std::vector<CsvRecord> rows = read_csv(ss);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].problem_id, "9");
  EXPECT_EQ(rows[0].method, "rt1");
  EXPECT_EQ(rows[0].trial_kind, "pg");
  EXPECT_EQ(rows[2].trial_kind, "galerkin");
  EXPECT_EQ(rows[1].L, 4);
  EXPECT_EQ(rows[1].flags, "capped");
  EXPECT_EQ(rows[0].flags, "");
  EXPECT_EQ(rows[1].n_it, 7);
  EXPECT_EQ(rows[3].e_u, t.series[1].rows[1].errors.u);  // 17 significant digits
  EXPECT_NEAR(rows[0].eoc_p, 2.0, 1e-12);
}

TEST(Output, EmptyTableWritesOnlyTheHeader) {
  std::stringstream ss;
  write_csv(std::vector<ReportTable>{}, ss);
  EXPECT_EQ(ss.str(), std::string(kCsvHeader) + "\n");
  EXPECT_TRUE(read_csv(ss).empty());
  std::stringstream bad("a,b\n");
  EXPECT_THROW(read_csv(bad), Error);
}

TEST(Output, MarkdownLayout) {
  std::stringstream ss;
  write_markdown(small_table(), ss);
  const std::string md = ss.str();
  EXPECT_NE(md.find("### Problem 9, rt1"), std::string::npos);
  EXPECT_NE(md.find("| quantity | trial | h=1/2 | h=1/4 | EOC |"), std::string::npos);
  EXPECT_NE(md.find("| p_h - p | pg |"), std::string::npos);
  EXPECT_NE(md.find("| u_h - u | galerkin |"), std::string::npos);
  EXPECT_NE(md.find("| N_it | pg | 5 | 7* |"), std::string::npos);
  // Six error rows plus N_it, header and separator.
  EXPECT_EQ(std::count(md.begin(), md.end(), '\n'), 2 + 2 + 6 + 1 + 1);
}

TEST(Output, FormattingHelpers) {
  EXPECT_EQ(h_label(16), "1/16");
  EXPECT_EQ(format_sci(0.062009878), "6.20098780e-02");
  EXPECT_EQ(std::stod(format_number(0.1 + 0.2)), 0.1 + 0.2);
}
