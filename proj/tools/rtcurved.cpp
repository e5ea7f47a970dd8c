// Command-line driver: convergence runs, the small-nu stability sweep, mesh
// checks and the built-in self test.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtcurved/rtcurved.hpp"

namespace {

using namespace rtcurved;

Method parse_method(const std::string& s) {
  if (s == "rt0") return Method::RT0;
  if (s == "rt1") return Method::RT1;
  if (s == "hrt0") return Method::HRT0;
  throw ParameterError("unknown method '" + s + "'");
}

std::vector<TrialKind> parse_trials(const std::string& s) {
  if (s == "pg") return {TrialKind::PetrovGalerkin};
  if (s == "galerkin") return {TrialKind::Galerkin};
  if (s == "both") return {TrialKind::PetrovGalerkin, TrialKind::Galerkin};
  throw ParameterError("unknown trial kind '" + s + "'");
}

Logger stderr_logger(bool verbose) {
  return [verbose](const std::string& msg) {
    if (verbose || msg.rfind("outer iteration", 0) != 0) std::cerr << msg << '\n';
  };
}

void emit(const std::string& out, const std::string& format,
          const std::function<void(std::ostream&)>& markdown,
          const std::function<void(std::ostream&)>& csv) {
  const auto& writer = format == "csv" ? csv : markdown;
  if (out.empty() || out == "-") {
    writer(std::cout);
  } else {
    write_file(out, writer);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raviart-Thomas mixed methods on curved domains: convergence experiments"};
  app.require_subcommand(1);

  int problem = 1;
  std::string method_name;
  std::string trial_name = "both";
  std::vector<int> Ls;
  std::string out;
  std::string format = "md";
  std::string dump;
  bool direct = false;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "Solve one test problem on a sequence of meshes");
  run->add_option("--problem", problem, "Test problem 1..6")->required()->check(CLI::Range(1, 6));
  run->add_option("--method", method_name, "rt0 | hrt0 | rt1 (default: rt0 for 1-3, rt1 for 4-6)")
      ->check(CLI::IsMember({"rt0", "hrt0", "rt1"}));
  run->add_option("--trial", trial_name, "pg | galerkin | both")
      ->check(CLI::IsMember({"pg", "galerkin", "both"}));
  run->add_option("--L", Ls, "Mesh parameters, e.g. 2,4,8")->delimiter(',');
  run->add_option("--out", out, "Output path (default: stdout)");
  run->add_option("--format", format, "md | csv")->check(CLI::IsMember({"md", "csv"}));
  run->add_option("--dump-mesh", dump, "Write each mesh to <path>.L<L>");
  run->add_flag("--direct", direct, "Whole-system sparse LU instead of the default strategy");
  run->add_flag("-v,--verbose", verbose, "Log outer iterations");

  std::string domain_name = "ball";
  std::vector<double> nus{1.0, 1e-2, 1e-4, 1e-6, 1e-8};
  auto* stab = app.add_subcommand("stability", "RT1 Petrov-Galerkin errors as nu decreases (hollow domain)");
  stab->add_option("--domain", domain_name, "ball | ellipsoid")->check(CLI::IsMember({"ball", "ellipsoid"}));
  stab->add_option("--L", Ls, "Mesh parameters")->delimiter(',');
  stab->add_option("--nu", nus, "Reaction coefficients")->delimiter(',');
  stab->add_option("--out", out, "Output path (default: stdout)");
  stab->add_option("--format", format, "md | csv")->check(CLI::IsMember({"md", "csv"}));
  stab->add_flag("-v,--verbose", verbose, "Log outer iterations");

  bool hollow = false;
  auto* mesh_check = app.add_subcommand("mesh-check", "Generate meshes and verify their invariants");
  mesh_check->add_option("--L", Ls, "Mesh parameters")->delimiter(',');
  mesh_check->add_option("--domain", domain_name, "ball | ellipsoid")
      ->check(CLI::IsMember({"ball", "ellipsoid"}));
  mesh_check->add_flag("--hollow", hollow, "Hollow domain");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      TestProblemSpec spec = method_name.empty() ? test_problem(problem) : test_problem(problem, parse_method(method_name));
      spec.trials = parse_trials(trial_name);
      if (!Ls.empty()) spec.Ls = Ls;
      RunOptions options;
      options.strategy = direct ? SolveStrategy::Direct : SolveStrategy::Default;
      options.log = stderr_logger(verbose);
      options.dump_mesh = dump;
      const ReportTable table = run_problem(spec, options);
      emit(out, format, [&](std::ostream& o) { write_markdown(table, o); },
           [&](std::ostream& o) { write_csv(table, o); });
      return 0;
    }
    if (stab->parsed()) {
      const StabilityDomain domain = domain_name == "ball" ? StabilityDomain::Ball : StabilityDomain::Ellipsoid;
      if (Ls.empty()) Ls = domain == StabilityDomain::Ball ? std::vector<int>{2, 4, 8} : std::vector<int>{10};
      RunOptions options;
      options.log = stderr_logger(verbose);
      const auto tables = stability_sweep(domain, Ls, nus, options);
      emit(out, format,
           [&](std::ostream& o) {
             for (const auto& t : tables) write_markdown(t, o);
             o << "A * marks runs that reached the outer iteration cap.\n";
           },
           [&](std::ostream& o) {
             std::vector<ReportTable> reports;
             for (std::size_t j = 0; j < nus.size(); ++j) reports.push_back(stability_as_report(tables, j));
             write_csv(reports, o);
           });
      return 0;
    }
    if (mesh_check->parsed()) {
      if (Ls.empty()) Ls = {2, 4, 8, 16};
      const EllipsoidShape shape = domain_name == "ball" ? EllipsoidShape::ball() : reference_ellipsoid();
      bool ok = true;
      for (int L : Ls) {
        MeshParams p;
        p.L = L;
        p.spec = hollow ? DomainSpec::holed(shape) : DomainSpec::solid(shape);
        const MeshStatistics s = mesh_statistics(generate(p));
        const int expected = hollow ? 6 * L * L * L - 3 * L * L * L / 4 : 6 * L * L * L;
        const bool good = s.tets == expected && s.min_volume > 0.0 && s.max_curved_level_error <= 1e-12;
        ok = ok && good;
        std::cout << "L=" << L << " tets=" << s.tets << " (expected " << expected << ")"
                  << " vertices=" << s.vertices << " faces=" << s.faces
                  << " curved=" << s.curved_outer << "/" << s.curved_inner << " symmetry=" << s.symmetry
                  << " min_volume=" << s.min_volume << " volume=" << s.total_volume
                  << " min_dihedral_deg=" << s.min_dihedral * 180.0 / M_PI
                  << " max_level_error=" << s.max_curved_level_error << (good ? " ok" : " FAIL") << '\n';
      }
      return ok ? 0 : 1;
    }
    if (selftest->parsed()) {
      bool ok = true;
      for (const CheckResult& r : run_selftest()) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : ": " + r.detail) << '\n';
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
