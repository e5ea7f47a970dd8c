#pragma once

// Fast invariant checks runnable from the command line.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rtcurved/experiments.hpp"

namespace rtcurved {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline CheckResult check(const std::string& name, const std::function<std::string()>& body) {
  try {
    const std::string failure = body();
    return {name, failure.empty(), failure};
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace detail

inline std::vector<CheckResult> run_selftest() {
  std::vector<CheckResult> out;

  out.push_back(detail::check("mesh census L=2,4", [] {
    for (int L : {2, 4}) {
      for (bool hollow : {false, true}) {
        MeshParams p;
        p.L = L;
        p.spec = hollow ? DomainSpec::holed(EllipsoidShape::ball()) : DomainSpec::solid(EllipsoidShape::ball());
        const MeshStatistics s = mesh_statistics(generate(p));
        const int expected = hollow ? 6 * L * L * L - 3 * L * L * L / 4 : 6 * L * L * L;
        if (s.tets != expected) return "wrong tet count at L=" + std::to_string(L);
        if (!(s.min_volume > 0.0)) return std::string("nonpositive volume");
        if (s.max_curved_level_error > 1e-12) return std::string("curved vertex off the surface");
      }
    }
    return std::string();
  }));

  out.push_back(detail::check("tet quadrature exactness", [] {
    for (int d = 1; d <= detail::kMaxDegree; ++d) {
      const TetRule& r = tet_rule(d);
      for (int a = 0; a <= d; ++a) {
        for (int b = 0; a + b <= d; ++b) {
          for (int c = 0; a + b + c <= d; ++c) {
            double q = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) {
              const auto& x = r.points[i];
              q += r.weights[i] * std::pow(x[1], a) * std::pow(x[2], b) * std::pow(x[3], c);
            }
            q /= 6.0;
            const double exact = detail::factorial(a) * detail::factorial(b) * detail::factorial(c) /
                                 detail::factorial(a + b + c + 3);
            if (std::abs(q - exact) > 1e-13 * exact) return "degree " + std::to_string(d) + " fails";
          }
        }
      }
    }
    return std::string();
  }));

  out.push_back(detail::check("exact fields vs finite differences", [] {
    const DomainSpec spec = DomainSpec::holed({0.6, 0.8, 1.0});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.2, 0.5);
    for (Profile prof : {Profile::G1, Profile::G2, Profile::G3}) {
      const Vec3 x(dist(rng), dist(rng), dist(rng));
      const double h = 1e-4;
      const Fields f = exact_fields(spec, {prof, 1.0}, x);
      Vec3 grad;
      double lap = 0.0;
      for (int d = 0; d < 3; ++d) {
        const Vec3 e = h * Vec3::Unit(d);
        const double up = exact_fields(spec, {prof, 1.0}, x + e).u;
        const double um = exact_fields(spec, {prof, 1.0}, x - e).u;
        grad[d] = (up - um) / (2 * h);
        lap += (up - 2 * f.u + um) / (h * h);
      }
      if ((grad - f.p).norm() > 1e-4 * f.p.norm()) return std::string("gradient mismatch for ") + to_string(prof);
      if (std::abs(lap - f.divp) > 1e-4 * std::abs(f.divp)) return std::string("laplacian mismatch for ") + to_string(prof);
    }
    return std::string();
  }));

  out.push_back(detail::check("convergence-order regression", [] {
    const std::vector<double> hs{0.5, 0.25, 0.125, 0.0625};
    const double s = eoc({0.62009878e-1, 0.30260267e-1, 0.15024034e-1, 0.74926747e-2}, hs);
    if (std::abs(s - 1.0157) > 1e-3) return "slope " + std::to_string(s);
    return std::string();
  }));

  out.push_back(detail::check("unit-cube affine patch (RT0)", [] {
    TestProblemSpec spec;
    spec.id = "patch";
    spec.mode = MeshMode::UnitCube;
    spec.nu = 1.0;
    spec.dirichlet_data = true;
    const Vec3 b(0.3, -0.7, 1.1);
    spec.exact = [b](const Vec3& x) {
      Fields f;
      f.u = 0.5 + b.dot(x);
      f.p = b;
      f.f = f.u;
      return f;
    };
    spec.trials = {TrialKind::Galerkin};
    spec.Ls = {2};
    const Solution s = solve_problem(spec, TrialKind::Galerkin, 2);
    const ErrorNorms e = error_norms(s.mesh, s.dofs, s.x, spec.exact);
    if (e.p > 1e-10 || e.div > 1e-10) return "flux error " + std::to_string(e.p);
    for (int t = 0; t < s.mesh.num_tets(); ++t) {
      const double mean = spec.exact(s.mesh.centroid(t)).u;
      if (std::abs(s.x[s.dofs.scalar_index(t, 0)] - mean) > 1e-10) return std::string("cell mean mismatch");
    }
    return std::string();
  }));

  return out;
}

}  // namespace rtcurved
