#pragma once

// Linear solvers: sparse LU for the indefinite and non-symmetric systems,
// unpreconditioned conjugate gradients for the symmetric positive definite
// condensed systems, static condensation of the element-interior unknowns and
// the outer iteration that turns Galerkin solves into the Petrov-Galerkin
// solution for RT1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <Eigen/OrderingMethods>

#include "rtcurved/assembly.hpp"
#include "rtcurved/errors.hpp"
#include "rtcurved/spaces.hpp"

namespace rtcurved {

using Logger = std::function<void(const std::string&)>;

constexpr double kDirectResidualTolerance = 1e-10;

struct DirectResult {
  Eigen::VectorXd x;
  double relative_residual = 0.0;
  int refinement_steps = 0;
};

/// Sparse LU (COLAMD ordering, partial pivoting) with up to three steps of
/// iterative refinement. Throws if the factorisation fails or the relative
/// residual stays above kDirectResidualTolerance.
inline DirectResult direct_solve_detailed(const SparseSystem& system) {
  const int n = system.dim();
  DirectResult out;
  if (n == 0) return out;
  Eigen::SparseMatrix<double> a = system.matrix;  // column major copy
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw SingularSystemError("sparse LU failed: " + lu.lastErrorMessage());
  }
  const Eigen::VectorXd& b = system.rhs;
  const double bnorm = b.norm();
  out.x = lu.solve(b);
  if (bnorm == 0.0) {
    out.x.setZero();
    return out;
  }
  Eigen::VectorXd r = b - a * out.x;
  out.relative_residual = r.norm() / bnorm;
  while (out.relative_residual > kDirectResidualTolerance && out.refinement_steps < 3) {
    out.x += lu.solve(r);
    r = b - a * out.x;
    out.relative_residual = r.norm() / bnorm;
    ++out.refinement_steps;
  }
  if (!std::isfinite(out.relative_residual)) {
    throw SingularSystemError("sparse LU produced a non-finite solution");
  }
  if (out.relative_residual > kDirectResidualTolerance) {
    throw AccuracyError("direct solve residual " + std::to_string(out.relative_residual) +
                        " exceeds tolerance");
  }
  return out;
}

inline Eigen::VectorXd direct_solve(const SparseSystem& system) {
  return direct_solve_detailed(system).x;
}

struct CGOptions {
  double tolerance = 1e-12;  // relative to ||b||
  int max_iterations = 0;    // 0: 10 * n
  int energy_stride = 10;
};

struct CGResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  /// Energy 1/2 x'Ax - b'x sampled every energy_stride iterations.
  std::vector<double> energy;
};

/// Conjugate gradients without preconditioning, warm-started from x0.
inline CGResult cg_solve(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                         const CGOptions& options = {}) {
  const Eigen::Index n = b.size();
  if (a.rows() != n || a.cols() != n || x0.size() != n) {
    throw ParameterError("cg_solve: dimension mismatch");
  }
  CGResult res;
  res.x = x0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  const int max_it = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
  const double target = options.tolerance * bnorm;
  auto energy = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x) - b.dot(x); };

  Eigen::VectorXd r = b - a * res.x;
  Eigen::VectorXd p = r;
  Eigen::VectorXd ap(n);
  double rr = r.squaredNorm();
  if (options.energy_stride > 0) res.energy.push_back(energy(res.x));
  while (std::sqrt(rr) > target && res.iterations < max_it) {
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      throw SpdViolationError("conjugate gradients met p'Ap = " + std::to_string(pap) +
                              " at iteration " + std::to_string(res.iterations));
    }
    const double alpha = rr / pap;
    res.x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++res.iterations;
    if (options.energy_stride > 0 && res.iterations % options.energy_stride == 0) {
      res.energy.push_back(energy(res.x));
    }
  }
  res.relative_residual = (b - a * res.x).norm() / bnorm;
  res.converged = std::sqrt(rr) <= target;
  return res;
}

/// Static condensation of disjoint groups of unknowns whose block of the
/// matrix is block diagonal. The remaining ("skeleton") unknowns keep their
/// relative order.
class CondensedSystem {
 public:
  struct Group {
    std::vector<int> dofs;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // of the scaled block diag(scale) A diag(scale)
    Eigen::VectorXd scale;

    /// A_gg^{-1} b, through the scaled factorisation.
    template <typename Rhs>
    [[nodiscard]] Eigen::MatrixXd solve(const Rhs& b) const {
      return scale.asDiagonal() * lu.solve(scale.asDiagonal() * b);
    }
    std::vector<int> skeleton_cols;  // reduced indices coupled from the group rows
    Eigen::MatrixXd a_gs;            // group rows x skeleton_cols
  };

  CondensedSystem() = default;

  CondensedSystem(const SparseSystem& full, const std::vector<std::vector<int>>& groups) {
    const int n = full.dim();
    n_full_ = n;
    group_of_.assign(n, -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (int i : groups[g]) {
        if (i < 0 || i >= n || group_of_[i] >= 0) {
          throw ParameterError("condensation groups must be disjoint valid indices");
        }
        group_of_[i] = static_cast<int>(g);
      }
    }
    reduced_of_.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      if (group_of_[i] < 0) {
        reduced_of_[i] = static_cast<int>(full_of_.size());
        full_of_.push_back(i);
      }
    }
    const int m = static_cast<int>(full_of_.size());
    const SparseMatrix& a = full.matrix;
    const Eigen::SparseMatrix<double> ac = a;  // column access for the skeleton-to-group block

    groups_.resize(groups.size());
    std::vector<Triplet> trip;
    for (int i = 0; i < n; ++i) {
      if (group_of_[i] >= 0) continue;
      for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
        if (group_of_[it.col()] < 0) trip.emplace_back(reduced_of_[i], reduced_of_[it.col()], it.value());
      }
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      Group& grp = groups_[g];
      grp.dofs = groups[g];
      const int gs = static_cast<int>(grp.dofs.size());
      std::unordered_map<int, int> local;
      for (int l = 0; l < gs; ++l) local[grp.dofs[l]] = l;

      Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(gs, gs);
      std::vector<std::pair<int, std::pair<int, double>>> gs_entries;  // (row, (reduced col, v))
      for (int l = 0; l < gs; ++l) {
        for (SparseMatrix::InnerIterator it(a, grp.dofs[l]); it; ++it) {
          const int c = static_cast<int>(it.col());
          if (group_of_[c] == static_cast<int>(g)) {
            agg(l, local[c]) += it.value();
          } else if (group_of_[c] >= 0) {
            throw ParameterError("condensation groups are coupled to each other");
          } else {
            gs_entries.push_back({l, {reduced_of_[c], it.value()}});
          }
        }
      }
      for (const auto& e : gs_entries) grp.skeleton_cols.push_back(e.second.first);
      std::sort(grp.skeleton_cols.begin(), grp.skeleton_cols.end());
      grp.skeleton_cols.erase(std::unique(grp.skeleton_cols.begin(), grp.skeleton_cols.end()),
                              grp.skeleton_cols.end());
      auto col_slot = [&](int r) {
        return static_cast<int>(
            std::lower_bound(grp.skeleton_cols.begin(), grp.skeleton_cols.end(), r) -
            grp.skeleton_cols.begin());
      };
      grp.a_gs = Eigen::MatrixXd::Zero(gs, static_cast<Eigen::Index>(grp.skeleton_cols.size()));
      for (const auto& e : gs_entries) grp.a_gs(e.first, col_slot(e.second.first)) += e.second.second;

      // Skeleton rows coupled to the group, from the columns of the group.
      std::vector<int> rows;
      std::vector<std::pair<int, std::pair<int, double>>> sg_entries;  // (reduced row, (l, v))
      for (int l = 0; l < gs; ++l) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(ac, grp.dofs[l]); it; ++it) {
          const int r = static_cast<int>(it.row());
          if (group_of_[r] >= 0) continue;
          sg_entries.push_back({reduced_of_[r], {l, it.value()}});
          rows.push_back(reduced_of_[r]);
        }
      }
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
      Eigen::MatrixXd asg = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), gs);
      for (const auto& e : sg_entries) {
        const auto slot = std::lower_bound(rows.begin(), rows.end(), e.first) - rows.begin();
        asg(slot, e.second.first) += e.second.second;
      }

      // Interior blocks mix DOFs of very different magnitudes (moments and
      // values, nu and 1/nu terms); factor the symmetrically scaled block.
      const Eigen::VectorXd diag = agg.diagonal().cwiseAbs();
      if (!(diag.minCoeff() > 0.0)) {
        throw SingularSystemError("condensation block " + std::to_string(g) + " has a zero diagonal");
      }
      grp.scale = diag.cwiseSqrt().cwiseInverse();
      grp.lu.compute(grp.scale.asDiagonal() * agg * grp.scale.asDiagonal());
      if (!(grp.lu.rcond() > 1e-13)) {
        throw SingularSystemError("condensation block " + std::to_string(g) + " is singular");
      }
      const Eigen::MatrixXd schur = asg * grp.solve(grp.a_gs);
      for (Eigen::Index i = 0; i < schur.rows(); ++i) {
        for (Eigen::Index j = 0; j < schur.cols(); ++j) {
          if (schur(i, j) != 0.0) trip.emplace_back(rows[i], grp.skeleton_cols[j], -schur(i, j));
        }
      }
      row_blocks_.push_back({std::move(rows), std::move(asg)});
    }
    reduced_.matrix.resize(m, m);
    reduced_.matrix.setFromTriplets(trip.begin(), trip.end());
    reduced_.matrix.makeCompressed();
    reduced_.symmetric = full.symmetric;
    reduced_.rhs = reduce_rhs(full.rhs);
  }

  [[nodiscard]] const SparseSystem& reduced() const { return reduced_; }
  [[nodiscard]] int full_size() const { return n_full_; }
  [[nodiscard]] int reduced_size() const { return static_cast<int>(full_of_.size()); }
  [[nodiscard]] const std::vector<int>& skeleton() const { return full_of_; }
  [[nodiscard]] const std::vector<Group>& groups() const { return groups_; }

  /// b_S - sum_g A_Sg A_gg^{-1} b_g.
  [[nodiscard]] Eigen::VectorXd reduce_rhs(const Eigen::VectorXd& b) const {
    Eigen::VectorXd r(reduced_size());
    for (int i = 0; i < reduced_size(); ++i) r[i] = b[full_of_[i]];
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const Group& grp = groups_[g];
      Eigen::VectorXd bg(grp.dofs.size());
      for (std::size_t l = 0; l < grp.dofs.size(); ++l) bg[l] = b[grp.dofs[l]];
      const Eigen::VectorXd corr = row_blocks_[g].second * grp.solve(bg);
      for (std::size_t i = 0; i < row_blocks_[g].first.size(); ++i) r[row_blocks_[g].first[i]] -= corr[i];
    }
    return r;
  }

  /// Full solution from the skeleton solution: x_g = A_gg^{-1} (b_g - A_gS x_S).
  [[nodiscard]] Eigen::VectorXd recover(const Eigen::VectorXd& xs, const Eigen::VectorXd& b) const {
    Eigen::VectorXd x(n_full_);
    for (int i = 0; i < reduced_size(); ++i) x[full_of_[i]] = xs[i];
    for (const Group& grp : groups_) {
      Eigen::VectorXd rhs(grp.dofs.size());
      for (std::size_t l = 0; l < grp.dofs.size(); ++l) rhs[l] = b[grp.dofs[l]];
      for (std::size_t j = 0; j < grp.skeleton_cols.size(); ++j) {
        rhs -= grp.a_gs.col(static_cast<Eigen::Index>(j)) * xs[grp.skeleton_cols[j]];
      }
      const Eigen::VectorXd xg = grp.solve(rhs);
      for (std::size_t l = 0; l < grp.dofs.size(); ++l) x[grp.dofs[l]] = xg[l];
    }
    return x;
  }

  [[nodiscard]] Eigen::VectorXd restrict_to_skeleton(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r(reduced_size());
    for (int i = 0; i < reduced_size(); ++i) r[i] = x[full_of_[i]];
    return r;
  }

 private:
  int n_full_ = 0;
  std::vector<int> group_of_;
  std::vector<int> reduced_of_;
  std::vector<int> full_of_;
  std::vector<Group> groups_;
  std::vector<std::pair<std::vector<int>, Eigen::MatrixXd>> row_blocks_;  // A_Sg per group
  SparseSystem reduced_;
};

/// Eliminates the per-tet scalar unknown of an RT0 or HRT0 system (requires nu > 0).
inline CondensedSystem condense_cells(const SparseSystem& system, const DofMap& dm) {
  if (dm.local_scalar != 1) throw ParameterError("condense_cells: expected one scalar DOF per tet");
  for (int t = 0; t < dm.n_scalar; ++t) {
    const int s = dm.scalar_index(t, 0);
    if (system.matrix.coeff(s, s) == 0.0) {
      throw ParameterError("cell condensation needs nu > 0 (zero diagonal in the scalar block)");
    }
  }
  std::vector<std::vector<int>> groups(dm.n_scalar);
  for (int t = 0; t < dm.n_scalar; ++t) groups[t] = {dm.scalar_index(t, 0)};
  return {system, groups};
}

inline CondensedSystem condense_rt0(const SparseSystem& system, const DofMap& dm) {
  if (dm.method != Method::RT0) throw ParameterError("condense_rt0: not an RT0 DOF map");
  return condense_cells(system, dm);
}

/// Eliminates the 3 interior flux moments and 4 scalar values of each RT1 tet.
inline CondensedSystem condense_rt1(const SparseSystem& system, const DofMap& dm) {
  if (dm.method != Method::RT1) throw ParameterError("condense_rt1: not an RT1 DOF map");
  const int nt = dm.n_interior_flux / 3;
  std::vector<std::vector<int>> groups(nt);
  for (int t = 0; t < nt; ++t) {
    auto& g = groups[t];
    for (int j = 0; j < 3; ++j) g.push_back(dm.n_face_dofs + 3 * t + j);
    for (int a = 0; a < 4; ++a) g.push_back(dm.scalar_index(t, a));
  }
  return {system, groups};
}

/// Solves a condensed SPD system by CG and expands to the full vector.
inline Eigen::VectorXd condensed_cg_solve(const CondensedSystem& cs, const Eigen::VectorXd& full_rhs,
                                          const Eigen::VectorXd& warm, const CGOptions& options,
                                          CGResult* stats = nullptr) {
  const Eigen::VectorXd rs = cs.reduce_rhs(full_rhs);
  CGResult res = cg_solve(cs.reduced().matrix, rs, warm, options);
  if (!res.converged) {
    throw AccuracyError("conjugate gradients did not converge (relative residual " +
                        std::to_string(res.relative_residual) + " after " +
                        std::to_string(res.iterations) + " iterations)");
  }
  Eigen::VectorXd x = cs.recover(res.x, full_rhs);
  if (stats != nullptr) *stats = std::move(res);
  return x;
}

struct OuterOptions {
  double tolerance = 1e-5;
  int max_iterations = 100;
  CGOptions cg;
  Logger log;
};

struct OuterResult {
  Eigen::VectorXd x;        // Q-space flux DOFs and scalar DOFs of the last iterate
  Eigen::VectorXd derived;  // curved-face DOFs of its P-interpolate
  int iterations = 0;       // N_it
  bool capped = false;
  std::vector<double> increments;
  int cg_iterations = 0;
};

/// Petrov-Galerkin RT1 solution by repeated Galerkin solves: each step solves
/// the condensed enriched Galerkin system with the right-hand side corrected
/// by the previous iterate's P-interpolation defect, warm-started from the
/// previous skeleton solution. Stops when the largest change over free face
/// DOFs and derived DOFs drops to the tolerance.
inline OuterResult outer_iteration(const TetMesh& mesh, const DofMap& dm, const ProblemData& data,
                                   const OuterOptions& options = {}) {
  if (dm.method != Method::RT1) throw ParameterError("outer_iteration needs an RT1 DOF map");
  DofMap galerkin = dm;
  galerkin.trial = TrialKind::Galerkin;
  const SparseSystem sys = assemble_rt1_enriched(mesh, galerkin, data);
  const CondensedSystem cs = condense_rt1(sys, galerkin);

  OuterResult out;
  CGResult stats;
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(cs.reduced_size());
  out.x = condensed_cg_solve(cs, sys.rhs, warm, options.cg, &stats);
  out.cg_iterations += stats.iterations;
  out.derived = p_interpolate(dm, out.x);
  if (!dm.uses_constraints() || dm.constraints.empty()) {
    out.iterations = 1;
    out.increments.push_back(0.0);
    return out;
  }
  for (int n = 1; n <= options.max_iterations; ++n) {
    const Eigen::VectorXd rhs = outer_rhs(mesh, dm, data.nu, sys.rhs, out.derived);
    warm = cs.restrict_to_skeleton(out.x);
    Eigen::VectorXd x = condensed_cg_solve(cs, rhs, warm, options.cg, &stats);
    out.cg_iterations += stats.iterations;
    Eigen::VectorXd derived = p_interpolate(dm, x);
    double inc = (derived - out.derived).cwiseAbs().maxCoeff();
    if (dm.n_face_dofs > 0) {
      inc = std::max(inc, (x.head(dm.n_face_dofs) - out.x.head(dm.n_face_dofs)).cwiseAbs().maxCoeff());
    }
    out.x = std::move(x);
    out.derived = std::move(derived);
    out.increments.push_back(inc);
    out.iterations = n;
    if (options.log) {
      options.log("outer iteration " + std::to_string(n) + ": increment " + std::to_string(inc) +
                  ", cg " + std::to_string(stats.iterations));
    }
    if (inc <= options.tolerance) return out;
  }
  out.capped = true;
  return out;
}

}  // namespace rtcurved
