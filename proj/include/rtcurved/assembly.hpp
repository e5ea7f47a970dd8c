#pragma once

// Element kernels and global assembly of the three discretisations:
//   mixed RT_k   (p,q) + (u, div q) = 0,  -(div p, v) + nu (u,v) = (f,v)
//   enriched RT1 the mixed system with 2/nu (div p, div q) added to the flux
//                equation, symmetric positive definite for the Galerkin trial
//   HRT0         a_h(w,v) = (grad w, grad v) - (lap w, v) + (w, lap v) + nu (w,v)
// Trial fields on constrained tets are mapped through trial_transform(), the
// test space is always the standard one.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rtcurved/errors.hpp"
#include "rtcurved/geometry.hpp"
#include "rtcurved/mesh.hpp"
#include "rtcurved/quadrature.hpp"
#include "rtcurved/spaces.hpp"

namespace rtcurved {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;
using ScalarFunction = std::function<double(const Vec3&)>;

struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  bool symmetric = false;

  [[nodiscard]] int dim() const { return static_cast<int>(matrix.rows()); }
};

/// Coefficients and data of one solve.
struct ProblemData {
  double nu = 1.0;
  ScalarFunction source;     // f, evaluated by closed form on all of Omega_h
  ScalarFunction dirichlet;  // optional u on Dirichlet faces; empty means u = 0
};

constexpr int kSourceDegree = 6;

inline int bilinear_degree(int k) { return k == 0 ? 2 : 4; }

template <int K>
struct MixedElement {
  static constexpr int kFlux = RTMonomials<K>::kDim;
  static constexpr int kScalar = K == 0 ? 1 : 4;

  LocalMatrix<K> mass = LocalMatrix<K>::Zero();
  LocalMatrix<K> divdiv = LocalMatrix<K>::Zero();
  Eigen::Matrix<double, kScalar, kFlux> div = Eigen::Matrix<double, kScalar, kFlux>::Zero();
  Eigen::Matrix<double, kScalar, kScalar> scalar_mass =
      Eigen::Matrix<double, kScalar, kScalar>::Zero();
  Eigen::Matrix<double, kScalar, 1> source = Eigen::Matrix<double, kScalar, 1>::Zero();
  LocalVector<K> source_div = LocalVector<K>::Zero();
  LocalVector<K> boundary = LocalVector<K>::Zero();  // Dirichlet data term
};

/// Scalar basis of V_h^k at barycentric coordinates: 1 or (lambda_0..3).
template <int K>
Eigen::Matrix<double, MixedElement<K>::kScalar, 1> scalar_basis(const std::array<double, 4>& bary) {
  if constexpr (K == 0) {
    return Eigen::Matrix<double, 1, 1>(1.0);
  } else {
    return {bary[0], bary[1], bary[2], bary[3]};
  }
}

template <int K>
MixedElement<K> mixed_element(const TetMesh& mesh, int t, const RTBasis<K>& basis,
                              const ProblemData* data, int degree = bilinear_degree(K)) {
  MixedElement<K> el;
  const auto verts = mesh.tet_vertices(t);
  const double vol = mesh.volumes[t];

  const auto& rule = tet_rule(degree);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec3 x = map_point<4>(verts, rule.points[q]);
    const double w = rule.weights[q] * vol;
    const auto val = basis.values(x);
    const auto dv = basis.divergences(x);
    const auto lam = scalar_basis<K>(rule.points[q]);
    for (int i = 0; i < el.kFlux; ++i) {
      for (int j = i; j < el.kFlux; ++j) {
        el.mass(i, j) += w * val[i].dot(val[j]);
        el.divdiv(i, j) += w * dv[i] * dv[j];
      }
      for (int a = 0; a < el.kScalar; ++a) el.div(a, i) += w * lam[a] * dv[i];
    }
    el.scalar_mass += w * lam * lam.transpose();
  }
  for (int i = 0; i < el.kFlux; ++i) {
    for (int j = 0; j < i; ++j) {
      el.mass(i, j) = el.mass(j, i);
      el.divdiv(i, j) = el.divdiv(j, i);
    }
  }

  if (data == nullptr) return el;
  if (data->source) {
    const auto& src = tet_rule(kSourceDegree);
    for (std::size_t q = 0; q < src.size(); ++q) {
      const Vec3 x = map_point<4>(verts, src.points[q]);
      const double wf = src.weights[q] * vol * data->source(x);
      el.source += wf * scalar_basis<K>(src.points[q]);
      const auto dv = basis.divergences(x);
      for (int i = 0; i < el.kFlux; ++i) el.source_div[i] += wf * dv[i];
    }
  }
  if (data->dirichlet) {
    const auto& tri = triangle_rule(kSourceDegree);
    for (int f = 0; f < 4; ++f) {
      const int face = mesh.tet_faces[t][f];
      if (!mesh.faces[face].tag.is_dirichlet()) continue;
      const auto fv = mesh.face_vertices(face);
      const double area = mesh.face_area(face);
      const Vec3 n = mesh.outward_normal(t, f);
      for (std::size_t q = 0; q < tri.size(); ++q) {
        const Vec3 x = map_point<3>(fv, tri.points[q]);
        const double w = tri.weights[q] * area * data->dirichlet(x);
        const auto val = basis.values(x);
        for (int i = 0; i < el.kFlux; ++i) el.boundary[i] += w * val[i].dot(n);
      }
    }
  }
  return el;
}

namespace detail {

inline void require_method(const DofMap& dm, std::initializer_list<Method> allowed,
                           const char* who) {
  for (Method m : allowed) {
    if (dm.method == m) return;
  }
  throw ParameterError(std::string(who) + ": DOF map built for the wrong method");
}

inline SparseSystem finish(int n, std::vector<Triplet>& triplets, Eigen::VectorXd rhs,
                           bool symmetric) {
  SparseSystem s;
  s.matrix.resize(n, n);
  s.matrix.setFromTriplets(triplets.begin(), triplets.end());
  s.matrix.makeCompressed();
  s.rhs = std::move(rhs);
  s.symmetric = symmetric;
  return s;
}

enum class MixedForm { Standard, Enriched };

template <int K>
SparseSystem assemble_mixed_impl(const TetMesh& mesh, const DofMap& dm, const ProblemData& data,
                                 MixedForm form) {
  constexpr int D = RTMonomials<K>::kDim;
  constexpr int S = MixedElement<K>::kScalar;
  const int n = dm.size();
  const double nu = data.nu;
  const bool enriched = form == MixedForm::Enriched;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_tets()) * (D + S) * (D + S));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  for (int t = 0; t < mesh.num_tets(); ++t) {
    const RTBasis<K> basis = build_rt_local<K>(mesh, t);
    const MixedElement<K> el = mixed_element<K>(mesh, t, basis, &data);
    const Eigen::MatrixXd e = trial_transform(dm, t);
    LocalMatrix<K> flux_block = el.mass;
    if (enriched) flux_block += (2.0 / nu) * el.divdiv;
    const Eigen::MatrixXd flux_trial = flux_block * e;
    const Eigen::MatrixXd div_trial = el.div * e;
    // (u, div q) enters with + in the standard form and - in the enriched one.
    const double coupling = enriched ? -1.0 : 1.0;

    for (int i = 0; i < D; ++i) {
      const int gi = dm.flux_index(t, i);
      if (gi < 0) continue;
      for (int j = 0; j < D; ++j) {
        const int gj = dm.flux_index(t, j);
        if (gj >= 0 && flux_trial(i, j) != 0.0) trip.emplace_back(gi, gj, flux_trial(i, j));
      }
      for (int a = 0; a < S; ++a) trip.emplace_back(gi, dm.scalar_index(t, a), coupling * el.div(a, i));
      rhs[gi] += el.boundary[i];
      if (enriched) rhs[gi] -= (2.0 / nu) * el.source_div[i];
    }
    for (int a = 0; a < S; ++a) {
      const int ga = dm.scalar_index(t, a);
      for (int j = 0; j < D; ++j) {
        const int gj = dm.flux_index(t, j);
        if (gj >= 0 && div_trial(a, j) != 0.0) trip.emplace_back(ga, gj, -div_trial(a, j));
      }
      for (int b = 0; b < S; ++b) {
        if (nu != 0.0) trip.emplace_back(ga, dm.scalar_index(t, b), nu * el.scalar_mass(a, b));
      }
      rhs[ga] += el.source[a];
    }
  }
  const bool symmetric = enriched && !dm.uses_constraints();
  return finish(n, trip, std::move(rhs), symmetric);
}

}  // namespace detail

/// Mixed system (flux equation, then scalar equation) for RT0 or RT1.
inline SparseSystem assemble_mixed(const TetMesh& mesh, const DofMap& dm, const ProblemData& data) {
  detail::require_method(dm, {Method::RT0, Method::RT1}, "assemble_mixed");
  if (data.nu < 0.0) throw ParameterError("reaction coefficient must be nonnegative");
  return dm.k == 0 ? detail::assemble_mixed_impl<0>(mesh, dm, data, detail::MixedForm::Standard)
                   : detail::assemble_mixed_impl<1>(mesh, dm, data, detail::MixedForm::Standard);
}

inline SparseSystem assemble_rt0(const TetMesh& mesh, const DofMap& dm, const ProblemData& data) {
  detail::require_method(dm, {Method::RT0}, "assemble_rt0");
  return assemble_mixed(mesh, dm, data);
}

/// Enriched RT1 system; symmetric positive definite for the Galerkin trial.
inline SparseSystem assemble_rt1_enriched(const TetMesh& mesh, const DofMap& dm,
                                          const ProblemData& data) {
  detail::require_method(dm, {Method::RT1}, "assemble_rt1_enriched");
  if (!(data.nu > 0.0)) throw ParameterError("enriched RT1 formulation requires nu > 0");
  return detail::assemble_mixed_impl<1>(mesh, dm, data, detail::MixedForm::Enriched);
}

/// Local HRT0 matrix K(v, w) = a_h(w, v) over the basis {1, psi_0..psi_3}.
struct HermiteElement {
  Eigen::Matrix<double, 5, 5> grad = Eigen::Matrix<double, 5, 5>::Zero();
  Eigen::Matrix<double, 5, 5> mass = Eigen::Matrix<double, 5, 5>::Zero();
  Eigen::Matrix<double, 5, 5> lap_test = Eigen::Matrix<double, 5, 5>::Zero();  // (lap w, v) at (v, w)
  Eigen::Matrix<double, 5, 1> source = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::Matrix<double, 5, 1> boundary = Eigen::Matrix<double, 5, 1>::Zero();

  [[nodiscard]] Eigen::Matrix<double, 5, 5> form(double nu) const {
    return grad - lap_test + lap_test.transpose() + nu * mass;
  }
};

inline HermiteElement hermite_element(const TetMesh& mesh, int t, const ProblemData* data,
                                      int degree = 4) {
  HermiteElement el;
  const HermiteLocalBasis hb = HermiteLocalBasis::of_tet(mesh, t);
  const auto verts = mesh.tet_vertices(t);
  const double vol = mesh.volumes[t];
  const auto lap = hb.laplacians();
  const auto& rule = tet_rule(degree);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec3 x = map_point<4>(verts, rule.points[q]);
    const double w = rule.weights[q] * vol;
    const auto v = hb.values(x);
    const auto g = hb.gradients(x);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        el.grad(i, j) += w * g[i].dot(g[j]);
        el.mass(i, j) += w * v[i] * v[j];
        el.lap_test(i, j) += w * lap[j] * v[i];
      }
    }
  }
  if (data == nullptr) return el;
  if (data->source) {
    const auto& src = tet_rule(kSourceDegree);
    for (std::size_t q = 0; q < src.size(); ++q) {
      const Vec3 x = map_point<4>(verts, src.points[q]);
      const double wf = src.weights[q] * vol * data->source(x);
      const auto v = hb.values(x);
      for (int i = 0; i < 5; ++i) el.source[i] += wf * v[i];
    }
  }
  if (data->dirichlet) {
    const auto& tri = triangle_rule(kSourceDegree);
    for (int f = 0; f < 4; ++f) {
      const int face = mesh.tet_faces[t][f];
      if (!mesh.faces[face].tag.is_dirichlet()) continue;
      const auto fv = mesh.face_vertices(face);
      const double area = mesh.face_area(face);
      const Vec3 n = mesh.outward_normal(t, f);
      for (std::size_t q = 0; q < tri.size(); ++q) {
        const Vec3 x = map_point<3>(fv, tri.points[q]);
        const double w = tri.weights[q] * area * data->dirichlet(x);
        const auto g = hb.gradients(x);
        for (int i = 0; i < 5; ++i) el.boundary[i] += w * g[i].dot(n);
      }
    }
  }
  return el;
}

/// Maps local Hermite slot (0 = constant, 1 + f = face f) to a global index.
inline int hermite_index(const DofMap& dm, int t, int slot) {
  return slot == 0 ? dm.scalar_index(t, 0) : dm.flux_index(t, slot - 1);
}

inline Eigen::Matrix<double, 5, 5> hermite_trial_transform(const DofMap& dm, int t) {
  Eigen::Matrix<double, 5, 5> e = Eigen::Matrix<double, 5, 5>::Zero();
  e(0, 0) = 1.0;
  e.bottomRightCorner<4, 4>() = trial_transform(dm, t);
  return e;
}

inline SparseSystem assemble_hrt0(const TetMesh& mesh, const DofMap& dm, const ProblemData& data) {
  detail::require_method(dm, {Method::HRT0}, "assemble_hrt0");
  if (data.nu < 0.0) throw ParameterError("reaction coefficient must be nonnegative");
  const int n = dm.size();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_tets()) * 25);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const HermiteElement el = hermite_element(mesh, t, &data);
    const Eigen::Matrix<double, 5, 5> k = el.form(data.nu) * hermite_trial_transform(dm, t);
    for (int i = 0; i < 5; ++i) {
      const int gi = hermite_index(dm, t, i);
      if (gi < 0) continue;
      for (int j = 0; j < 5; ++j) {
        const int gj = hermite_index(dm, t, j);
        if (gj >= 0 && k(i, j) != 0.0) trip.emplace_back(gi, gj, k(i, j));
      }
      rhs[gi] += el.source[i] + el.boundary[i];
    }
  }
  return detail::finish(n, trip, std::move(rhs), false);
}

/// First tetrahedron having the origin as a vertex.
inline int origin_tet(const TetMesh& mesh) {
  for (int t = 0; t < mesh.num_tets(); ++t) {
    for (int v : mesh.tets[t]) {
      if (mesh.vertices[v].isZero(0.0)) return t;
    }
  }
  throw MeshError("no tetrahedron touches the origin");
}

/// Fixes the scalar DOF of tet t0 to zero by row/column replacement.
inline SparseSystem pin_constant(SparseSystem system, const TetMesh& mesh, const DofMap& dm,
                                 int t0) {
  if (dm.local_scalar != 1) throw ParameterError("pin_constant needs one scalar DOF per tet");
  if (t0 < 0 || t0 >= mesh.num_tets()) throw ParameterError("pin_constant: tet out of range");
  bool touches = false;
  for (int v : mesh.tets[t0]) touches = touches || mesh.vertices[v].isZero(0.0);
  if (!touches) {
    throw ParameterError("pin_constant: tet " + std::to_string(t0) + " does not contain the origin");
  }
  const int s = dm.scalar_index(t0, 0);
  system.matrix.prune([s](Eigen::Index r, Eigen::Index c, double) { return r != s && c != s; });
  system.matrix.coeffRef(s, s) = 1.0;
  system.matrix.makeCompressed();
  system.rhs[s] = 0.0;
  return system;
}

/// Right-hand side of the n-th outer step: the Galerkin enriched right-hand
/// side corrected by d = pbar - p, the difference between the previous
/// Q-space iterate and its P-interpolate. d lives only on constrained tets,
/// where it equals minus the derived curved-face DOFs.
inline Eigen::VectorXd outer_rhs(const TetMesh& mesh, const DofMap& dm, double nu,
                                 const Eigen::VectorXd& base_rhs,
                                 const Eigen::VectorXd& derived_prev) {
  detail::require_method(dm, {Method::RT1}, "outer_rhs");
  Eigen::VectorXd rhs = base_rhs;
  const int m = dm.constraints_per_face();
  for (std::size_t s = 0; s < dm.constraints.size(); ++s) {
    const ConstraintRecord& rec = dm.constraints[s];
    const int t = rec.tet;
    LocalVector<1> d = LocalVector<1>::Zero();
    for (int l = 0; l < m; ++l) {
      d[rec.curved[l]] = -derived_prev[static_cast<Eigen::Index>(s) * m + l];
    }
    if (d.isZero(0.0)) continue;
    const RTBasis<1> basis = build_rt1_local(mesh, t);
    const MixedElement<1> el = mixed_element<1>(mesh, t, basis, nullptr);
    const LocalVector<1> g = (el.mass + (2.0 / nu) * el.divdiv) * d;
    const Eigen::Vector4d fcorr = el.div * d;
    for (int i = 0; i < 15; ++i) {
      const int gi = dm.flux_index(t, i);
      if (gi >= 0) rhs[gi] += g[i];
    }
    for (int a = 0; a < 4; ++a) rhs[dm.scalar_index(t, a)] -= fcorr[a];
  }
  return rhs;
}

}  // namespace rtcurved
