#pragma once

// Local Raviart-Thomas spaces RT_k (k = 0, 1), their Petrov-Galerkin
// constrained trial variants on tetrahedra touching a curved Neumann face,
// the Hermite potential basis of HRT0 and the global DOF numbering.
//
// Fields are stored as coefficient vectors over a scaled monomial basis in
// the local frame xh = (x - centre) / scale:
//   k = 0: e_1, e_2, e_3, xh                         (4)
//   k = 1: e_c, e_c xh_d (c, d = 1..3), xh xh_j      (15)
//
// Flux degrees of freedom always use the face's global normal (outward from
// the lower-numbered adjacent tet) and, for k = 1, the three face points in
// the order of the face's ascending global vertex indices. Shared faces
// therefore carry identical functionals in both neighbours.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "rtcurved/errors.hpp"
#include "rtcurved/geometry.hpp"
#include "rtcurved/mesh.hpp"
#include "rtcurved/quadrature.hpp"

namespace rtcurved {

enum class Method { RT0, RT1, HRT0 };
enum class TrialKind { PetrovGalerkin, Galerkin };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::RT0: return "rt0";
    case Method::RT1: return "rt1";
    case Method::HRT0: return "hrt0";
  }
  return "?";
}

inline const char* to_string(TrialKind t) {
  return t == TrialKind::PetrovGalerkin ? "pg" : "galerkin";
}

inline int flux_order(Method m) { return m == Method::RT1 ? 1 : 0; }

/// Number of constraint points on a curved face: (k+2)(k+1)/2.
constexpr int constraint_count(int k) { return (k + 2) * (k + 1) / 2; }

constexpr double kMaxLocalCondition = 1e12;

struct LocalFrame {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  [[nodiscard]] Vec3 to_local(const Vec3& x) const { return (x - center) / scale; }

  static LocalFrame of_tet(const TetMesh& mesh, int t) {
    const auto p = mesh.tet_vertices(t);
    LocalFrame fr;
    fr.center = 0.25 * (p[0] + p[1] + p[2] + p[3]);
    double h = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) h = std::max(h, (p[i] - p[j]).norm());
    }
    fr.scale = h;
    return fr;
  }
};

template <int K>
struct RTMonomials {
  static_assert(K == 0 || K == 1);
  static constexpr int kDim = K == 0 ? 4 : 15;
  using Values = std::array<Vec3, kDim>;
  using Divergences = std::array<double, kDim>;

  static Values values(const Vec3& xh) {
    Values v;
    if constexpr (K == 0) {
      v[0] = Vec3::UnitX();
      v[1] = Vec3::UnitY();
      v[2] = Vec3::UnitZ();
      v[3] = xh;
    } else {
      for (int c = 0; c < 3; ++c) {
        const Vec3 e = Vec3::Unit(c);
        v[4 * c] = e;
        for (int d = 0; d < 3; ++d) v[4 * c + 1 + d] = xh[d] * e;
      }
      for (int j = 0; j < 3; ++j) v[12 + j] = xh[j] * xh;
    }
    return v;
  }

  static Divergences divergences(const Vec3& xh, double scale) {
    Divergences d{};
    if constexpr (K == 0) {
      d[3] = 3.0 / scale;
    } else {
      for (int c = 0; c < 3; ++c) d[4 * c + 1 + c] = 1.0 / scale;
      for (int j = 0; j < 3; ++j) d[12 + j] = 4.0 * xh[j] / scale;
    }
    return d;
  }
};

template <int K>
using LocalMatrix = Eigen::Matrix<double, RTMonomials<K>::kDim, RTMonomials<K>::kDim>;
template <int K>
using LocalVector = Eigen::Matrix<double, RTMonomials<K>::kDim, 1>;

/// A local RT_k basis: column j of `coeffs` holds basis field j in monomials.
template <int K>
class RTBasis {
 public:
  static constexpr int kDim = RTMonomials<K>::kDim;

  RTBasis() = default;
  RTBasis(LocalFrame frame, const LocalMatrix<K>& coeffs) : frame_(frame), coeffs_(coeffs) {}

  [[nodiscard]] const LocalFrame& frame() const { return frame_; }
  [[nodiscard]] const LocalMatrix<K>& coeffs() const { return coeffs_; }

  [[nodiscard]] std::array<Vec3, kDim> values(const Vec3& x) const {
    const auto mono = RTMonomials<K>::values(frame_.to_local(x));
    std::array<Vec3, kDim> out;
    for (int j = 0; j < kDim; ++j) {
      Vec3 v = Vec3::Zero();
      for (int m = 0; m < kDim; ++m) v += coeffs_(m, j) * mono[m];
      out[j] = v;
    }
    return out;
  }

  [[nodiscard]] std::array<double, kDim> divergences(const Vec3& x) const {
    const auto mono = RTMonomials<K>::divergences(frame_.to_local(x), frame_.scale);
    std::array<double, kDim> out;
    for (int j = 0; j < kDim; ++j) {
      double v = 0.0;
      for (int m = 0; m < kDim; ++m) v += coeffs_(m, j) * mono[m];
      out[j] = v;
    }
    return out;
  }

  /// Field with the given local DOF values.
  [[nodiscard]] Vec3 field(const Vec3& x, const LocalVector<K>& dofs) const {
    const auto v = values(x);
    Vec3 out = Vec3::Zero();
    for (int j = 0; j < kDim; ++j) out += dofs[j] * v[j];
    return out;
  }

  [[nodiscard]] double divergence(const Vec3& x, const LocalVector<K>& dofs) const {
    const auto d = divergences(x);
    double out = 0.0;
    for (int j = 0; j < kDim; ++j) out += dofs[j] * d[j];
    return out;
  }

 private:
  LocalFrame frame_;
  LocalMatrix<K> coeffs_ = LocalMatrix<K>::Identity();
};

/// The k = 1 face points of face f, ordered like the face's sorted vertices.
inline std::array<Vec3, 3> rt1_face_points(const TetMesh& mesh, int face) {
  const auto p = mesh.face_vertices(face);
  const auto rule = face_gauss_points(1);
  std::array<Vec3, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = map_point<3>(p, rule.points[i]);
  return out;
}

inline Vec3 face_centroid(const TetMesh& mesh, int face) {
  const auto p = mesh.face_vertices(face);
  return (p[0] + p[1] + p[2]) / 3.0;
}

/// Points anchoring the flux DOFs of a face: the centroid (k=0) or the three
/// Gauss points (k=1).
inline std::vector<Vec3> face_dof_points(const TetMesh& mesh, int face, int k) {
  if (k == 0) return {face_centroid(mesh, face)};
  const auto pts = rt1_face_points(mesh, face);
  return {pts.begin(), pts.end()};
}

/// Matrix of the local DOF functionals applied to the monomials: N(i, m).
template <int K>
LocalMatrix<K> dof_functionals(const TetMesh& mesh, int t, const LocalFrame& frame) {
  LocalMatrix<K> n = LocalMatrix<K>::Zero();
  for (int f = 0; f < 4; ++f) {
    const int face = mesh.tet_faces[t][f];
    const Vec3 normal = mesh.face_normal(face);
    if constexpr (K == 0) {
      // The normal trace of an RT0 field is constant on a face.
      const auto mono = RTMonomials<0>::values(frame.to_local(face_centroid(mesh, face)));
      const double area = mesh.face_area(face);
      for (int m = 0; m < 4; ++m) n(f, m) = area * normal.dot(mono[m]);
    } else {
      const auto pts = rt1_face_points(mesh, face);
      for (int j = 0; j < 3; ++j) {
        const auto mono = RTMonomials<1>::values(frame.to_local(pts[j]));
        for (int m = 0; m < 15; ++m) n(3 * f + j, m) = normal.dot(mono[m]);
      }
    }
  }
  if constexpr (K == 1) {
    const auto& rule = tet_rule(2);
    const auto verts = mesh.tet_vertices(t);
    const double vol = mesh.volumes[t];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto mono = RTMonomials<1>::values(frame.to_local(map_point<4>(verts, rule.points[q])));
      const double w = rule.weights[q] * vol;
      for (int j = 0; j < 3; ++j) {
        for (int m = 0; m < 15; ++m) n(12 + j, m) += w * mono[m][j];
      }
    }
  }
  return n;
}

inline double condition_number(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

/// RT0 basis w_F = s_F (x - V_F) / (3|T|), dual to the global-normal fluxes.
inline RTBasis<0> build_rt0_local(const TetMesh& mesh, int t) {
  const double vol = mesh.volumes.at(t);
  if (!(vol > 0.0)) throw DegeneracyError("degenerate tetrahedron " + std::to_string(t));
  const LocalFrame frame = LocalFrame::of_tet(mesh, t);
  const auto p = mesh.tet_vertices(t);
  LocalMatrix<0> c;
  for (int f = 0; f < 4; ++f) {
    const double s = mesh.face_sign(t, f) / (3.0 * vol);
    const Vec3 shift = frame.center - p[f];
    for (int d = 0; d < 3; ++d) c(d, f) = s * shift[d];
    c(3, f) = s * frame.scale;
  }
  return {frame, c};
}

/// RT1 basis obtained by inverting the 15x15 generalised Vandermonde matrix.
inline RTBasis<1> build_rt1_local(const TetMesh& mesh, int t) {
  if (!(mesh.volumes.at(t) > 0.0)) {
    throw DegeneracyError("degenerate tetrahedron " + std::to_string(t));
  }
  const LocalFrame frame = LocalFrame::of_tet(mesh, t);
  const LocalMatrix<1> n = dof_functionals<1>(mesh, t, frame);
  const double cond = condition_number(n);
  if (cond > kMaxLocalCondition) {
    throw DegeneracyError("RT1 Vandermonde matrix ill-conditioned on tet " + std::to_string(t) +
                          " (cond " + std::to_string(cond) + ")");
  }
  return {frame, n.inverse()};
}

template <int K>
RTBasis<K> build_rt_local(const TetMesh& mesh, int t) {
  if constexpr (K == 0) {
    return build_rt0_local(mesh, t);
  } else {
    return build_rt1_local(mesh, t);
  }
}

/// Point constraint r(P) . n(P) = 0 on a constrained trial field.
struct PointConstraint {
  Vec3 point;
  Vec3 normal;
};

/// Trial fields on a tet with a curved Neumann face: the retained local DOFs
/// keep their duality while the curved-face DOFs are traded for point
/// constraints on the true surface.
template <int K>
struct ConstrainedTrialBasis {
  static constexpr int kDim = RTMonomials<K>::kDim;
  static constexpr int kCurved = constraint_count(K);

  int tet = -1;
  int local_face = -1;
  std::array<int, kCurved> curved{};                 // local DOF indices on the curved face
  std::array<int, kDim - kCurved> retained{};        // all other local DOF indices
  std::array<PointConstraint, kCurved> constraints{};
  LocalFrame frame;
  Eigen::Matrix<double, kDim, kDim - kCurved> fields;  // monomial coefficients
  /// Curved-face DOF values of the constrained field as a linear map of the
  /// local DOF vector (columns of curved DOFs are zero).
  Eigen::Matrix<double, kCurved, kDim> derived;

  [[nodiscard]] Vec3 value(int j, const Vec3& x) const {
    const auto mono = RTMonomials<K>::values(frame.to_local(x));
    Vec3 v = Vec3::Zero();
    for (int m = 0; m < kDim; ++m) v += fields(m, j) * mono[m];
    return v;
  }
};

template <int K>
std::array<int, constraint_count(K)> curved_local_dofs(int local_face) {
  std::array<int, constraint_count(K)> out{};
  for (int j = 0; j < constraint_count(K); ++j) out[j] = constraint_count(K) * local_face + j;
  return out;
}

/// Constraint points on the true surface for the curved face `local_face` of tet t.
inline std::vector<PointConstraint> surface_constraints(const TetMesh& mesh, int t, int local_face,
                                                        int k) {
  const Face& face = mesh.faces[mesh.tet_faces[t][local_face]];
  if (face.tag.kind != FaceKind::Curved) {
    throw ParameterError("surface_constraints: face is not curved");
  }
  const DomainSpec& spec = mesh.params.spec;
  const double level = surface_level(face.tag.surface);
  std::vector<PointConstraint> out;
  for (const Vec3& m : face_dof_points(mesh, mesh.tet_faces[t][local_face], k)) {
    const Vec3 p = ray_surface_point(spec, m, level);
    out.push_back({p, surface_normal(spec, face.tag.surface, p)});
  }
  return out;
}

template <int K>
ConstrainedTrialBasis<K> build_constrained_basis(const TetMesh& mesh, int t, int local_face,
                                                 const std::vector<PointConstraint>& constraints) {
  constexpr int D = RTMonomials<K>::kDim;
  constexpr int M = constraint_count(K);
  if (static_cast<int>(constraints.size()) != M) {
    throw ParameterError("constrained basis needs " + std::to_string(M) + " constraint points");
  }
  ConstrainedTrialBasis<K> out;
  out.tet = t;
  out.local_face = local_face;
  out.curved = curved_local_dofs<K>(local_face);
  out.frame = LocalFrame::of_tet(mesh, t);
  for (int l = 0; l < M; ++l) out.constraints[l] = constraints[l];
  {
    int n = 0;
    for (int i = 0; i < D; ++i) {
      if (std::find(out.curved.begin(), out.curved.end(), i) == out.curved.end()) {
        out.retained[n++] = i;
      }
    }
  }

  const LocalMatrix<K> n = dof_functionals<K>(mesh, t, out.frame);
  LocalMatrix<K> sys;
  for (int r = 0; r < D - M; ++r) sys.row(r) = n.row(out.retained[r]);
  for (int l = 0; l < M; ++l) {
    const auto mono = RTMonomials<K>::values(out.frame.to_local(constraints[l].point));
    for (int m = 0; m < D; ++m) sys(D - M + l, m) = constraints[l].normal.dot(mono[m]);
  }
  const double cond = condition_number(sys);
  if (cond > kMaxLocalCondition) {
    throw DegeneracyError("constraint system singular on tet " + std::to_string(t) +
                          " (cond " + std::to_string(cond) + ")");
  }
  const LocalMatrix<K> inv = sys.inverse();
  out.fields = inv.leftCols(D - M);
  out.derived.setZero();
  for (int l = 0; l < M; ++l) {
    for (int j = 0; j < D - M; ++j) {
      out.derived(l, out.retained[j]) = n.row(out.curved[l]).dot(out.fields.col(j));
    }
  }
  return out;
}

/// Hermite potential basis {1, psi_F} with psi_F = s_F |x - V_F|^2 / (6|T|);
/// grad psi_F is the RT0 field w_F and lap psi_F = s_F / |T|.
struct HermiteLocalBasis {
  std::array<Vec3, 4> opposite;
  std::array<double, 4> sign;
  double volume = 0.0;

  static HermiteLocalBasis of_tet(const TetMesh& mesh, int t) {
    HermiteLocalBasis b;
    b.opposite = mesh.tet_vertices(t);
    for (int f = 0; f < 4; ++f) b.sign[f] = mesh.face_sign(t, f);
    b.volume = mesh.volumes[t];
    return b;
  }

  [[nodiscard]] std::array<double, 5> values(const Vec3& x) const {
    std::array<double, 5> v{1.0, 0, 0, 0, 0};
    for (int f = 0; f < 4; ++f) v[f + 1] = sign[f] * (x - opposite[f]).squaredNorm() / (6.0 * volume);
    return v;
  }
  [[nodiscard]] std::array<Vec3, 5> gradients(const Vec3& x) const {
    std::array<Vec3, 5> g;
    g[0] = Vec3::Zero();
    for (int f = 0; f < 4; ++f) g[f + 1] = sign[f] * (x - opposite[f]) / (3.0 * volume);
    return g;
  }
  [[nodiscard]] std::array<double, 5> laplacians() const {
    std::array<double, 5> l{0.0, 0, 0, 0, 0};
    for (int f = 0; f < 4; ++f) l[f + 1] = sign[f] / volume;
    return l;
  }
};

/// Derived curved-face DOFs of one constrained tet, stored as a dynamic map.
struct ConstraintRecord {
  int tet = -1;
  int local_face = -1;
  std::vector<int> curved;                // local DOF indices
  std::vector<PointConstraint> points;
  Eigen::MatrixXd derived;                // m x local_flux
};

enum class FaceRole { Free, Pinned, CurvedNeumann };

struct DofMap {
  Method method = Method::RT0;
  TrialKind trial = TrialKind::PetrovGalerkin;
  int k = 0;
  int per_face = 1;
  int local_flux = 4;
  int local_scalar = 1;
  int n_face_dofs = 0;
  int n_interior_flux = 0;
  int n_scalar = 0;
  int free_faces = 0;
  std::vector<FaceRole> face_role;
  std::vector<int> face_base;                  // -1 unless Free
  std::vector<std::array<int, 15>> tet_flux;   // local flux DOF -> global (-1: none)
  std::vector<int> constraint_slot;            // per tet: index into constraints or -1
  std::vector<ConstraintRecord> constraints;

  [[nodiscard]] int n_flux() const { return n_face_dofs + n_interior_flux; }
  [[nodiscard]] int size() const { return n_flux() + n_scalar; }
  [[nodiscard]] int scalar_index(int t, int a) const { return n_flux() + t * local_scalar + a; }
  [[nodiscard]] int flux_index(int t, int i) const { return tet_flux[t][i]; }
  [[nodiscard]] bool uses_constraints() const { return trial == TrialKind::PetrovGalerkin; }
  [[nodiscard]] int constraints_per_face() const { return constraint_count(k); }
};

template <int K>
ConstraintRecord make_constraint_record(const TetMesh& mesh, int t, int local_face) {
  const auto basis =
      build_constrained_basis<K>(mesh, t, local_face, surface_constraints(mesh, t, local_face, K));
  ConstraintRecord rec;
  rec.tet = t;
  rec.local_face = local_face;
  rec.curved.assign(basis.curved.begin(), basis.curved.end());
  rec.points.assign(basis.constraints.begin(), basis.constraints.end());
  rec.derived = basis.derived;
  return rec;
}

inline DofMap build_dof_map(const TetMesh& mesh, Method method, TrialKind trial) {
  DofMap dm;
  dm.method = method;
  dm.trial = trial;
  dm.k = flux_order(method);
  dm.per_face = dm.k == 0 ? 1 : 3;
  dm.local_flux = dm.k == 0 ? 4 : 15;
  dm.local_scalar = method == Method::RT1 ? 4 : 1;

  dm.face_role.resize(mesh.faces.size());
  dm.face_base.assign(mesh.faces.size(), -1);
  int next = 0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const FaceTag& tag = mesh.faces[f].tag;
    FaceRole role = FaceRole::Free;
    if (tag.kind == FaceKind::Symmetry) role = FaceRole::Pinned;
    if (tag.kind == FaceKind::Flat && tag.condition == BoundaryCondition::Neumann) {
      role = FaceRole::Pinned;
    }
    if (tag.is_curved_neumann()) role = FaceRole::CurvedNeumann;
    dm.face_role[f] = role;
    if (role == FaceRole::Free) {
      dm.face_base[f] = next;
      next += dm.per_face;
      ++dm.free_faces;
    }
  }
  dm.n_face_dofs = next;
  dm.n_interior_flux = dm.k == 1 ? 3 * mesh.num_tets() : 0;
  dm.n_scalar = dm.local_scalar * mesh.num_tets();

  dm.tet_flux.assign(mesh.tets.size(), {});
  dm.constraint_slot.assign(mesh.tets.size(), -1);
  for (int t = 0; t < mesh.num_tets(); ++t) {
    auto& row = dm.tet_flux[t];
    row.fill(-1);
    for (int f = 0; f < 4; ++f) {
      const int face = mesh.tet_faces[t][f];
      const int base = dm.face_base[face];
      for (int j = 0; j < dm.per_face; ++j) row[dm.per_face * f + j] = base < 0 ? -1 : base + j;
      if (dm.face_role[face] == FaceRole::CurvedNeumann) {
        dm.constraint_slot[t] = static_cast<int>(dm.constraints.size());
        dm.constraints.push_back(dm.k == 0 ? make_constraint_record<0>(mesh, t, f)
                                           : make_constraint_record<1>(mesh, t, f));
      }
    }
    if (dm.k == 1) {
      for (int j = 0; j < 3; ++j) row[12 + j] = dm.n_face_dofs + 3 * t + j;
    }
  }
  return dm;
}

/// Local flux DOFs of tet t read from a global vector. With `constrained`,
/// curved-face DOFs of constrained tets are filled from the constraint map
/// (a P-space field); otherwise they are zero (a Q-space field).
inline Eigen::VectorXd local_flux_dofs(const DofMap& dm, int t, const Eigen::VectorXd& x,
                                       bool constrained) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(dm.local_flux);
  for (int i = 0; i < dm.local_flux; ++i) {
    const int g = dm.tet_flux[t][i];
    if (g >= 0) a[i] = x[g];
  }
  const int slot = dm.constraint_slot[t];
  if (constrained && slot >= 0) {
    const ConstraintRecord& rec = dm.constraints[slot];
    const Eigen::VectorXd d = rec.derived * a;
    for (std::size_t l = 0; l < rec.curved.size(); ++l) a[rec.curved[l]] = d[l];
  }
  return a;
}

/// Local trial-to-standard transform: standard local DOFs = E * (retained DOFs).
inline Eigen::MatrixXd trial_transform(const DofMap& dm, int t) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(dm.local_flux, dm.local_flux);
  const int slot = dm.constraint_slot[t];
  if (slot < 0) return e;
  const ConstraintRecord& rec = dm.constraints[slot];
  for (std::size_t l = 0; l < rec.curved.size(); ++l) {
    const int c = rec.curved[l];
    e.col(c).setZero();
    if (dm.uses_constraints()) e.row(c) = rec.derived.row(static_cast<Eigen::Index>(l));
  }
  return e;
}

/// P-interpolate of a Q-space flux: the retained DOFs are shared with the
/// input; the returned vector lists the curved-face DOFs of every constrained
/// tet (constraint record order), which now satisfy the surface constraints.
inline Eigen::VectorXd p_interpolate(const DofMap& dm, const Eigen::VectorXd& x) {
  const int m = dm.constraints_per_face();
  Eigen::VectorXd out(static_cast<Eigen::Index>(dm.constraints.size()) * m);
  for (std::size_t s = 0; s < dm.constraints.size(); ++s) {
    const ConstraintRecord& rec = dm.constraints[s];
    const Eigen::VectorXd a = local_flux_dofs(dm, rec.tet, x, false);
    out.segment(static_cast<Eigen::Index>(s) * m, m) = rec.derived * a;
  }
  return out;
}

/// Local DOFs of a P-space field given its global vector and derived values.
inline Eigen::VectorXd local_flux_dofs(const DofMap& dm, int t, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& derived) {
  Eigen::VectorXd a = local_flux_dofs(dm, t, x, false);
  const int slot = dm.constraint_slot[t];
  if (slot >= 0) {
    const ConstraintRecord& rec = dm.constraints[slot];
    const int m = dm.constraints_per_face();
    for (int l = 0; l < m; ++l) a[rec.curved[l]] = derived[slot * m + l];
  }
  return a;
}

}  // namespace rtcurved
