#pragma once

// Structured straight-edged tetrahedral meshes of an ellipsoid octant.
//
// The lattice (i,j,k)/L of the unit cube octant is pushed onto the octant of
// the ellipsoid by u -> (|u|_inf / |u|_2) u followed by the per-axis scaling
// (a, b, c), so lattice vertex (i,j,k) sits exactly on eta = max(i,j,k)/L.
// Each lattice cell is split into six Kuhn tetrahedra along its main diagonal.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "rtcurved/errors.hpp"
#include "rtcurved/geometry.hpp"

namespace rtcurved {

enum class MeshMode { Ellipsoid, UnitCube };

struct MeshParams {
  int L = 2;
  DomainSpec spec = DomainSpec::solid(EllipsoidShape::ball());
  MeshMode mode = MeshMode::Ellipsoid;

  [[nodiscard]] double h() const { return 1.0 / L; }
};

enum class FaceKind : std::uint8_t { Interior, Curved, Symmetry, Flat };
enum class BoundaryCondition : std::uint8_t { Neumann, Dirichlet };

/// Symmetry faces use plane 0..2 (x=0, y=0, z=0). Flat faces (unit-cube
/// validation meshes) use 0..5 where 3..5 are x=1, y=1, z=1.
struct FaceTag {
  FaceKind kind = FaceKind::Interior;
  Surface surface = Surface::Outer;
  BoundaryCondition condition = BoundaryCondition::Neumann;
  int plane = -1;

  [[nodiscard]] bool is_curved_neumann() const {
    return kind == FaceKind::Curved && condition == BoundaryCondition::Neumann;
  }
  [[nodiscard]] bool is_dirichlet() const {
    return (kind == FaceKind::Curved || kind == FaceKind::Flat) &&
           condition == BoundaryCondition::Dirichlet;
  }

  [[nodiscard]] std::string str() const {
    switch (kind) {
      case FaceKind::Interior: return "interior";
      case FaceKind::Curved:
        return std::string("curved-") + to_string(surface) +
               (condition == BoundaryCondition::Neumann ? "-neumann" : "-dirichlet");
      case FaceKind::Symmetry: return "symmetry-" + std::string(1, "xyz"[plane]);
      case FaceKind::Flat:
        return std::string("flat-") + "xyz"[plane % 3] + (plane < 3 ? "0" : "1") +
               (condition == BoundaryCondition::Neumann ? "-neumann" : "-dirichlet");
    }
    return "?";
  }
};

struct Face {
  std::array<int, 3> vertices;  // ascending global indices
  std::array<int, 2> tets{-1, -1};   // tets[0] < tets[1]; tets[1] = -1 on the boundary
  std::array<int, 2> local{-1, -1};  // local face index inside each adjacent tet
  FaceTag tag;

  [[nodiscard]] bool boundary() const { return tets[1] < 0; }
};

struct TetMesh {
  MeshParams params;
  BoundaryAssignment assignment;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;       // positively oriented
  std::vector<std::array<int, 4>> tet_faces;  // local face f is opposite local vertex f
  std::vector<double> volumes;
  std::vector<Face> faces;

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices.size()); }
  [[nodiscard]] int num_tets() const { return static_cast<int>(tets.size()); }
  [[nodiscard]] int num_faces() const { return static_cast<int>(faces.size()); }

  /// +1 when the face's global normal is the outward normal of tet t.
  [[nodiscard]] int face_sign(int t, int local_face) const {
    return faces[tet_faces[t][local_face]].tets[0] == t ? 1 : -1;
  }

  [[nodiscard]] std::array<Vec3, 4> tet_vertices(int t) const {
    const auto& v = tets[t];
    return {vertices[v[0]], vertices[v[1]], vertices[v[2]], vertices[v[3]]};
  }

  [[nodiscard]] std::array<Vec3, 3> face_vertices(int f) const {
    const auto& v = faces[f].vertices;
    return {vertices[v[0]], vertices[v[1]], vertices[v[2]]};
  }

  [[nodiscard]] double face_area(int f) const {
    const auto p = face_vertices(f);
    return 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
  }

  /// Unit normal of face f, outward with respect to faces[f].tets[0].
  [[nodiscard]] Vec3 face_normal(int f) const {
    const auto p = face_vertices(f);
    Vec3 n = (p[1] - p[0]).cross(p[2] - p[0]).normalized();
    const Face& face = faces[f];
    const Vec3 opposite = vertices[tets[face.tets[0]][face.local[0]]];
    if (n.dot(p[0] - opposite) < 0.0) n = -n;
    return n;
  }

  /// Outward unit normal of local face `local_face` of tet t.
  [[nodiscard]] Vec3 outward_normal(int t, int local_face) const {
    return face_sign(t, local_face) * face_normal(tet_faces[t][local_face]);
  }

  [[nodiscard]] Vec3 centroid(int t) const {
    const auto p = tet_vertices(t);
    return 0.25 * (p[0] + p[1] + p[2] + p[3]);
  }
};

inline double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

namespace detail {

inline void build_faces(TetMesh& mesh) {
  struct Entry {
    std::array<int, 3> key;
    int tet;
    int local;
  };
  std::vector<Entry> entries;
  entries.reserve(4 * mesh.tets.size());
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& v = mesh.tets[t];
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> key{};
      int n = 0;
      for (int i = 0; i < 4; ++i) {
        if (i != f) key[n++] = v[i];
      }
      std::sort(key.begin(), key.end());
      entries.push_back({key, t, f});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.key, x.tet) < std::tie(y.key, y.tet);
  });

  mesh.faces.clear();
  mesh.tet_faces.assign(mesh.tets.size(), {-1, -1, -1, -1});
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i;
    while (j < entries.size() && entries[j].key == entries[i].key) ++j;
    if (j - i > 2) throw MeshError("face shared by more than two tetrahedra");
    Face face;
    face.vertices = entries[i].key;
    const int id = static_cast<int>(mesh.faces.size());
    for (std::size_t k = i; k < j; ++k) {
      face.tets[k - i] = entries[k].tet;
      face.local[k - i] = entries[k].local;
      mesh.tet_faces[entries[k].tet][entries[k].local] = id;
    }
    mesh.faces.push_back(face);
    i = j;
  }
}

constexpr double kLevelTolerance = 1e-12;

inline FaceTag classify_boundary_face(const TetMesh& mesh, const Face& face) {
  FaceTag tag;
  const auto& p = mesh.params;
  std::array<Vec3, 3> x{};
  for (int i = 0; i < 3; ++i) x[i] = mesh.vertices[face.vertices[i]];

  if (p.mode == MeshMode::UnitCube) {
    for (int d = 0; d < 3; ++d) {
      for (int side = 0; side < 2; ++side) {
        const double target = side;
        if (x[0][d] == target && x[1][d] == target && x[2][d] == target) {
          tag.kind = FaceKind::Flat;
          tag.plane = d + 3 * side;
          tag.condition = BoundaryCondition::Dirichlet;
          return tag;
        }
      }
    }
    throw MeshError("unit-cube boundary face not on a cube face");
  }

  std::array<double, 3> e{};
  for (int i = 0; i < 3; ++i) e[i] = eta(p.spec.shape, x[i]);
  auto all_at = [&](double level) {
    return std::all_of(e.begin(), e.end(),
                       [&](double v) { return std::abs(v - level) < kLevelTolerance; });
  };
  if (all_at(1.0)) {
    tag.kind = FaceKind::Curved;
    tag.surface = Surface::Outer;
    return tag;
  }
  if (p.spec.hollow && all_at(DomainSpec::inner_ratio)) {
    tag.kind = FaceKind::Curved;
    tag.surface = Surface::Inner;
    return tag;
  }
  for (int d = 0; d < 3; ++d) {
    if (x[0][d] == 0.0 && x[1][d] == 0.0 && x[2][d] == 0.0) {
      tag.kind = FaceKind::Symmetry;
      tag.plane = d;
      return tag;
    }
  }
  throw MeshError("boundary face with vertices on different surfaces (eta = " +
                  std::to_string(e[0]) + ", " + std::to_string(e[1]) + ", " +
                  std::to_string(e[2]) + ")");
}

inline void classify_faces(TetMesh& mesh) {
  for (Face& face : mesh.faces) {
    face.tag = face.boundary() ? classify_boundary_face(mesh, face) : FaceTag{};
  }
  for (int t = 0; t < mesh.num_tets(); ++t) {
    int curved = 0;
    for (int f = 0; f < 4; ++f) {
      curved += mesh.faces[mesh.tet_faces[t][f]].tag.kind == FaceKind::Curved ? 1 : 0;
    }
    if (curved > 1) {
      throw MeshError("tetrahedron " + std::to_string(t) + " has more than one curved face");
    }
  }
}

inline Vec3 map_lattice_point(const MeshParams& p, int i, int j, int k) {
  const Vec3 u(static_cast<double>(i) / p.L, static_cast<double>(j) / p.L,
               static_cast<double>(k) / p.L);
  if (p.mode == MeshMode::UnitCube) return u;
  const double inf = u.cwiseAbs().maxCoeff();
  const double two = u.norm();
  const Vec3 v = two > 0.0 ? Vec3((inf / two) * u) : Vec3::Zero();
  const auto& s = p.spec.shape;
  return {s.a * v[0], s.b * v[1], s.c * v[2]};
}

}  // namespace detail

/// Applies Neumann/Dirichlet conditions to the curved faces.
inline void tag_faces(TetMesh& mesh, const BoundaryAssignment& assignment) {
  mesh.assignment = assignment;
  for (Face& face : mesh.faces) {
    if (face.tag.kind == FaceKind::Curved) {
      face.tag.condition = assignment.is_neumann(face.tag.surface) ? BoundaryCondition::Neumann
                                                                   : BoundaryCondition::Dirichlet;
    }
  }
}

inline TetMesh generate(const MeshParams& params,
                        const BoundaryAssignment& assignment = BoundaryAssignment{}) {
  const int L = params.L;
  if (L < 2 || L % 2 != 0) {
    throw ParameterError("mesh parameter L must be even and >= 2, got " + std::to_string(L));
  }
  if (params.mode == MeshMode::UnitCube && params.spec.hollow) {
    throw ParameterError("unit-cube meshes cannot be hollow");
  }
  if (params.mode == MeshMode::Ellipsoid) params.spec.shape.validate();
  const bool hollow = params.mode == MeshMode::Ellipsoid && params.spec.hollow;
  const int half = L / 2;
  const int n1 = L + 1;
  auto lattice_id = [n1](int i, int j, int k) { return (i * n1 + j) * n1 + k; };

  TetMesh mesh;
  mesh.params = params;

  // Kuhn permutations; the lattice orientation of each is fixed by its parity.
  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  static constexpr std::array<bool, 6> kOdd{false, true, true, false, false, true};

  std::vector<int> used(static_cast<std::size_t>(n1) * n1 * n1, -1);
  std::vector<std::array<int, 4>> lattice_tets;
  lattice_tets.reserve(6 * static_cast<std::size_t>(L) * L * L);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      for (int k = 0; k < L; ++k) {
        if (hollow && i < half && j < half && k < half) continue;
        for (int p = 0; p < 6; ++p) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = lattice_id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[kPerms[p][s]];
            tet[s + 1] = lattice_id(c[0], c[1], c[2]);
          }
          // Lattice volume of (c0, c0+e_a, c0+e_a+e_b, c0+1) is sign(perm)/6.
          if (kOdd[p]) std::swap(tet[2], tet[3]);
          lattice_tets.push_back(tet);
        }
      }
    }
  }

  // Compact numbering of the lattice vertices actually used.
  for (const auto& tet : lattice_tets) {
    for (int v : tet) used[v] = 0;
  }
  for (int i = 0; i <= L; ++i) {
    for (int j = 0; j <= L; ++j) {
      for (int k = 0; k <= L; ++k) {
        const int id = lattice_id(i, j, k);
        if (used[id] < 0) continue;
        used[id] = mesh.num_vertices();
        mesh.vertices.push_back(detail::map_lattice_point(params, i, j, k));
      }
    }
  }

  mesh.tets.reserve(lattice_tets.size());
  mesh.volumes.reserve(lattice_tets.size());
  for (const auto& lt : lattice_tets) {
    std::array<int, 4> tet{used[lt[0]], used[lt[1]], used[lt[2]], used[lt[3]]};
    const double vol = signed_volume(mesh.vertices[tet[0]], mesh.vertices[tet[1]],
                                     mesh.vertices[tet[2]], mesh.vertices[tet[3]]);
    if (!(vol > 0.0)) {
      throw MeshError("nonpositive volume " + std::to_string(vol) + " in tetrahedron " +
                      std::to_string(mesh.tets.size()));
    }
    mesh.tets.push_back(tet);
    mesh.volumes.push_back(vol);
  }

  detail::build_faces(mesh);
  detail::classify_faces(mesh);
  tag_faces(mesh, assignment);
  return mesh;
}

/// Same mesh with tets renumbered: new tet i is old tet perm[i].
inline TetMesh permute_tets(const TetMesh& mesh, const std::vector<int>& perm) {
  if (perm.size() != mesh.tets.size()) throw ParameterError("permutation size mismatch");
  TetMesh out;
  out.params = mesh.params;
  out.vertices = mesh.vertices;
  for (int old : perm) {
    out.tets.push_back(mesh.tets.at(old));
    out.volumes.push_back(mesh.volumes.at(old));
  }
  detail::build_faces(out);
  detail::classify_faces(out);
  tag_faces(out, mesh.assignment);
  return out;
}

struct MeshStatistics {
  int tets = 0;
  int vertices = 0;
  int faces = 0;
  int interior_faces = 0;
  int curved_outer = 0;
  int curved_inner = 0;
  int curved_neumann = 0;
  int symmetry = 0;
  int flat = 0;
  double min_volume = 0.0;
  double max_volume = 0.0;
  double total_volume = 0.0;
  double min_dihedral = 0.0;  // radians
  double max_curved_level_error = 0.0;
};

inline double min_dihedral_angle(const std::array<Vec3, 4>& p) {
  std::array<Vec3, 4> n;
  for (int f = 0; f < 4; ++f) {
    const Vec3& a = p[(f + 1) % 4];
    const Vec3& b = p[(f + 2) % 4];
    const Vec3& c = p[(f + 3) % 4];
    Vec3 m = (b - a).cross(c - a).normalized();
    if (m.dot(a - p[f]) < 0.0) m = -m;
    n[f] = m;
  }
  double best = std::numbers::pi;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double c = std::clamp(-n[i].dot(n[j]), -1.0, 1.0);
      best = std::min(best, std::acos(c));
    }
  }
  return best;
}

inline MeshStatistics mesh_statistics(const TetMesh& mesh) {
  MeshStatistics s;
  s.tets = mesh.num_tets();
  s.vertices = mesh.num_vertices();
  s.faces = mesh.num_faces();
  s.min_volume = std::numeric_limits<double>::infinity();
  s.max_volume = 0.0;
  s.min_dihedral = std::numbers::pi;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    s.min_volume = std::min(s.min_volume, mesh.volumes[t]);
    s.max_volume = std::max(s.max_volume, mesh.volumes[t]);
    s.total_volume += mesh.volumes[t];
    s.min_dihedral = std::min(s.min_dihedral, min_dihedral_angle(mesh.tet_vertices(t)));
  }
  for (const Face& f : mesh.faces) {
    switch (f.tag.kind) {
      case FaceKind::Interior: ++s.interior_faces; break;
      case FaceKind::Symmetry: ++s.symmetry; break;
      case FaceKind::Flat: ++s.flat; break;
      case FaceKind::Curved: {
        (f.tag.surface == Surface::Outer ? s.curved_outer : s.curved_inner)++;
        if (f.tag.condition == BoundaryCondition::Neumann) ++s.curved_neumann;
        const double level = surface_level(f.tag.surface);
        for (int v : f.vertices) {
          s.max_curved_level_error =
              std::max(s.max_curved_level_error,
                       std::abs(eta(mesh.params.spec.shape, mesh.vertices[v]) - level));
        }
        break;
      }
    }
  }
  return s;
}

/// Plain-text dump: "nv nt nf", vertices, tets, then faces with their tag.
inline void dump_mesh(const TetMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open mesh dump file: " + path);
  out << mesh.num_vertices() << ' ' << mesh.num_tets() << ' ' << mesh.num_faces() << '\n';
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& t : mesh.tets) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  for (const Face& f : mesh.faces) {
    out << f.vertices[0] << ' ' << f.vertices[1] << ' ' << f.vertices[2] << ' ' << f.tag.str()
        << '\n';
  }
  if (!out) throw Error("failed writing mesh dump file: " + path);
}

}  // namespace rtcurved
