#pragma once

// Ellipsoidal domains centred at the origin and the manufactured solutions
// u = g(eta) used by the convergence experiments.

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "rtcurved/errors.hpp"

namespace rtcurved {

using Vec3 = Eigen::Vector3d;

struct EllipsoidShape {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;

  static EllipsoidShape ball() { return {1.0, 1.0, 1.0}; }

  void validate() const {
    if (!(a > 0.0 && b > 0.0 && c > 0.0)) {
      throw ParameterError("ellipsoid semi-axes must be positive");
    }
  }
};

/// Solid ellipsoid, or the hollow region between it and the concentric copy
/// scaled by inner_ratio.
struct DomainSpec {
  EllipsoidShape shape;
  bool hollow = false;
  static constexpr double inner_ratio = 0.5;

  static DomainSpec solid(EllipsoidShape s) { return {s, false}; }
  static DomainSpec holed(EllipsoidShape s) { return {s, true}; }
};

enum class Surface { Outer, Inner };

inline double surface_level(Surface s) {
  return s == Surface::Outer ? 1.0 : DomainSpec::inner_ratio;
}

inline const char* to_string(Surface s) { return s == Surface::Outer ? "outer" : "inner"; }

/// Which curved surfaces carry p.n = 0; the rest carry u = 0.
enum class NeumannSurface { Outer, Inner, Both };

struct BoundaryAssignment {
  NeumannSurface neumann = NeumannSurface::Outer;

  [[nodiscard]] bool is_neumann(Surface s) const {
    switch (neumann) {
      case NeumannSurface::Both: return true;
      case NeumannSurface::Outer: return s == Surface::Outer;
      case NeumannSurface::Inner: return s == Surface::Inner;
    }
    return false;
  }
};

/// Normalised ellipsoidal radius; equals 1 on the outer surface.
inline double eta(const EllipsoidShape& shape, const Vec3& x) {
  const double u = x[0] / shape.a;
  const double v = x[1] / shape.b;
  const double w = x[2] / shape.c;
  return std::sqrt(u * u + v * v + w * w);
}

/// (x/a^2, y/b^2, z/c^2): half the gradient of eta^2.
inline Vec3 eta_direction(const EllipsoidShape& shape, const Vec3& x) {
  return {x[0] / (shape.a * shape.a), x[1] / (shape.b * shape.b), x[2] / (shape.c * shape.c)};
}

constexpr double kSurfaceTolerance = 1e-9;

/// Unit normal pointing out of the domain at a point of the given surface.
inline Vec3 surface_normal(const DomainSpec& spec, Surface surface, const Vec3& x,
                           double tolerance = kSurfaceTolerance) {
  if (surface == Surface::Inner && !spec.hollow) {
    throw DomainError("solid domain has no inner surface");
  }
  const double level = surface_level(surface);
  const double e = eta(spec.shape, x);
  if (std::abs(e - level) > tolerance) {
    throw DomainError("point is not on the " + std::string(to_string(surface)) +
                      " surface (eta = " + std::to_string(e) + ")");
  }
  Vec3 n = eta_direction(spec.shape, x).normalized();
  return surface == Surface::Inner ? Vec3(-n) : n;
}

/// Intersection of the ray from the origin through m with the surface eta = level.
inline Vec3 ray_surface_point(const DomainSpec& spec, const Vec3& m, double level) {
  const double e = eta(spec.shape, m);
  if (!(e > 0.0)) {
    throw DomainError("degenerate ray: point coincides with the origin");
  }
  return (level / e) * m;
}

enum class Profile {
  G1,  // eta^2/2 - eta^3/3
  G2,  // (2 eta - 1)(eta - 1)^2 / 2
  G3,  // eta^2 - eta
};

inline const char* to_string(Profile p) {
  switch (p) {
    case Profile::G1: return "G1";
    case Profile::G2: return "G2";
    case Profile::G3: return "G3";
  }
  return "?";
}

struct SolutionProfile {
  Profile id = Profile::G1;
  double nu = 1.0;
};

/// Radial profile g and its derivatives.
struct RadialValues {
  double g;
  double dg;
  double d2g;
};

inline RadialValues radial(Profile p, double e) {
  switch (p) {
    case Profile::G1: return {e * e / 2.0 - e * e * e / 3.0, e - e * e, 1.0 - 2.0 * e};
    case Profile::G2:
      return {(2.0 * e - 1.0) * (e - 1.0) * (e - 1.0) / 2.0, (3.0 * e - 2.0) * (e - 1.0),
              6.0 * e - 5.0};
    case Profile::G3: return {e * e - e, 2.0 * e - 1.0, 2.0};
  }
  return {0.0, 0.0, 0.0};
}

/// Pointwise exact data: u, p = grad u, div p = lap u, f = nu u - div p.
struct Fields {
  double u = 0.0;
  Vec3 p = Vec3::Zero();
  double divp = 0.0;
  double f = 0.0;
};

using ExactSolution = std::function<Fields(const Vec3&)>;

inline Fields exact_fields(const DomainSpec& spec, const SolutionProfile& profile, const Vec3& x) {
  const EllipsoidShape& sh = spec.shape;
  const double e = eta(sh, x);
  const Vec3 s = eta_direction(sh, x);
  const double s2 = s.squaredNorm();
  const double k = 1.0 / (sh.a * sh.a) + 1.0 / (sh.b * sh.b) + 1.0 / (sh.c * sh.c);

  Fields out;
  if (profile.id == Profile::G1) {
    // g'(eta)/eta = 1 - eta and g'' - g'/eta = -eta, both regular at the centre.
    const RadialValues r = radial(Profile::G1, e);
    const double q = 1.0 - e;
    out.u = r.g;
    out.p = q * s;
    out.divp = (e > 0.0 ? -s2 / e : 0.0) + q * k;
  } else {
    if (e < 0.25) {
      throw DomainError("profile " + std::string(to_string(profile.id)) +
                        " is singular near the centre (eta < 1/4)");
    }
    const RadialValues r = radial(profile.id, e);
    const double q = r.dg / e;
    out.u = r.g;
    out.p = q * s;
    out.divp = r.d2g * s2 / (e * e) + q * (k - s2 / (e * e));
  }
  out.f = profile.nu * out.u - out.divp;
  return out;
}

inline ExactSolution make_exact_solution(const DomainSpec& spec, const SolutionProfile& profile) {
  return [spec, profile](const Vec3& x) { return exact_fields(spec, profile, x); };
}

}  // namespace rtcurved
