#pragma once

// Quadrature on triangles and tetrahedra. Points are barycentric and weights
// are fractions of the simplex measure (they sum to one).
//
// General rules are conical (collapsed) products of Gauss-Jacobi rules, which
// have positive weights and integrate every polynomial of the requested total
// degree exactly.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "rtcurved/errors.hpp"

namespace rtcurved {

template <int NumVertices>
struct SimplexRule {
  static_assert(NumVertices == 3 || NumVertices == 4);
  using Bary = std::array<double, NumVertices>;

  std::vector<Bary> points;
  std::vector<double> weights;
  int degree = 0;

  [[nodiscard]] std::size_t size() const { return points.size(); }
};

using TriangleRule = SimplexRule<3>;
using TetRule = SimplexRule<4>;

namespace detail {

/// Gauss-Jacobi nodes/weights on [0,1] for the weight (1 - t)^alpha (Golub-Welsch).
inline void gauss_jacobi01(int n, double alpha, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  const double beta = 0.0;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + alpha + beta;
    jac(k, k) = (k == 0) ? (beta - alpha) / (alpha + beta + 2.0)
                         : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double t = 2.0 * m + alpha + beta;
      const double off = std::sqrt(4.0 * m * (m + alpha) * (m + beta) * (m + alpha + beta) /
                                   (t * t * (t + 1.0) * (t - 1.0)));
      jac(k, k + 1) = off;
      jac(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  // Integral of (1-x)^alpha over [-1,1].
  const double mu0 = std::pow(2.0, alpha + 1.0) / (alpha + 1.0);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double x = eig.eigenvalues()(k);
    const double v = eig.eigenvectors()(0, k);
    nodes[k] = 0.5 * (1.0 + x);
    weights[k] = mu0 * v * v / std::pow(2.0, alpha + 1.0);
  }
}

inline TetRule conical_tet_rule(int degree) {
  const int n = (degree + 2) / 2;  // 2n - 1 >= degree
  std::vector<double> x1, w1, x2, w2, x3, w3;
  gauss_jacobi01(n, 2.0, x1, w1);
  gauss_jacobi01(n, 1.0, x2, w2);
  gauss_jacobi01(n, 0.0, x3, w3);
  TetRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double x = x1[i];
        const double y = (1.0 - x1[i]) * x2[j];
        const double z = (1.0 - x1[i]) * (1.0 - x2[j]) * x3[k];
        rule.points.push_back({1.0 - x - y - z, x, y, z});
        // Reference tet measure is 1/6; weights are fractions of it.
        rule.weights.push_back(6.0 * w1[i] * w2[j] * w3[k]);
      }
    }
  }
  return rule;
}

inline TriangleRule conical_triangle_rule(int degree) {
  const int n = (degree + 2) / 2;
  std::vector<double> x1, w1, x2, w2;
  gauss_jacobi01(n, 1.0, x1, w1);
  gauss_jacobi01(n, 0.0, x2, w2);
  TriangleRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = x1[i];
      const double y = (1.0 - x1[i]) * x2[j];
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(2.0 * w1[i] * w2[j]);
    }
  }
  return rule;
}

constexpr int kMaxDegree = 12;

}  // namespace detail

/// Face points used as flux degrees of freedom and as constraint anchors:
/// the centroid for k = 0 and the three (2/3, 1/6, 1/6) points for k = 1.
inline TriangleRule face_gauss_points(int k) {
  TriangleRule rule;
  if (k == 0) {
    rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    rule.weights.push_back(1.0);
    rule.degree = 1;
  } else if (k == 1) {
    const double a = 2.0 / 3.0;
    const double b = 1.0 / 6.0;
    rule.points = {{a, b, b}, {b, a, b}, {b, b, a}};
    rule.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    rule.degree = 2;
  } else {
    throw ParameterError("face_gauss_points: k must be 0 or 1, got " + std::to_string(k));
  }
  return rule;
}

/// Tetrahedral rule exact for total degree <= `degree` (1..12).
inline const TetRule& tet_rule(int degree) {
  static const std::vector<TetRule> rules = [] {
    std::vector<TetRule> r;
    for (int d = 1; d <= detail::kMaxDegree; ++d) r.push_back(detail::conical_tet_rule(d));
    return r;
  }();
  if (degree < 1 || degree > detail::kMaxDegree) {
    throw ParameterError("tet_rule: unsupported degree " + std::to_string(degree));
  }
  return rules[degree - 1];
}

/// Triangle rule exact for total degree <= `degree` (1..12).
inline const TriangleRule& triangle_rule(int degree) {
  static const std::vector<TriangleRule> rules = [] {
    std::vector<TriangleRule> r;
    for (int d = 1; d <= detail::kMaxDegree; ++d) r.push_back(detail::conical_triangle_rule(d));
    return r;
  }();
  if (degree < 1 || degree > detail::kMaxDegree) {
    throw ParameterError("triangle_rule: unsupported degree " + std::to_string(degree));
  }
  return rules[degree - 1];
}

template <int N>
Eigen::Vector3d map_point(const std::array<Eigen::Vector3d, N>& vertices,
                          const std::array<double, N>& bary) {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  for (int i = 0; i < N; ++i) x += bary[i] * vertices[i];
  return x;
}

}  // namespace rtcurved
