#pragma once

/**
 * @file quadrature.hpp
 * @brief Gauss-Legendre edge rules and collapsed (Duffy) triangle rules.
 *
 * Triangle rules live on the reference triangle (0,0), (1,0), (0,1) and use a
 * tensor Gauss-Legendre rule on the unit square mapped by
 * (a, b) -> (a (1 - b), b); the Jacobian (1 - b) costs one extra degree in b.
 */

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dpg_heat/errors.hpp"

namespace dpg_heat {

inline constexpr int kMaxQuadratureDegree = 24;

struct QuadratureRule {
  std::vector<std::array<double, 2>> points;  ///< reference coordinates (edge rules use [0] only)
  std::vector<double> weights;
  int degree = 0;  ///< polynomial exactness

  std::size_t size() const { return weights.size(); }
};

namespace detail {

/// n-point Gauss-Legendre nodes/weights on [0, 1] via Newton on P_n.
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = z;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);  // (2 / ((1 - z^2) P'^2)) / 2
  }
}

inline void check_degree(int min_degree) {
  DPG_HEAT_REQUIRE(min_degree >= 0 && min_degree <= kMaxQuadratureDegree, ConfigError,
                   "unsupported quadrature degree " + std::to_string(min_degree) + " (supported: 0.." +
                       std::to_string(kMaxQuadratureDegree) + ")");
}

}  // namespace detail

/// Rule on [0, 1], weights summing to 1.
inline QuadratureRule edge_rule(int min_degree) {
  detail::check_degree(min_degree);
  const int n = min_degree / 2 + 1;
  std::vector<double> x, w;
  detail::gauss_legendre_01(n, x, w);
  QuadratureRule rule;
  rule.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    rule.points.push_back({x[i], 0.0});
    rule.weights.push_back(w[i]);
  }
  return rule;
}

/// Rule on the reference triangle, weights summing to 1/2.
inline QuadratureRule triangle_rule(int min_degree) {
  detail::check_degree(min_degree);
  const int n = (min_degree + 2) / 2 + ((min_degree + 2) % 2);  // 2n - 1 >= degree + 1
  std::vector<double> x, w;
  detail::gauss_legendre_01(n, x, w);
  QuadratureRule rule;
  rule.degree = 2 * n - 2;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({x[i] * (1.0 - x[j]), x[j]});
      rule.weights.push_back(w[i] * w[j] * (1.0 - x[j]));
    }
  }
  return rule;
}

}  // namespace dpg_heat
