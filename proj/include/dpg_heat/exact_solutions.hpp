#pragma once

/**
 * @file exact_solutions.hpp
 * @brief Manufactured solutions of u_t - Laplace(u) = f on the unit square with
 *        homogeneous Dirichlet data.
 */

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "dpg_heat/errors.hpp"
#include "dpg_heat/mesh.hpp"

namespace dpg_heat {

struct ExactSolution {
  std::string name;
  std::function<double(Point, double)> u;
  std::function<Vec2(Point, double)> grad_u;
  std::function<double(Point, double)> dudt;
  std::function<double(Point, double)> f;
  std::function<double(Point)> u0;

  /// div(grad u) = u_t - f, without second derivatives.
  double laplacian(Point x, double t) const { return dudt(x, t) - f(x, t); }
};

/// u = exp(-pi^2 t) sin(pi x) sin(pi y), f = pi^2 u.
inline ExactSolution example1() {
  using std::numbers::pi;
  constexpr double pi2 = pi * pi;
  ExactSolution s;
  s.name = "example1";
  s.u = [](Point p, double t) { return std::exp(-pi2 * t) * std::sin(pi * p.x) * std::sin(pi * p.y); };
  s.grad_u = [](Point p, double t) {
    const double e = std::exp(-pi2 * t);
    return Vec2{pi * e * std::cos(pi * p.x) * std::sin(pi * p.y), pi * e * std::sin(pi * p.x) * std::cos(pi * p.y)};
  };
  s.dudt = [](Point p, double t) {
    return -pi2 * std::exp(-pi2 * t) * std::sin(pi * p.x) * std::sin(pi * p.y);
  };
  s.f = [](Point p, double t) { return pi2 * std::exp(-pi2 * t) * std::sin(pi * p.x) * std::sin(pi * p.y); };
  s.u0 = [](Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y); };
  return s;
}

namespace detail {

/// Sine series of (1 - x) sqrt(2) sin(pi y) under the heat flow, truncated at M
/// terms or once exp(-(j^2+1) pi^2 t) drops below 1e-300.
class Example2Series {
 public:
  explicit Example2Series(int terms) : terms_(terms) {}

  int active_terms(double t) const {
    using std::numbers::pi;
    if (t <= 0.0) return terms_;
    // exp(-(j^2+1) pi^2 t) < 1e-300  <=>  j^2 + 1 > 300 ln(10) / (pi^2 t)
    const double jmax = std::sqrt(std::max(0.0, 300.0 * std::log(10.0) / (pi * pi * t) - 1.0));
    return std::min(terms_, static_cast<int>(jmax) + 1);
  }

  /// Evaluates sum_j c_j(t) g(j pi x) for g in {sin, cos} with c_j = exp(-(j^2+1) pi^2 t) * weight(j).
  template <class Weight>
  void sums(double x, double t, double& sin_sum, double& cos_sum, Weight weight) const {
    using std::numbers::pi;
    const int M = active_terms(t);
    sin_sum = cos_sum = 0.0;
    // Chebyshev-style recurrence for sin(j a), cos(j a)
    const double a = pi * x;
    const double s1 = std::sin(a), c1 = std::cos(a);
    double sj = s1, cj = c1;
    for (int j = 1; j <= M; ++j) {
      const double decay = std::exp(-(static_cast<double>(j) * j + 1.0) * pi * pi * t);
      const double c = decay * weight(j);
      sin_sum += c * sj;
      cos_sum += c * cj;
      const double sn = sj * c1 + cj * s1;
      const double cn = cj * c1 - sj * s1;
      sj = sn;
      cj = cn;
    }
  }

 private:
  int terms_;
};

}  // namespace detail

/// u = (2 sqrt2 / pi) sin(pi y) sum_{j=1}^{M} exp(-(j^2+1) pi^2 t) sin(j pi x) / j, f = 0,
/// u0 = (1 - x) sqrt2 sin(pi y) in closed form.
inline ExactSolution example2(int terms = 1000) {
  DPG_HEAT_REQUIRE(terms >= 1, ConfigError, "example2: number of series terms must be >= 1");
  using std::numbers::pi;
  constexpr double amp = 2.0 * std::numbers::sqrt2 / pi;
  const auto series = std::make_shared<detail::Example2Series>(terms);
  ExactSolution s;
  s.name = "example2";
  s.u = [series](Point p, double t) {
    double ss, cs;
    series->sums(p.x, t, ss, cs, [](int j) { return 1.0 / j; });
    return amp * std::sin(pi * p.y) * ss;
  };
  s.grad_u = [series](Point p, double t) {
    double ss, cs;
    series->sums(p.x, t, ss, cs, [](int j) { return 1.0 / j; });
    double ss1, cs1;
    series->sums(p.x, t, ss1, cs1, [](int) { return pi; });
    return Vec2{amp * std::sin(pi * p.y) * cs1, amp * pi * std::cos(pi * p.y) * ss};
  };
  s.dudt = [series](Point p, double t) {
    double ss, cs;
    series->sums(p.x, t, ss, cs, [](int j) { return -(static_cast<double>(j) * j + 1.0) * pi * pi / j; });
    return amp * std::sin(pi * p.y) * ss;
  };
  s.f = [](Point, double) { return 0.0; };
  s.u0 = [](Point p) { return (1.0 - p.x) * std::numbers::sqrt2 * std::sin(pi * p.y); };
  return s;
}

/// Zero data, zero solution.
inline ExactSolution zero_solution() {
  ExactSolution s;
  s.name = "zero";
  s.u = [](Point, double) { return 0.0; };
  s.grad_u = [](Point, double) { return Vec2{}; };
  s.dudt = [](Point, double) { return 0.0; };
  s.f = [](Point, double) { return 0.0; };
  s.u0 = [](Point) { return 0.0; };
  return s;
}

/// c * (u, f, u0); the problem is linear, so this is again a solution.
inline ExactSolution scaled(const ExactSolution& base, double c) {
  ExactSolution s;
  s.name = base.name + "*" + std::to_string(c);
  s.u = [b = base.u, c](Point p, double t) { return c * b(p, t); };
  s.grad_u = [b = base.grad_u, c](Point p, double t) { return c * b(p, t); };
  s.dudt = [b = base.dudt, c](Point p, double t) { return c * b(p, t); };
  s.f = [b = base.f, c](Point p, double t) { return c * b(p, t); };
  s.u0 = [b = base.u0, c](Point p) { return c * b(p); };
  return s;
}

inline ExactSolution example_by_id(int id, int series_terms = 1000) {
  switch (id) {
    case 1: return example1();
    case 2: return example2(series_terms);
    default: throw ConfigError("unknown example " + std::to_string(id) + " (expected 1 or 2)");
  }
}

}  // namespace dpg_heat
