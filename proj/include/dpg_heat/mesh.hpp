#pragma once

/**
 * @file mesh.hpp
 * @brief Uniform triangulations of the unit square with an oriented skeleton.
 *
 * Each of the n x n cells is split along its lower-left to upper-right
 * diagonal. Edges carry a canonical orientation (lower vertex index to higher
 * vertex index); the canonical edge normal is the tangent rotated by +90 deg.
 * Triangle-local edge i is the edge opposite local vertex i.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "dpg_heat/errors.hpp"

namespace dpg_heat {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
  friend double norm(Vec2 a) { return std::hypot(a.x, a.y); }
};

using Point = Vec2;

struct EdgeRef {
  int edge = -1;
  int sign = 0;  ///< +1 if the element's outward normal equals the canonical edge normal
};

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;          ///< counter-clockwise
  std::vector<std::array<int, 2>> edges;              ///< edges[e][0] < edges[e][1]
  std::vector<std::array<EdgeRef, 3>> edge_of_triangle;
  std::vector<bool> boundary_edge;
  std::vector<bool> interior_vertex;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_edges() const { return edges.size(); }
  std::size_t num_interior_vertices() const {
    return static_cast<std::size_t>(std::count(interior_vertex.begin(), interior_vertex.end(), true));
  }

  /// Canonical unit normal of edge e.
  Vec2 edge_normal(int e) const {
    const Vec2 t = vertices[edges[e][1]] - vertices[edges[e][0]];
    const double len = norm(t);
    return {-t.y / len, t.x / len};
  }

  double edge_length(int e) const { return norm(vertices[edges[e][1]] - vertices[edges[e][0]]); }

  double triangle_area(int t) const {
    const auto& tri = triangles[t];
    const Vec2 a = vertices[tri[1]] - vertices[tri[0]];
    const Vec2 b = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * (a.x * b.y - a.y * b.x);
  }
};

/// Uniform time partition of [0, T] with N steps of size k = T / N.
struct TimeGrid {
  double T = 0.1;
  int N = 1;
  double k = 0.1;

  double time(int n) const { return n == N ? T : n * k; }
};

inline TimeGrid make_time_grid(double T, int N) {
  DPG_HEAT_REQUIRE(T > 0.0, ConfigError, "final time T must be positive");
  DPG_HEAT_REQUIRE(N >= 1, ConfigError, "number of time steps must be >= 1");
  return TimeGrid{T, N, T / N};
}

/// N = ceil(T / k_requested), then k snapped to T / N so the last step lands on T.
inline TimeGrid time_grid_from_step(double T, double k_requested) {
  DPG_HEAT_REQUIRE(k_requested > 0.0, ConfigError, "requested time step must be positive");
  const double ratio = T / k_requested;
  // tolerate round-off when T / k is integral
  const int N = std::max(1, static_cast<int>(std::ceil(ratio - 1e-9 * ratio)));
  return make_time_grid(T, N);
}

inline Mesh build_uniform_mesh(int n) {
  DPG_HEAT_REQUIRE(n >= 1, ConfigError, "mesh subdivisions per side must be >= 1");
  Mesh mesh;
  const int np = n + 1;
  mesh.vertices.reserve(static_cast<std::size_t>(np) * np);
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }
  const auto vid = [np](int i, int j) { return j * np + i; };

  mesh.triangles.reserve(2u * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }

  std::map<std::pair<int, int>, int> edge_index;
  std::vector<int> edge_use;
  mesh.edge_of_triangle.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int p = tri[(i + 1) % 3];
      const int q = tri[(i + 2) % 3];
      const auto key = std::minmax(p, q);
      auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, static_cast<int>(mesh.edges.size()));
      if (inserted) {
        mesh.edges.push_back({key.first, key.second});
        edge_use.push_back(0);
      }
      const int e = it->second;
      ++edge_use[e];
      // Counter-clockwise traversal p -> q has its outward normal on the right;
      // the canonical normal sits on the left of lower -> higher.
      mesh.edge_of_triangle[t][i] = EdgeRef{e, p < q ? -1 : +1};
    }
  }

  mesh.boundary_edge.resize(mesh.edges.size());
  mesh.interior_vertex.assign(mesh.vertices.size(), true);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    mesh.boundary_edge[e] = edge_use[e] == 1;
    if (mesh.boundary_edge[e]) {
      mesh.interior_vertex[mesh.edges[e][0]] = false;
      mesh.interior_vertex[mesh.edges[e][1]] = false;
    }
  }
  return mesh;
}

/// Largest element diameter.
inline double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (const auto& tri : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      h = std::max(h, norm(mesh.vertices[tri[(i + 1) % 3]] - mesh.vertices[tri[i]]));
    }
  }
  return h;
}

}  // namespace dpg_heat
