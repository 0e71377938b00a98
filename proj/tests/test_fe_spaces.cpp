#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dpg_heat/fe_spaces.hpp"

using namespace dpg_heat;

namespace {

ElementGeometry skewed() { return ElementGeometry::from({Point{0.1, 0.2}, Point{0.9, 0.35}, Point{0.3, 0.8}}); }

}  // namespace

TEST(DofMap, CountsOnSmallMeshes) {
  const auto m1 = build_uniform_mesh(1);
  EXPECT_EQ(build_dof_map(m1, {0}).total(), 2 + 4 + 0 + 5);

  const auto m2 = build_uniform_mesh(2);
  const auto p0 = build_dof_map(m2, {0});
  EXPECT_EQ(p0.n_u, 8);
  EXPECT_EQ(p0.n_sigma, 16);
  EXPECT_EQ(p0.n_uhat, 1);
  EXPECT_EQ(p0.n_sigmahat, 16);
  EXPECT_EQ(p0.total(), 41);
  EXPECT_EQ(build_dof_map(m2, {1}).total(), 57);
}

TEST(DofMap, BlocksAreContiguousAndDisjoint) {
  const auto m = build_uniform_mesh(3);
  const auto map = build_dof_map(m, {1});
  std::vector<int> seen(map.total(), 0);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto d = element_dofs(m, map, static_cast<int>(t));
    for (int g : d.global) {
      ASSERT_GE(g, 0);
      ASSERT_LT(g, map.total());
      ++seen[g];
    }
  }
  for (int c : seen) EXPECT_GE(c, 1);
  EXPECT_EQ(map.uhat_offset, map.n_u + map.n_sigma);
}

TEST(DofMap, RejectsBadDegree) {
  const auto m = build_uniform_mesh(1);
  EXPECT_THROW(build_dof_map(m, {2}), ConfigError);
}

TEST(TestBasis, ConstantComesFirst) {
  const auto g = skewed();
  const auto v = ScalarTestBasis::eval(g, {0.4, 0.4});
  EXPECT_EQ(v.value[0], 1.0);
  EXPECT_EQ(v.grad[0].x, 0.0);
  const auto c = CubicBasis::eval(g, {0.4, 0.4});
  EXPECT_EQ(c.value[0], 1.0);
}

TEST(TestBasis, GradientsMatchFiniteDifferences) {
  const auto g = skewed();
  const Point x{0.45, 0.42};
  const double h = 1e-6;
  const auto c = CubicBasis::eval(g, x);
  const auto px = CubicBasis::eval(g, {x.x + h, x.y});
  const auto mx = CubicBasis::eval(g, {x.x - h, x.y});
  const auto py = CubicBasis::eval(g, {x.x, x.y + h});
  const auto my = CubicBasis::eval(g, {x.x, x.y - h});
  for (int i = 0; i < CubicBasis::size; ++i) {
    EXPECT_NEAR(c.grad[i].x, (px.value[i] - mx.value[i]) / (2 * h), 1e-6);
    EXPECT_NEAR(c.grad[i].y, (py.value[i] - my.value[i]) / (2 * h), 1e-6);
  }
  const auto v = VectorTestBasis::eval(g, x);
  const auto vpx = VectorTestBasis::eval(g, {x.x + h, x.y});
  const auto vmx = VectorTestBasis::eval(g, {x.x - h, x.y});
  const auto vpy = VectorTestBasis::eval(g, {x.x, x.y + h});
  const auto vmy = VectorTestBasis::eval(g, {x.x, x.y - h});
  for (int j = 0; j < VectorTestBasis::size; ++j) {
    const double fd = (vpx.value[j].x - vmx.value[j].x + vpy.value[j].y - vmy.value[j].y) / (2 * h);
    EXPECT_NEAR(v.div[j], fd, 1e-6);
  }
}

TEST(Geometry, BarycentricAndNormals) {
  const auto g = skewed();
  for (int i = 0; i < 3; ++i) {
    const auto lam = g.barycentric(g.vertex[i]);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(lam[j], i == j ? 1.0 : 0.0, 1e-14);
    // outward: points away from the opposite vertex
    const auto [a, b] = g.edge(i);
    EXPECT_LT(dot(g.outward_normal(i), g.vertex[i] - a), 0.0);
    EXPECT_NEAR(dot(g.barycentric_gradient(i), b - a), 0.0, 1e-14);
  }
  EXPECT_THROW(ElementGeometry::from({Point{0, 0}, Point{0, 1}, Point{1, 0}}), SolverError);
}

TEST(P1Lift, ZeroCoefficientsGiveZero) {
  const auto m = build_uniform_mesh(3);
  const auto map = build_dof_map(m, {0});
  const std::vector<double> z(map.n_uhat, 0.0);
  const auto f = p1_lift(m, map, z);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    EXPECT_EQ(f.value(static_cast<int>(t), ElementGeometry::of(m, static_cast<int>(t)).centroid), 0.0);
    EXPECT_EQ(norm(f.gradient(static_cast<int>(t))), 0.0);
  }
}

TEST(P1Lift, HatFunctionEnergy) {
  // the single interior hat on n = 2: stiffness diagonal 4, mass sum of |K| / 6
  const auto m = build_uniform_mesh(2);
  const auto map = build_dof_map(m, {0});
  const std::vector<double> one{1.0};
  const auto f = p1_lift(m, map, one);
  double grad2 = 0, mass = 0;
  const auto rule = triangle_rule(4);
  std::vector<Point> pts;
  std::vector<double> wts;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const auto gr = f.gradient(ti);
    grad2 += m.triangle_area(ti) * dot(gr, gr);
    map_rule(ElementGeometry::of(m, ti), rule, pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q) mass += wts[q] * std::pow(f.value(ti, pts[q]), 2);
  }
  EXPECT_NEAR(grad2, 4.0, 1e-13);
  EXPECT_NEAR(mass, 6.0 * (1.0 / 8.0) / 6.0, 1e-13);
}

TEST(P1Lift, InterpolatesAtVertices) {
  const auto m = build_uniform_mesh(4);
  const auto map = build_dof_map(m, {0});
  auto fn = [](Point p) { return p.x * (1 - p.x) * p.y * (1 - p.y); };
  std::vector<double> c(map.n_uhat);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    if (map.uhat_of_vertex[v] >= 0) c[map.uhat_of_vertex[v]] = fn(m.vertices[v]);
  }
  const auto f = p1_lift(m, map, c);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    for (int a = 0; a < 3; ++a) {
      const Point p = m.vertices[m.triangles[t][a]];
      EXPECT_NEAR(f.value(static_cast<int>(t), p), fn(p), 1e-15);
    }
  }
  EXPECT_THROW(p1_lift(m, map, std::vector<double>(map.n_uhat + 1)), ConfigError);
}

TEST(RT0Lift, ConstantAndLinearFieldsReproduced) {
  const auto m = build_uniform_mesh(3);
  std::vector<double> zero(m.num_edges(), 0.0), cx(m.num_edges()), radial(m.num_edges());
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const Vec2 n = m.edge_normal(static_cast<int>(e));
    const Point mid = 0.5 * (m.vertices[m.edges[e][0]] + m.vertices[m.edges[e][1]]);
    cx[e] = n.x;                       // (1, 0) . n
    radial[e] = mid.x * n.x + mid.y * n.y;  // (x, y) . n is constant along a straight edge
  }
  const auto z = rt0_lift(m, zero);
  const auto a = rt0_lift(m, cx);
  const auto r = rt0_lift(m, radial);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const Point c = ElementGeometry::of(m, ti).centroid;
    const Point p = c + Vec2{0.01, -0.02};
    EXPECT_EQ(norm(z.value(ti, p)), 0.0);
    EXPECT_NEAR(a.value(ti, p).x, 1.0, 1e-13);
    EXPECT_NEAR(a.value(ti, p).y, 0.0, 1e-13);
    EXPECT_NEAR(a.divergence(ti), 0.0, 1e-12);
    EXPECT_NEAR(r.value(ti, p).x, p.x, 1e-13);
    EXPECT_NEAR(r.value(ti, p).y, p.y, 1e-13);
    EXPECT_NEAR(r.divergence(ti), 2.0, 1e-12);
  }
}

TEST(RT0Lift, NormalTraceContinuousAndLinear) {
  const auto m = build_uniform_mesh(4);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(m.num_edges()), b(m.num_edges()), ab(m.num_edges());
    for (std::size_t e = 0; e < m.num_edges(); ++e) {
      a[e] = U(rng);
      b[e] = U(rng);
      ab[e] = 2 * a[e] - 3 * b[e];
    }
    const auto fa = rt0_lift(m, a);
    const auto fb = rt0_lift(m, b);
    const auto fab = rt0_lift(m, ab);
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const int ti = static_cast<int>(t);
      const auto g = ElementGeometry::of(m, ti);
      for (int i = 0; i < 3; ++i) {
        const auto [p, q] = g.edge(i);
        const EdgeRef ref = m.edge_of_triangle[t][i];
        const Vec2 n = m.edge_normal(ref.edge);
        for (double s : {0.0, 0.3, 1.0}) {
          const Point x = p + s * (q - p);
          // the normal component on every edge is the prescribed constant, from either side
          ASSERT_NEAR(dot(fa.value(ti, x), n), a[ref.edge], 1e-11);
        }
      }
      const Point c = g.centroid;
      const Vec2 lin = 2.0 * fa.value(ti, c) - 3.0 * fb.value(ti, c);
      EXPECT_NEAR(fab.value(ti, c).x, lin.x, 1e-12);
      EXPECT_NEAR(fab.value(ti, c).y, lin.y, 1e-12);
    }
  }
  EXPECT_THROW(rt0_lift(m, std::vector<double>(3)), ConfigError);
}
