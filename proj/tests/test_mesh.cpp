#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "slip/mesh.hpp"

using namespace slip;

namespace {

const EnergyShell& shell() {
  static const EnergyShell s = shell_constants(ModelParams{}, 820.0);
  return s;
}

double tri_area(const Mesh& m, const std::array<int, 3>& t) {
  const auto& v = m.vertices();
  return 0.5 * orient(v[t[0]], v[t[1]], v[t[2]]);
}

}  // namespace

TEST(Mesh, FourVerticesGiveThreeTriangles) {
  const Mesh m = build_mesh(shell(), 4);
  EXPECT_EQ(m.vertex_count(), 4u);
  EXPECT_EQ(m.triangle_count(), 3u);
  EXPECT_THROW(build_mesh(shell(), 3), std::invalid_argument);
}

TEST(Mesh, TriangleCountIsAboutTwiceVertexCount) {
  for (int n : {500, 2000}) {
    const Mesh m = build_mesh(shell(), n);
    EXPECT_EQ(m.vertex_count(), static_cast<std::size_t>(n));
    const double ratio = static_cast<double>(m.triangle_count()) / n;
    EXPECT_GE(ratio, 1.8);
    EXPECT_LE(ratio, 2.0);
  }
}

TEST(Mesh, VerticesStayInDiscAndTrianglesAreCcw) {
  const Mesh m = build_mesh(shell(), 800);
  for (const auto& v : m.vertices()) EXPECT_LE(std::hypot(v.r_hat, v.vy_hat), shell().L * (1 + 1e-12));
  double area = 0.0;
  for (const auto& t : m.triangles()) {
    const double a = tri_area(m, t);
    EXPECT_GT(a, 0.0);
    area += a;
  }
  // Inscribed polygon of the outer ring: close to the disc area.
  EXPECT_NEAR(area, M_PI * shell().L * shell().L, 0.01 * M_PI * shell().L * shell().L);
}

TEST(Mesh, EmptyCircumcircle) {
  const Mesh m = build_mesh(shell(), 400);
  const auto& v = m.vertices();
  for (const auto& t : m.triangles()) {
    for (std::size_t q = 0; q < v.size(); ++q) {
      if (static_cast<int>(q) == t[0] || static_cast<int>(q) == t[1] || static_cast<int>(q) == t[2]) continue;
      // Scale-relative slack for cocircular ring points.
      ASSERT_LE(incircle(v[t[0]], v[t[1]], v[t[2]], v[q]), 1e-18) << "triangle violates Delaunay";
    }
  }
}

TEST(Mesh, RandomPointsTriangulate) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<DiscPoint> pts;
  for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng)});
  const Mesh m = delaunay_triangulate(pts);
  for (const auto& t : m.triangles()) {
    for (std::size_t q = 0; q < pts.size(); ++q) {
      if (static_cast<int>(q) == t[0] || static_cast<int>(q) == t[1] || static_cast<int>(q) == t[2]) continue;
      ASSERT_LE(incircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[q]), 1e-12);
    }
  }
  EXPECT_THROW(delaunay_triangulate({{0, 0}, {1, 0}}), std::invalid_argument);
}

TEST(Mesh, LinearFieldIsReproduced) {
  const Mesh m = build_mesh(shell(), 1000);
  FieldMap f(m.vertex_count(), 2);
  auto lin = [](const DiscPoint& p) { return std::array<double, 2>{3.0 * p.r_hat - 2.0 * p.vy_hat + 0.5, -p.r_hat + 7.0}; };
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    const auto val = lin(m.vertices()[i]);
    f.set(i, 0, val[0]);
    f.set(i, 1, val[1]);
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  int tested = 0;
  while (tested < 500) {
    const DiscPoint q{u(rng) * shell().L, u(rng) * shell().L};
    if (std::hypot(q.r_hat, q.vy_hat) > 0.9 * shell().L) continue;
    const auto got = interpolate_field(m, f, q);
    const auto want = lin(q);
    EXPECT_NEAR(got[0], want[0], 1e-12);
    EXPECT_NEAR(got[1], want[1], 1e-12);
    ++tested;
  }
}

TEST(Mesh, ExactAtVertices) {
  const Mesh m = build_mesh(shell(), 300);
  FieldMap f(m.vertex_count(), 1);
  for (std::size_t i = 0; i < m.vertex_count(); ++i) f.set(i, 0, std::sin(static_cast<double>(i)));
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    EXPECT_EQ(interpolate_field(m, f, m.vertices()[i])[0], f.at(i));
  }
}

TEST(Mesh, OutsideHullAndInvalidTriangles) {
  const Mesh m = build_mesh(shell(), 300);
  FieldMap f(m.vertex_count(), 1);
  EXPECT_THROW(interpolate_field(m, f, {2 * shell().L, 0.0}), OutsideHull);
  EXPECT_FALSE(m.locate({2 * shell().L, 0.0}).has_value());
  const auto loc = m.locate({0.01 * shell().L, 0.02 * shell().L});
  ASSERT_TRUE(loc.has_value());
  f.valid[m.triangles()[loc->triangle][1]] = 0;
  EXPECT_THROW(interpolate_field(m, f, {0.01 * shell().L, 0.02 * shell().L}), InvalidTriangle);
  EXPECT_FALSE(try_interpolate_field(m, f, {0.01 * shell().L, 0.02 * shell().L}).has_value());

  FieldMap g(m.vertex_count(), 1);
  g.labels.assign(m.vertex_count(), 0);
  g.labels[m.triangles()[loc->triangle][2]] = 1;
  EXPECT_THROW(interpolate_field(m, g, {0.01 * shell().L, 0.02 * shell().L}), InvalidTriangle);
}

TEST(Mesh, BarycentricWeightsSumToOne) {
  const Mesh m = build_mesh(shell(), 500);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int i = 0; i < 200; ++i) {
    const auto loc = m.locate({u(rng) * shell().L, u(rng) * shell().L});
    ASSERT_TRUE(loc.has_value());
    EXPECT_NEAR(loc->bary[0] + loc->bary[1] + loc->bary[2], 1.0, 1e-12);
    for (double b : loc->bary) EXPECT_GE(b, -1e-12);
  }
}

TEST(Mesh, DeterministicAndCsvRoundTrip) {
  const Mesh a = build_mesh(shell(), 700);
  const Mesh b = build_mesh(shell(), 700);
  EXPECT_EQ(a.checksum(), b.checksum());
  EXPECT_NE(a.checksum(), build_mesh(shell(), 701).checksum());

  const auto dir = std::filesystem::temp_directory_path() / "slip_mesh_test";
  std::filesystem::create_directories(dir);
  write_mesh_csv(a, (dir / "v.csv").string(), (dir / "t.csv").string());
  const Mesh c = read_mesh_csv((dir / "v.csv").string(), (dir / "t.csv").string());
  EXPECT_EQ(c.checksum(), a.checksum());
  std::filesystem::remove_all(dir);
}
