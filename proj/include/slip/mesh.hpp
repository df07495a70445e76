#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slip/section.hpp"

namespace slip {

class OutsideHull : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InvalidTriangle : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A point of the (r_hat, vy_hat) disc.
struct DiscPoint {
  double r_hat = 0.0;
  double vy_hat = 0.0;
};

struct PointLocation {
  int triangle = -1;
  std::array<double, 3> bary{};
};

// Delaunay triangulation of a planar point set. Triangles are counter-clockwise
// in (r_hat, vy_hat). Immutable once built; point location is read-only.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<DiscPoint> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<DiscPoint>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  // Containing triangle with barycentric weights, or nullopt outside the hull.
  std::optional<PointLocation> locate(const DiscPoint& q) const;

  // FNV-1a over the exact vertex coordinates and triangle indices.
  std::uint64_t checksum() const;

 private:
  void build_locator();

  std::vector<DiscPoint> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  // Uniform bucket grid over the bounding box, each cell listing overlapping triangles.
  double min_x_ = 0.0, min_y_ = 0.0, cell_ = 1.0;
  int cells_x_ = 0, cells_y_ = 0;
  std::vector<std::vector<int>> buckets_;
};

// Bowyer-Watson insertion. Throws std::invalid_argument for fewer than 3 points.
Mesh delaunay_triangulate(const std::vector<DiscPoint>& points);

// Deterministic concentric-ring sampling of the disc of radius shell.L (centre
// plus rings whose point counts grow with radius, the outer ring on the
// boundary), then Delaunay triangulated. Throws std::invalid_argument if
// n_vertices < 4.
Mesh build_mesh(const EnergyShell& shell, int n_vertices);

std::vector<DiscPoint> ring_points(double radius, int n_vertices);

// Positive when d lies strictly inside the circumcircle of the CCW triangle abc.
double incircle(const DiscPoint& a, const DiscPoint& b, const DiscPoint& c, const DiscPoint& d);
double orient(const DiscPoint& a, const DiscPoint& b, const DiscPoint& c);

// Per-vertex values (components per vertex) with a validity mask and an
// optional integer label. Interpolation refuses triangles with an invalid
// vertex or, when labels are present, with mixed labels.
struct FieldMap {
  int components = 1;
  std::vector<double> values;        // vertex-major, size = vertex_count * components
  std::vector<std::uint8_t> valid;   // size = vertex_count
  std::vector<int> labels;           // empty, or size = vertex_count

  FieldMap() = default;
  FieldMap(std::size_t vertex_count, int components_per_vertex);

  std::size_t vertex_count() const { return valid.size(); }
  double at(std::size_t vertex, int component = 0) const {
    return values[vertex * static_cast<std::size_t>(components) + static_cast<std::size_t>(component)];
  }
  void set(std::size_t vertex, int component, double v) {
    values[vertex * static_cast<std::size_t>(components) + static_cast<std::size_t>(component)] = v;
  }
};

// Linear (barycentric) interpolation inside the containing triangle.
// Throws OutsideHull or InvalidTriangle.
std::vector<double> interpolate_field(const Mesh& mesh, const FieldMap& field, const DiscPoint& q);

// Like interpolate_field, but returns nullopt instead of throwing.
std::optional<std::vector<double>> try_interpolate_field(const Mesh& mesh, const FieldMap& field,
                                                         const DiscPoint& q);

inline DiscPoint to_disc(const SectionState& x, const EnergyShell& shell) {
  return {x.r - shell.r_center, x.vy / shell.omega};
}
inline SectionState from_disc(const DiscPoint& d, const EnergyShell& shell) {
  return {d.r_hat + shell.r_center, d.vy_hat * shell.omega};
}

// CSV persistence: vertices (id,r_hat_m,vy_hat_m) and triangles (v0,v1,v2).
void write_mesh_csv(const Mesh& mesh, const std::string& vertices_path, const std::string& triangles_path);
Mesh read_mesh_csv(const std::string& vertices_path, const std::string& triangles_path);

}  // namespace slip
