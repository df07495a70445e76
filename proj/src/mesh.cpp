#include "slip/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace slip {

double orient(const DiscPoint& a, const DiscPoint& b, const DiscPoint& c) {
  const long double abx = static_cast<long double>(b.r_hat) - a.r_hat;
  const long double aby = static_cast<long double>(b.vy_hat) - a.vy_hat;
  const long double acx = static_cast<long double>(c.r_hat) - a.r_hat;
  const long double acy = static_cast<long double>(c.vy_hat) - a.vy_hat;
  return static_cast<double>(abx * acy - aby * acx);
}

double incircle(const DiscPoint& a, const DiscPoint& b, const DiscPoint& c, const DiscPoint& d) {
  const long double adx = static_cast<long double>(a.r_hat) - d.r_hat;
  const long double ady = static_cast<long double>(a.vy_hat) - d.vy_hat;
  const long double bdx = static_cast<long double>(b.r_hat) - d.r_hat;
  const long double bdy = static_cast<long double>(b.vy_hat) - d.vy_hat;
  const long double cdx = static_cast<long double>(c.r_hat) - d.r_hat;
  const long double cdy = static_cast<long double>(c.vy_hat) - d.vy_hat;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return static_cast<double>(adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx));
}

namespace {

struct WorkTri {
  std::array<int, 3> v{};
  std::array<int, 3> n{-1, -1, -1};  // n[i] shares the edge opposite v[i]
  bool alive = true;
};

}  // namespace

Mesh delaunay_triangulate(const std::vector<DiscPoint>& input) {
  if (input.size() < 3) throw std::invalid_argument("delaunay_triangulate: need at least 3 points");
  std::vector<DiscPoint> pts = input;
  double lo_x = pts[0].r_hat, hi_x = lo_x, lo_y = pts[0].vy_hat, hi_y = lo_y;
  for (const auto& p : pts) {
    lo_x = std::min(lo_x, p.r_hat);
    hi_x = std::max(hi_x, p.r_hat);
    lo_y = std::min(lo_y, p.vy_hat);
    hi_y = std::max(hi_y, p.vy_hat);
  }
  const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-300});
  const int n = static_cast<int>(pts.size());
  const double big = 1e4 * span;
  pts.push_back({cx - big, cy - big});
  pts.push_back({cx + big, cy - big});
  pts.push_back({cx, cy + big});

  std::vector<WorkTri> tris;
  tris.reserve(static_cast<std::size_t>(2 * n + 8));
  tris.push_back(WorkTri{{n, n + 1, n + 2}, {-1, -1, -1}, true});

  std::vector<int> bad, stack;
  std::vector<char> mark;
  struct Edge {
    int a, b, outer;
  };
  std::vector<Edge> boundary;
  std::vector<int> by_start(pts.size(), -1), by_end(pts.size(), -1);
  int last = 0;

  for (int ip = 0; ip < n; ++ip) {
    const DiscPoint& p = pts[static_cast<std::size_t>(ip)];

    // Walk to the containing triangle.
    int t = last;
    for (int guard = 0; guard < 4 * static_cast<int>(tris.size()) + 16; ++guard) {
      const WorkTri& w = tris[static_cast<std::size_t>(t)];
      int next = -1;
      for (int e = 0; e < 3; ++e) {
        const DiscPoint& a = pts[static_cast<std::size_t>(w.v[(e + 1) % 3])];
        const DiscPoint& b = pts[static_cast<std::size_t>(w.v[(e + 2) % 3])];
        if (orient(a, b, p) < 0.0 && w.n[e] >= 0) {
          next = w.n[e];
          break;
        }
      }
      if (next < 0) break;
      t = next;
    }

    // Cavity of triangles whose circumcircle strictly contains p.
    mark.assign(tris.size(), 0);
    bad.clear();
    stack.assign(1, t);
    mark[static_cast<std::size_t>(t)] = 1;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      bad.push_back(cur);
      const WorkTri& w = tris[static_cast<std::size_t>(cur)];
      for (int e = 0; e < 3; ++e) {
        const int nb = w.n[e];
        if (nb < 0 || mark[static_cast<std::size_t>(nb)]) continue;
        const WorkTri& u = tris[static_cast<std::size_t>(nb)];
        if (incircle(pts[static_cast<std::size_t>(u.v[0])], pts[static_cast<std::size_t>(u.v[1])],
                     pts[static_cast<std::size_t>(u.v[2])], p) > 0.0) {
          mark[static_cast<std::size_t>(nb)] = 1;
          stack.push_back(nb);
        }
      }
    }

    boundary.clear();
    for (int b : bad) {
      WorkTri& w = tris[static_cast<std::size_t>(b)];
      for (int e = 0; e < 3; ++e) {
        const int nb = w.n[e];
        if (nb >= 0 && mark[static_cast<std::size_t>(nb)]) continue;
        boundary.push_back({w.v[(e + 1) % 3], w.v[(e + 2) % 3], nb});
      }
      w.alive = false;
    }

    // Fan the cavity boundary to p.
    const int first_new = static_cast<int>(tris.size());
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      const Edge& e = boundary[i];
      WorkTri nt;
      nt.v = {e.a, e.b, ip};
      nt.n[2] = e.outer;
      const int id = first_new + static_cast<int>(i);
      if (e.outer >= 0) {
        WorkTri& o = tris[static_cast<std::size_t>(e.outer)];
        for (int k = 0; k < 3; ++k) {
          const int oa = o.v[(k + 1) % 3], ob = o.v[(k + 2) % 3];
          if (oa == e.b && ob == e.a) o.n[k] = id;
        }
      }
      by_start[static_cast<std::size_t>(e.a)] = id;
      by_end[static_cast<std::size_t>(e.b)] = id;
      tris.push_back(nt);
    }
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      WorkTri& nt = tris[static_cast<std::size_t>(first_new) + i];
      nt.n[0] = by_start[static_cast<std::size_t>(nt.v[1])];  // edge (b, p)
      nt.n[1] = by_end[static_cast<std::size_t>(nt.v[0])];    // edge (p, a)
    }
    last = first_new;

    // Compact occasionally so dead triangles don't slow the walk.
    if (tris.size() > static_cast<std::size_t>(8 * (n + 8)) && ip + 1 < n) {
      std::vector<int> remap(tris.size(), -1);
      std::vector<WorkTri> kept;
      kept.reserve(tris.size() / 2);
      for (std::size_t i = 0; i < tris.size(); ++i) {
        if (tris[i].alive) {
          remap[i] = static_cast<int>(kept.size());
          kept.push_back(tris[i]);
        }
      }
      for (auto& w : kept) {
        for (auto& nb : w.n) nb = nb >= 0 ? remap[static_cast<std::size_t>(nb)] : -1;
      }
      last = remap[static_cast<std::size_t>(last)];
      tris = std::move(kept);
    }
  }

  std::vector<std::array<int, 3>> out;
  out.reserve(tris.size());
  for (const auto& w : tris) {
    if (!w.alive || w.v[0] >= n || w.v[1] >= n || w.v[2] >= n) continue;
    out.push_back(w.v);
  }
  // Canonical order: rotate so the smallest index leads, then sort.
  for (auto& t : out) {
    const auto it = std::min_element(t.begin(), t.end());
    std::rotate(t.begin(), it, t.end());
  }
  std::sort(out.begin(), out.end());
  return Mesh(input, std::move(out));
}

std::vector<DiscPoint> ring_points(double radius, int n_vertices) {
  if (n_vertices < 4) throw std::invalid_argument("build_mesh: need at least 4 vertices");
  const double pi = std::numbers::pi;
  const int rest = n_vertices - 1;
  int rings = static_cast<int>(std::lround((-1.0 + std::sqrt(1.0 + 4.0 * rest / pi)) / 2.0));
  rings = std::clamp(rings, 1, rest / 3);

  // Share the non-centre points among rings in proportion to ring index
  // (largest remainder), at least 3 per ring.
  std::vector<int> counts(static_cast<std::size_t>(rings), 3);
  int left = rest - 3 * rings;
  const double weight_total = 0.5 * rings * (rings + 1);
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int k = 1; k <= rings; ++k) {
    const double share = left * k / weight_total;
    const int whole = static_cast<int>(std::floor(share));
    counts[static_cast<std::size_t>(k - 1)] += whole;
    assigned += whole;
    remainders.push_back({share - whole, k - 1});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  for (int i = 0; i < left - assigned; ++i) ++counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(i)].second)];

  std::vector<DiscPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_vertices));
  pts.push_back({0.0, 0.0});
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int k = 1; k <= rings; ++k) {
    const double rad = k == rings ? radius : radius * k / rings;
    const int m = counts[static_cast<std::size_t>(k - 1)];
    const double offset = golden * k;
    for (int j = 0; j < m; ++j) {
      const double phi = offset + 2.0 * pi * j / m;
      pts.push_back({rad * std::cos(phi), rad * std::sin(phi)});
    }
  }
  return pts;
}

Mesh build_mesh(const EnergyShell& shell, int n_vertices) {
  return delaunay_triangulate(ring_points(shell.L, n_vertices));
}

Mesh::Mesh(std::vector<DiscPoint> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (const auto& t : triangles_) {
    for (int v : t) {
      if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) {
        throw std::invalid_argument("Mesh: triangle references a missing vertex");
      }
    }
  }
  build_locator();
}

void Mesh::build_locator() {
  buckets_.clear();
  if (vertices_.empty() || triangles_.empty()) return;
  double hx = vertices_[0].r_hat, hy = vertices_[0].vy_hat;
  min_x_ = hx;
  min_y_ = hy;
  for (const auto& p : vertices_) {
    min_x_ = std::min(min_x_, p.r_hat);
    min_y_ = std::min(min_y_, p.vy_hat);
    hx = std::max(hx, p.r_hat);
    hy = std::max(hy, p.vy_hat);
  }
  const double w = std::max(hx - min_x_, 1e-300), h = std::max(hy - min_y_, 1e-300);
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(triangles_.size()) / 2.0)));
  cell_ = std::max(w, h) / side;
  cells_x_ = std::max(1, static_cast<int>(std::ceil(w / cell_)));
  cells_y_ = std::max(1, static_cast<int>(std::ceil(h / cell_)));
  buckets_.assign(static_cast<std::size_t>(cells_x_ * cells_y_), {});
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (int v : triangles_[t]) {
      const auto& p = vertices_[static_cast<std::size_t>(v)];
      x0 = std::min(x0, p.r_hat);
      x1 = std::max(x1, p.r_hat);
      y0 = std::min(y0, p.vy_hat);
      y1 = std::max(y1, p.vy_hat);
    }
    const int i0 = std::clamp(static_cast<int>(std::floor((x0 - min_x_) / cell_)), 0, cells_x_ - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((x1 - min_x_) / cell_)), 0, cells_x_ - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((y0 - min_y_) / cell_)), 0, cells_y_ - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((y1 - min_y_) / cell_)), 0, cells_y_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * cells_x_ + i)].push_back(static_cast<int>(t));
    }
  }
}

std::optional<PointLocation> Mesh::locate(const DiscPoint& q) const {
  if (buckets_.empty()) return std::nullopt;
  const double fx = (q.r_hat - min_x_) / cell_, fy = (q.vy_hat - min_y_) / cell_;
  if (fx < -1e-9 || fy < -1e-9 || fx > cells_x_ + 1e-9 || fy > cells_y_ + 1e-9) return std::nullopt;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, cells_x_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, cells_y_ - 1);
  const double eps = 1e-12;
  std::optional<PointLocation> best;
  double best_min = -1e300;
  for (int t : buckets_[static_cast<std::size_t>(j * cells_x_ + i)]) {
    const auto& tri = triangles_[static_cast<std::size_t>(t)];
    const DiscPoint& a = vertices_[static_cast<std::size_t>(tri[0])];
    const DiscPoint& b = vertices_[static_cast<std::size_t>(tri[1])];
    const DiscPoint& c = vertices_[static_cast<std::size_t>(tri[2])];
    const double area = orient(a, b, c);
    if (!(area > 0.0)) continue;
    const double w0 = orient(b, c, q) / area;
    const double w1 = orient(c, a, q) / area;
    const double w2 = 1.0 - w0 - w1;
    const double mn = std::min({w0, w1, w2});
    if (mn >= -eps && mn > best_min) {
      best_min = mn;
      best = PointLocation{t, {w0, w1, w2}};
      if (mn >= 0.0) {
        // Exact at vertices: snap weights that round to 0/1.
        for (int k = 0; k < 3; ++k) {
          const DiscPoint& v = vertices_[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
          if (v.r_hat == q.r_hat && v.vy_hat == q.vy_hat) {
            best->bary = {0.0, 0.0, 0.0};
            best->bary[static_cast<std::size_t>(k)] = 1.0;
          }
        }
        break;
      }
    }
  }
  return best;
}

std::uint64_t Mesh::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t nv = vertices_.size(), nt = triangles_.size();
  mix(&nv, sizeof nv);
  mix(&nt, sizeof nt);
  for (const auto& v : vertices_) {
    mix(&v.r_hat, sizeof(double));
    mix(&v.vy_hat, sizeof(double));
  }
  for (const auto& t : triangles_) {
    for (int v : t) {
      const std::int64_t w = v;
      mix(&w, sizeof w);
    }
  }
  return h;
}

FieldMap::FieldMap(std::size_t vertex_count, int components_per_vertex)
    : components(components_per_vertex),
      values(vertex_count * static_cast<std::size_t>(components_per_vertex), 0.0),
      valid(vertex_count, 1) {}

std::optional<std::vector<double>> try_interpolate_field(const Mesh& mesh, const FieldMap& field,
                                                         const DiscPoint& q) {
  const auto loc = mesh.locate(q);
  if (!loc) return std::nullopt;
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(loc->triangle)];
  for (int v : tri) {
    if (!field.valid[static_cast<std::size_t>(v)]) return std::nullopt;
  }
  if (!field.labels.empty()) {
    const int l0 = field.labels[static_cast<std::size_t>(tri[0])];
    if (field.labels[static_cast<std::size_t>(tri[1])] != l0 || field.labels[static_cast<std::size_t>(tri[2])] != l0) {
      return std::nullopt;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(field.components), 0.0);
  for (int k = 0; k < 3; ++k) {
    const double w = loc->bary[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    for (int c = 0; c < field.components; ++c) {
      out[static_cast<std::size_t>(c)] += w * field.at(static_cast<std::size_t>(tri[static_cast<std::size_t>(k)]), c);
    }
  }
  return out;
}

std::vector<double> interpolate_field(const Mesh& mesh, const FieldMap& field, const DiscPoint& q) {
  const auto loc = mesh.locate(q);
  if (!loc) throw OutsideHull("OutsideHull: point lies outside the mesh");
  auto v = try_interpolate_field(mesh, field, q);
  if (!v) throw InvalidTriangle("InvalidTriangle: containing triangle has an invalid or mixed-label vertex");
  return *v;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw std::runtime_error("bad number in CSV: '" + s + "'");
  return v;
}

}  // namespace

void write_mesh_csv(const Mesh& mesh, const std::string& vertices_path, const std::string& triangles_path) {
  std::ofstream vf(vertices_path);
  if (!vf) throw std::runtime_error("cannot write " + vertices_path);
  vf << "id,r_hat_m,vy_hat_m\n";
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const auto& v = mesh.vertices()[i];
    vf << i << ',' << fmt_double(v.r_hat) << ',' << fmt_double(v.vy_hat) << '\n';
  }
  std::ofstream tf(triangles_path);
  if (!tf) throw std::runtime_error("cannot write " + triangles_path);
  tf << "v0,v1,v2\n";
  for (const auto& t : mesh.triangles()) tf << t[0] << ',' << t[1] << ',' << t[2] << '\n';
}

Mesh read_mesh_csv(const std::string& vertices_path, const std::string& triangles_path) {
  std::ifstream vf(vertices_path);
  if (!vf) throw std::runtime_error("cannot read " + vertices_path);
  std::string line;
  std::getline(vf, line);
  std::vector<DiscPoint> verts;
  while (std::getline(vf, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() < 3) throw std::runtime_error("malformed vertex row: " + line);
    verts.push_back({parse_double(cols[1]), parse_double(cols[2])});
  }
  std::ifstream tf(triangles_path);
  if (!tf) throw std::runtime_error("cannot read " + triangles_path);
  std::getline(tf, line);
  std::vector<std::array<int, 3>> tris;
  while (std::getline(tf, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() < 3) throw std::runtime_error("malformed triangle row: " + line);
    tris.push_back({std::stoi(cols[0]), std::stoi(cols[1]), std::stoi(cols[2])});
  }
  return Mesh(std::move(verts), std::move(tris));
}

}  // namespace slip
