#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bingham {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// An edge stores its two vertices (lower index first) and the triangles on
/// either side. `triangles[1]` is -1 for boundary edges.
struct Edge {
  std::array<int, 2> vertices{};
  std::array<int, 2> triangles{-1, -1};
};

/// Affine map from the reference triangle (0,0),(1,0),(0,1) onto a physical
/// triangle: x = origin + jacobian * xi.
struct AffineMap {
  Point origin;
  Eigen::Matrix2d jacobian;
  double det = 0.0;
  Eigen::Matrix2d inverse_transpose;

  [[nodiscard]] Point to_physical(double xi, double eta) const {
    return {origin.x + jacobian(0, 0) * xi + jacobian(0, 1) * eta,
            origin.y + jacobian(1, 0) * xi + jacobian(1, 1) * eta};
  }
};

/// Conforming triangulation of a planar domain. Immutable once built.
///
/// Local edge `e` of a triangle joins local vertices e and (e+1)%3, which is
/// the order used for the P2 edge degrees of freedom.
class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    build_edges();
    classify_boundary();
    compute_h();
  }

  [[nodiscard]] std::size_t vertex_count() const { return vertices_.size(); }
  [[nodiscard]] std::size_t triangle_count() const { return triangles_.size(); }
  [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }

  [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangle_edges() const {
    return triangle_edges_;
  }
  [[nodiscard]] const std::vector<bool>& boundary_vertex_flags() const { return boundary_vertex_; }
  [[nodiscard]] const std::vector<bool>& boundary_edge_flags() const { return boundary_edge_; }

  /// Largest edge length over all triangles.
  [[nodiscard]] double h() const { return h_; }

  [[nodiscard]] Point edge_midpoint(std::size_t e) const {
    const auto& [a, b] = edges_.at(e).vertices;
    return {0.5 * (vertices_[a].x + vertices_[b].x), 0.5 * (vertices_[a].y + vertices_[b].y)};
  }

  [[nodiscard]] AffineMap element_geometry(std::size_t t) const {
    if (t >= triangles_.size()) throw std::out_of_range("element_geometry: triangle index out of range");
    const auto& tri = triangles_[t];
    const Point& p0 = vertices_[tri[0]];
    const Point& p1 = vertices_[tri[1]];
    const Point& p2 = vertices_[tri[2]];
    AffineMap map;
    map.origin = p0;
    map.jacobian << p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y;
    map.det = map.jacobian.determinant();
    map.inverse_transpose = map.jacobian.inverse().transpose();
    return map;
  }

  [[nodiscard]] double triangle_area(std::size_t t) const { return 0.5 * element_geometry(t).det; }

  [[nodiscard]] Point centroid(std::size_t t) const {
    const auto& tri = triangles_.at(t);
    Point c;
    for (int v : tri) {
      c.x += vertices_[v].x / 3.0;
      c.y += vertices_[v].y / 3.0;
    }
    return c;
  }

 private:
  void build_edges() {
    std::map<std::pair<int, int>, int> lookup;
    triangle_edges_.resize(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      const auto& tri = triangles_[t];
      for (int e = 0; e < 3; ++e) {
        const int a = tri[e];
        const int b = tri[(e + 1) % 3];
        const auto key = std::minmax(a, b);
        auto [it, inserted] = lookup.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
        if (inserted) {
          Edge edge;
          edge.vertices = {key.first, key.second};
          edge.triangles[0] = static_cast<int>(t);
          edges_.push_back(edge);
        } else {
          Edge& edge = edges_[it->second];
          if (edge.triangles[1] != -1) throw std::invalid_argument("Mesh: edge shared by more than two triangles");
          edge.triangles[1] = static_cast<int>(t);
        }
        triangle_edges_[t][e] = it->second;
      }
    }
  }

  void classify_boundary() {
    boundary_vertex_.assign(vertices_.size(), false);
    boundary_edge_.assign(edges_.size(), false);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (edges_[e].triangles[1] == -1) {
        boundary_edge_[e] = true;
        boundary_vertex_[edges_[e].vertices[0]] = true;
        boundary_vertex_[edges_[e].vertices[1]] = true;
      }
    }
  }

  void compute_h() {
    h_ = 0.0;
    for (const auto& edge : edges_) {
      const Point& a = vertices_[edge.vertices[0]];
      const Point& b = vertices_[edge.vertices[1]];
      h_ = std::max(h_, std::hypot(a.x - b.x, a.y - b.y));
    }
  }

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> boundary_edge_;
  double h_ = 0.0;
};

/// Uniform nx-by-ny grid of [x0,x1]x[y0,y1], every cell split along its
/// bottom-left to top-right diagonal. Vertex (i, j) has index i + j*(nx+1).
inline Mesh build_uniform_rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_uniform_rectangle: subdivisions must be >= 1");
  if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("build_uniform_rectangle: empty rectangle");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    // Endpoints are assigned exactly so boundary tests can compare against 0 and 1.
    const double y = (j == ny) ? y1 : y0 + (y1 - y0) * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? x1 : x0 + (x1 - x0) * i / nx;
      vertices.push_back({x, y});
    }
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  const int stride = nx + 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = i + j * stride;
      const int v10 = v00 + 1;
      const int v01 = v00 + stride;
      const int v11 = v01 + 1;
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

inline Mesh build_uniform_unit_square(int n) {
  if (n < 1) throw std::invalid_argument("build_uniform_unit_square: n must be >= 1");
  return build_uniform_rectangle(0.0, 1.0, 0.0, 1.0, n, n);
}

}  // namespace bingham
