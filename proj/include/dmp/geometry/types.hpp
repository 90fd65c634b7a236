#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dmp/common/error.hpp"

namespace dmp::geometry {

using Vec3 = Eigen::Vector3d;

/// Points in 2 or 3 dimensions. Planar clouds keep z = 0 so that every
/// routine can work on 3-vectors.
struct PointCloud {
  int dim = 3;
  std::vector<Vec3> points;
  std::optional<std::vector<Vec3>> normals;

  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> pts, int d = 3) : dim(d), points(std::move(pts)) {}

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  bool has_normals() const noexcept { return normals.has_value(); }

  /// Throws if the invariants (finite coordinates, planar z, unit normals) do not hold.
  void validate() const {
    if (dim != 2 && dim != 3) throw InvalidArgument("point cloud dim must be 2 or 3");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].allFinite()) {
        throw NonFiniteError("point " + std::to_string(i) + " has non-finite coordinates");
      }
      if (dim == 2 && points[i].z() != 0.0) {
        throw InvalidArgument("planar point " + std::to_string(i) + " has nonzero z");
      }
    }
    if (normals) {
      if (normals->size() != points.size()) throw ShapeError("normal count differs from point count");
      for (std::size_t i = 0; i < normals->size(); ++i) {
        if (std::abs((*normals)[i].norm() - 1.0) > 1e-6) {
          throw InvalidArgument("normal " + std::to_string(i) + " is not unit length");
        }
      }
    }
  }
};

/// Triangles plus optional polyline segments. One-dimensional reconstructions
/// carry only `edges`.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> faces;
  std::vector<std::array<std::size_t, 2>> edges;

  bool empty() const noexcept { return faces.empty() && edges.empty(); }

  void validate() const {
    const std::size_t n = vertices.size();
    for (const auto& f : faces) {
      if (f[0] >= n || f[1] >= n || f[2] >= n) throw ShapeError("face index out of range");
    }
    for (const auto& e : edges) {
      if (e[0] >= n || e[1] >= n) throw ShapeError("edge index out of range");
    }
  }

  double face_area(std::size_t f) const {
    const auto& t = faces[f];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }

  double total_area() const {
    double a = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) a += face_area(f);
    return a;
  }

  /// Appends `other`, offsetting its indices.
  void append(const TriangleMesh& other) {
    const std::size_t off = vertices.size();
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (auto f : other.faces) faces.push_back({f[0] + off, f[1] + off, f[2] + off});
    for (auto e : other.edges) edges.push_back({e[0] + off, e[1] + off});
  }
};

/// Scalar samples on a regular lattice; node (i, j, k) sits at
/// origin + (i, j, k) * cell and is stored at i + nx * (j + ny * k).
struct ScalarGrid {
  std::array<std::size_t, 3> resolution{};
  Vec3 origin = Vec3::Zero();
  Vec3 cell = Vec3::Ones();
  std::vector<double> values;

  ScalarGrid() = default;
  ScalarGrid(std::array<std::size_t, 3> res, Vec3 org, Vec3 cell_size)
      : resolution(res), origin(std::move(org)), cell(std::move(cell_size)),
        values(res[0] * res[1] * res[2], 0.0) {}

  /// Cubic lattice with `n` nodes per axis spanning [lo, hi]^3.
  static ScalarGrid cube(std::size_t n, double lo, double hi) {
    if (n < 2) throw InvalidArgument("grid needs at least 2 nodes per axis");
    const double h = (hi - lo) / static_cast<double>(n - 1);
    return ScalarGrid({n, n, n}, Vec3::Constant(lo), Vec3::Constant(h));
  }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + resolution[0] * (j + resolution[1] * k);
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) { return values[index(i, j, k)]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }
  Vec3 position(std::size_t i, std::size_t j, std::size_t k) const {
    return origin + Vec3(static_cast<double>(i) * cell.x(), static_cast<double>(j) * cell.y(),
                         static_cast<double>(k) * cell.z());
  }

  void validate() const {
    if (values.size() != resolution[0] * resolution[1] * resolution[2]) {
      throw ShapeError("grid value count does not match resolution");
    }
  }
};

/// Keeps the first `d` coordinates (the rest are zeroed) and relabels the dim.
inline PointCloud with_dim(PointCloud cloud, int d) {
  if (d != 2 && d != 3) throw InvalidArgument("point cloud dim must be 2 or 3");
  if (d == 2) {
    for (auto& p : cloud.points) p.z() = 0.0;
    if (cloud.normals) {
      for (auto& n : *cloud.normals) {
        n.z() = 0.0;
        const double len = n.norm();
        if (len > 0.0) n /= len;
      }
    }
  }
  cloud.dim = d;
  return cloud;
}

}  // namespace dmp::geometry
