#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "dmp/common/rng.hpp"
#include "dmp/geometry/types.hpp"

namespace dmp::geometry {

struct MeshSample {
  PointCloud cloud;
  /// Face (or edge, for polylines) each point was drawn from.
  std::vector<std::size_t> element;
};

namespace detail {

/// Index of the element hit by `u` in [0, total) given inclusive prefix sums.
inline std::size_t pick(const std::vector<double>& prefix, double u) {
  auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
  auto i = static_cast<std::size_t>(it - prefix.begin());
  return std::min(i, prefix.size() - 1);
}

}  // namespace detail

/// Area-weighted face choice followed by uniform barycentric sampling. Meshes
/// without faces are treated as polylines and sampled by edge length.
inline MeshSample sample_mesh_detailed(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  mesh.validate();
  MeshSample out;
  out.cloud.dim = 3;
  if (n == 0) return out;

  const bool surface = !mesh.faces.empty();
  const std::size_t m = surface ? mesh.faces.size() : mesh.edges.size();
  std::vector<double> prefix(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double w = 0.0;
    if (surface) {
      w = mesh.face_area(i);
    } else {
      w = (mesh.vertices[mesh.edges[i][1]] - mesh.vertices[mesh.edges[i][0]]).norm();
    }
    if (!std::isfinite(w)) throw NonFiniteError("mesh element with non-finite measure");
    total += w;
    prefix[i] = total;
  }
  if (!(total > 0.0)) throw DegenerateError("every mesh element is degenerate; nothing to sample");

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  out.cloud.points.reserve(n);
  out.element.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t e = detail::pick(prefix, uni(rng) * total);
    if (surface) {
      const auto& f = mesh.faces[e];
      const double r1 = std::sqrt(uni(rng));
      const double r2 = uni(rng);
      out.cloud.points.push_back((1.0 - r1) * mesh.vertices[f[0]] +
                                 r1 * (1.0 - r2) * mesh.vertices[f[1]] +
                                 r1 * r2 * mesh.vertices[f[2]]);
    } else {
      const auto& ed = mesh.edges[e];
      const double t = uni(rng);
      out.cloud.points.push_back((1.0 - t) * mesh.vertices[ed[0]] + t * mesh.vertices[ed[1]]);
    }
    out.element.push_back(e);
  }
  return out;
}

inline PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  return sample_mesh_detailed(mesh, n, seed).cloud;
}

/// Adds independent N(0, sigma^2) noise to every coordinate; normals are dropped.
inline PointCloud perturb(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  PointCloud out(cloud.points, cloud.dim);
  if (sigma == 0.0) return out;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& p : out.points) {
    for (int c = 0; c < cloud.dim; ++c) p[c] += noise(rng);
  }
  return out;
}

/// Uniform selection of n points without replacement (partial Fisher-Yates).
inline PointCloud subsample(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > cloud.size()) {
    throw InvalidArgument("subsample size " + std::to_string(n) + " is outside [1, " +
                          std::to_string(cloud.size()) + "]");
  }
  std::vector<std::size_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  PointCloud out;
  out.dim = cloud.dim;
  out.points.reserve(n);
  if (cloud.normals) out.normals.emplace();
  for (std::size_t i = 0; i < n; ++i) {
    out.points.push_back(cloud.points[idx[i]]);
    if (cloud.normals) out.normals->push_back((*cloud.normals)[idx[i]]);
  }
  return out;
}

/// Triangulates an r x r grid of points stored row-major (index i * r + j).
/// Each cell is split along its (i, j)-(i+1, j+1) diagonal; zero-area
/// triangles are dropped.
inline TriangleMesh grid_to_mesh(std::span<const Vec3> grid, std::size_t r) {
  if (r < 2) throw InvalidArgument("grid_to_mesh needs r >= 2");
  if (grid.size() != r * r) throw ShapeError("grid_to_mesh expects r * r points");
  TriangleMesh mesh;
  mesh.vertices.assign(grid.begin(), grid.end());
  mesh.faces.reserve(2 * (r - 1) * (r - 1));
  auto keep = [&](std::array<std::size_t, 3> f) {
    const double a = (grid[f[1]] - grid[f[0]]).cross(grid[f[2]] - grid[f[0]]).norm();
    if (a > 0.0) mesh.faces.push_back(f);
  };
  for (std::size_t i = 0; i + 1 < r; ++i) {
    for (std::size_t j = 0; j + 1 < r; ++j) {
      const std::size_t a = i * r + j, b = (i + 1) * r + j, c = (i + 1) * r + j + 1,
                        d = i * r + j + 1;
      keep({a, b, c});
      keep({a, c, d});
    }
  }
  return mesh;
}

/// Open polyline through consecutive points; zero-length segments are dropped.
inline TriangleMesh polyline(std::span<const Vec3> points) {
  TriangleMesh mesh;
  mesh.vertices.assign(points.begin(), points.end());
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if ((points[i + 1] - points[i]).squaredNorm() > 0.0) mesh.edges.push_back({i, i + 1});
  }
  return mesh;
}

}  // namespace dmp::geometry
