#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <queue>
#include <tuple>
#include <vector>

#include "dmp/geometry/kdtree.hpp"
#include "dmp/geometry/types.hpp"

namespace dmp::geometry {

/// Relative eigenvalue gap below which a neighborhood counts as collinear.
inline constexpr double kDegenerateTolerance = 1e-10;

struct NormalEstimate {
  PointCloud cloud;               ///< input with unit normals attached
  std::vector<bool> degenerate;   ///< per point; such normals are placeholders
  std::size_t degenerate_count = 0;
};

namespace detail {

/// PCA normal of the points `nb` (indices into `pts`). Returns false if the
/// neighborhood does not span enough dimensions to define one.
inline bool pca_normal(const std::vector<Vec3>& pts, const std::vector<Neighbor>& nb, int dim,
                       Vec3& normal) {
  Vec3 mean = Vec3::Zero();
  for (const auto& n : nb) mean += pts[n.index];
  mean /= static_cast<double>(nb.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& n : nb) {
    const Vec3 d = pts[n.index] - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(nb.size());

  if (dim == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov.topLeftCorner<2, 2>());
    const auto& ev = es.eigenvalues();
    if (!(ev[1] > 0.0)) return false;
    normal = Vec3(es.eigenvectors()(0, 0), es.eigenvectors()(1, 0), 0.0).normalized();
    return true;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const auto& ev = es.eigenvalues();  // ascending
  if (!(ev[2] > 0.0) || ev[1] <= kDegenerateTolerance * ev[2]) return false;
  normal = es.eigenvectors().col(0).normalized();
  return true;
}

}  // namespace detail

/// PCA normals over the k nearest neighbors (the point itself included),
/// oriented consistently by propagation along a minimum spanning tree of the
/// k-NN graph with edge weight 1 - |n_i . n_j|. Each tree is rooted at its
/// point of largest last coordinate, whose normal is made to point upward.
/// Degenerate neighborhoods are flagged rather than reported as errors.
inline NormalEstimate estimate_normals_report(const PointCloud& cloud, std::size_t k) {
  if (k < 3) throw InvalidArgument("normal estimation needs k >= 3 neighbors");
  if (k >= cloud.size()) {
    throw InvalidArgument("normal estimation needs more than k = " + std::to_string(k) + " points");
  }
  const auto& pts = cloud.points;
  const std::size_t n = pts.size();
  const int up = cloud.dim - 1;
  const SpatialIndex index(cloud);

  NormalEstimate out;
  out.cloud = cloud;
  out.degenerate.assign(n, false);
  std::vector<Vec3> normals(n, Vec3::UnitZ());
  if (cloud.dim == 2) std::fill(normals.begin(), normals.end(), Vec3::UnitY());
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = index.knn(pts[i], k);
    Vec3 nrm;
    if (detail::pca_normal(pts, nb, cloud.dim, nrm)) {
      normals[i] = nrm;
    } else {
      out.degenerate[i] = true;
      ++out.degenerate_count;
    }
    for (const auto& m : nb) {
      if (m.index == i) continue;
      adj[i].push_back(m.index);
      adj[m.index].push_back(i);
    }
  }

  // Prim's algorithm per connected component.
  using Item = std::tuple<double, std::size_t, std::size_t>;  // weight, node, parent
  std::vector<bool> visited(n, false);
  for (std::size_t i = 0; i < n; ++i) visited[i] = out.degenerate[i];
  for (;;) {
    std::size_t root = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!visited[i] && (root == n || pts[i][up] > pts[root][up])) root = i;
    }
    if (root == n) break;
    if (normals[root][up] < 0.0) normals[root] = -normals[root];
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, root, root);
    while (!pq.empty()) {
      const auto [w, v, parent] = pq.top();
      pq.pop();
      if (visited[v]) continue;
      visited[v] = true;
      if (v != parent && normals[v].dot(normals[parent]) < 0.0) normals[v] = -normals[v];
      for (std::size_t u : adj[v]) {
        if (!visited[u]) pq.emplace(1.0 - std::abs(normals[u].dot(normals[v])), u, v);
      }
    }
  }
  out.cloud.normals = std::move(normals);
  return out;
}

/// As estimate_normals_report, but a degenerate neighborhood is an error.
inline PointCloud estimate_normals(const PointCloud& cloud, std::size_t k) {
  NormalEstimate est = estimate_normals_report(cloud, k);
  for (std::size_t i = 0; i < est.degenerate.size(); ++i) {
    if (est.degenerate[i]) {
      throw DegenerateError("neighborhood of point " + std::to_string(i) +
                                " is collinear; its normal is undefined",
                            i);
    }
  }
  return std::move(est.cloud);
}

}  // namespace dmp::geometry
