#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "dmp/geometry/types.hpp"

namespace dmp::geometry {

struct Neighbor {
  std::size_t index = 0;
  double distance2 = std::numeric_limits<double>::infinity();

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance2 < b.distance2 || (a.distance2 == b.distance2 && a.index < b.index);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Immutable balanced k-d tree over 3-vectors.
///
/// Queries return exactly what a linear scan would: squared distances are
/// computed the same way and ties go to the lowest point index. A subtree is
/// only skipped when a lower bound on its distance (accumulated per-axis
/// offsets to its cell, padded against rounding) strictly exceeds the
/// current worst candidate.
class SpatialIndex {
 public:
  static constexpr std::size_t kLeafSize = 8;
  static constexpr double kBoundSlack = 1.0 + 1e-12;

  SpatialIndex() = default;
  explicit SpatialIndex(std::span<const Vec3> points) { build(points); }
  explicit SpatialIndex(const PointCloud& cloud) : SpatialIndex(std::span<const Vec3>(cloud.points)) {}

  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }

  Neighbor nearest(const Vec3& q) const {
    if (empty()) throw InvalidArgument("nearest-neighbor query on an empty index");
    Neighbor best;
    Vec3 off = Vec3::Zero();
    nearest_rec(0, q, best, 0.0, off);
    return best;
  }

  /// The k nearest points sorted by (distance, index); k is clamped to size().
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const {
    if (empty()) throw InvalidArgument("k-nearest query on an empty index");
    k = std::min(k, size());
    std::vector<Neighbor> heap;
    heap.reserve(k + 1);
    Vec3 off = Vec3::Zero();
    if (k > 0) knn_rec(0, q, k, heap, 0.0, off);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

 private:
  struct Node {
    std::uint32_t begin, end;
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };

  void build(std::span<const Vec3> points) {
    pts_.assign(points.begin(), points.end());
    order_.resize(pts_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.clear();
    if (!pts_.empty()) build_rec(0, pts_.size());
    // Store points in leaf order for cache-friendly scans.
    sorted_.resize(pts_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) sorted_[i] = pts_[order_[i]];
    pts_.clear();
    pts_.shrink_to_fit();
  }

  std::int32_t build_rec(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    if (end - begin <= kLeafSize) return id;

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = lo.cwiseMin(pts_[order_[i]]);
      hi = hi.cwiseMax(pts_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] == lo[axis]) return id;  // all points coincide

    const std::size_t mid = begin + (end - begin) / 2;
    auto less = [&](std::size_t a, std::size_t b) {
      const double ca = pts_[a][axis], cb = pts_[b][axis];
      return ca < cb || (ca == cb && a < b);
    };
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), less);
    const double split = pts_[order_[mid]][axis];
    const std::int32_t l = build_rec(begin, mid);
    const std::int32_t r = build_rec(mid, end);
    Node& n = nodes_[static_cast<std::size_t>(id)];
    n.axis = axis;
    n.split = split;
    n.left = l;
    n.right = r;
    return id;
  }

  // rd is a lower bound on the squared distance from q to the node's cell,
  // built from the per-axis offsets in `off` (incremental distance bounds).
  void nearest_rec(std::int32_t id, const Vec3& q, Neighbor& best, double rd, Vec3& off) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const Neighbor c{order_[i], (sorted_[i] - q).squaredNorm()};
        if (c < best) best = c;
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    const std::int32_t near = diff < 0 ? n.left : n.right;
    const std::int32_t far = diff < 0 ? n.right : n.left;
    nearest_rec(near, q, best, rd, off);
    const double old = off[n.axis];
    const double far_rd = rd - old * old + diff * diff;
    if (far_rd <= best.distance2 * kBoundSlack) {
      off[n.axis] = diff;
      nearest_rec(far, q, best, far_rd, off);
      off[n.axis] = old;
    }
  }

  void knn_rec(std::int32_t id, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap, double rd,
               Vec3& off) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const Neighbor c{order_[i], (sorted_[i] - q).squaredNorm()};
        if (heap.size() < k) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    const std::int32_t near = diff < 0 ? n.left : n.right;
    const std::int32_t far = diff < 0 ? n.right : n.left;
    knn_rec(near, q, k, heap, rd, off);
    const double old = off[n.axis];
    const double far_rd = rd - old * old + diff * diff;
    if (heap.size() < k || far_rd <= heap.front().distance2 * kBoundSlack) {
      off[n.axis] = diff;
      knn_rec(far, q, k, heap, far_rd, off);
      off[n.axis] = old;
    }
  }

  std::vector<Vec3> pts_;
  std::vector<Vec3> sorted_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Exhaustive reference for testing.
inline Neighbor nearest_linear(std::span<const Vec3> points, const Vec3& q) {
  Neighbor best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Neighbor c{i, (points[i] - q).squaredNorm()};
    if (c < best) best = c;
  }
  return best;
}

}  // namespace dmp::geometry
