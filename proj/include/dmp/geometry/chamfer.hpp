#pragma once

#include <span>
#include <vector>

#include "dmp/common/summation.hpp"
#include "dmp/geometry/kdtree.hpp"
#include "dmp/geometry/types.hpp"

namespace dmp::geometry {

/// How each directional term aggregates its per-point squared distances.
enum class Reduction { mean, sum };

struct ChamferResult {
  double value = 0.0;
  /// d(value)/d(a_i), with nearest-neighbor assignments held fixed.
  std::vector<Vec3> grad;
};

/// Symmetric Chamfer distance between `a` and `b` given prebuilt indices.
inline ChamferResult chamfer(std::span<const Vec3> a, const SpatialIndex& index_a,
                             std::span<const Vec3> b, const SpatialIndex& index_b,
                             Reduction reduction = Reduction::mean) {
  if (a.empty() || b.empty()) throw InvalidArgument("chamfer distance of an empty point set");
  if (index_a.size() != a.size() || index_b.size() != b.size()) {
    throw ShapeError("chamfer index does not match its point set");
  }
  const double wa = reduction == Reduction::mean ? 1.0 / static_cast<double>(a.size()) : 1.0;
  const double wb = reduction == Reduction::mean ? 1.0 / static_cast<double>(b.size()) : 1.0;

  ChamferResult out;
  out.grad.assign(a.size(), Vec3::Zero());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Neighbor nb = index_b.nearest(a[i]);
    d[i] = nb.distance2;
    out.grad[i] += 2.0 * wa * (a[i] - b[nb.index]);
  }
  const double term_a = pairwise_sum(d);

  d.resize(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    const Neighbor na = index_a.nearest(b[j]);
    d[j] = na.distance2;
    out.grad[na.index] += 2.0 * wb * (a[na.index] - b[j]);
  }
  const double term_b = pairwise_sum(d);

  out.value = wa * term_a + wb * term_b;
  return out;
}

inline ChamferResult chamfer(std::span<const Vec3> a, std::span<const Vec3> b,
                             Reduction reduction = Reduction::mean) {
  if (a.empty() || b.empty()) throw InvalidArgument("chamfer distance of an empty point set");
  return chamfer(a, SpatialIndex(a), b, SpatialIndex(b), reduction);
}

inline ChamferResult chamfer(const PointCloud& a, const PointCloud& b,
                             Reduction reduction = Reduction::mean) {
  if (a.dim != b.dim) throw ShapeError("chamfer distance between clouds of different dim");
  return chamfer(std::span<const Vec3>(a.points), std::span<const Vec3>(b.points), reduction);
}

/// Value only; skips the gradient bookkeeping.
inline double chamfer_distance(const PointCloud& a, const PointCloud& b,
                               Reduction reduction = Reduction::mean) {
  if (a.dim != b.dim) throw ShapeError("chamfer distance between clouds of different dim");
  if (a.empty() || b.empty()) throw InvalidArgument("chamfer distance of an empty point set");
  const SpatialIndex ia(a), ib(b);
  auto directional = [&](const PointCloud& src, const SpatialIndex& dst) {
    std::vector<double> d(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) d[i] = dst.nearest(src.points[i]).distance2;
    const double w = reduction == Reduction::mean ? 1.0 / static_cast<double>(src.size()) : 1.0;
    return w * pairwise_sum(d);
  };
  return directional(a, ib) + directional(b, ia);
}

}  // namespace dmp::geometry
