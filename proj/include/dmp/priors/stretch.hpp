#pragma once

#include <span>
#include <vector>

#include "dmp/common/summation.hpp"
#include "dmp/geometry/types.hpp"
#include "dmp/priors/topology.hpp"

namespace dmp::priors {

using geometry::Vec3;

struct StretchResult {
  double value = 0.0;
  std::vector<Vec3> grad;  ///< d(value)/d(point_i)
};

/// Mean over positions x of sum_{x' in N(x)} |f(x) - f(x')|^2.
inline StretchResult stretch_loss(std::span<const Vec3> points, const GridTopology& topology) {
  if (points.size() != topology.size()) {
    throw ShapeError("stretch loss: " + std::to_string(points.size()) + " points but topology has " +
                     std::to_string(topology.size()) + " positions");
  }
  if (points.empty()) throw InvalidArgument("stretch loss of an empty chart");
  const double w = 1.0 / static_cast<double>(points.size());
  StretchResult out;
  out.grad.assign(points.size(), Vec3::Zero());
  std::vector<double> per(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j : topology.neighbors[i]) {
      const Vec3 diff = points[i] - points[j];
      per[i] += diff.squaredNorm();
      out.grad[i] += 2.0 * w * diff;
      out.grad[j] -= 2.0 * w * diff;
    }
  }
  out.value = w * pairwise_sum(per);
  return out;
}

}  // namespace dmp::priors
