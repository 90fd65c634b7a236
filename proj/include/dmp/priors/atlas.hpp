#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dmp/common/rng.hpp"
#include "dmp/geometry/kdtree.hpp"
#include "dmp/geometry/sampling.hpp"
#include "dmp/geometry/types.hpp"
#include "dmp/nn/init.hpp"
#include "dmp/priors/topology.hpp"

namespace dmp::priors {

using geometry::PointCloud;
using geometry::TriangleMesh;

enum class ChartKind { mlp, conv };

inline std::string to_string(ChartKind k) { return k == ChartKind::mlp ? "mlp" : "conv"; }

/// Network shape shared by every chart of an atlas.
struct ChartArch {
  std::vector<std::size_t> hidden = {256, 128, 64};
  bool batchnorm = true;
  /// First-layer bias spread; 0 keeps the GP-matching init.
  double first_bias_std = 0.0;
  std::size_t conv_channels = 512;
  std::size_t conv_blocks = 3;
  std::size_t conv_noise_side = 4;
};

/// Default per-chart sample count: 4096 each for multi-chart atlases,
/// 16384 for a single chart.
inline std::size_t default_points_per_chart(std::size_t k) { return k == 1 ? 16384 : 4096; }

struct Chart {
  nn::Network net;
  ChartKind kind = ChartKind::mlp;
  int n = 2;  ///< manifold dimension
  int d = 3;  ///< ambient dimension
  /// mlp: (points x n) grid in [0,1]^n. conv: (1 x s x s x channels) noise.
  nn::Tensor inputs;
  std::size_t rows = 0, cols = 0;  ///< sample grid shape (rows = 1 for curves)
  GridTopology topology;

  std::size_t point_count() const { return rows * cols; }
};

struct Atlas {
  std::vector<Chart> charts;
  int n = 2;
  int d = 3;
  ChartKind kind = ChartKind::mlp;

  std::size_t size() const noexcept { return charts.size(); }
  void validate() const {
    if (charts.empty()) throw InvalidArgument("atlas needs at least one chart");
    for (const auto& c : charts) {
      if (c.n != n || c.d != d || c.kind != kind) throw InvalidArgument("atlas charts disagree on (n, d, kind)");
    }
  }
};

/// Regular parameter grid: m points on [0,1] (n = 1) or side x side points
/// on [0,1]^2, row-major.
inline nn::Tensor parameter_grid(int n, std::size_t rows, std::size_t cols) {
  auto coord = [](std::size_t i, std::size_t m) { return static_cast<double>(i) / static_cast<double>(m - 1); };
  if (n == 1) {
    nn::Tensor t({cols, 1});
    for (std::size_t i = 0; i < cols; ++i) t.at(i, 0) = coord(i, cols);
    return t;
  }
  nn::Tensor t({rows * cols, 2});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      t.at(i * cols + j, 0) = coord(i, rows);
      t.at(i * cols + j, 1) = coord(j, cols);
    }
  }
  return t;
}

namespace detail {
inline std::size_t grid_side(std::size_t points) {
  auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(points))));
  if (s < 2 || s * s != points) {
    throw InvalidArgument("surface charts need a square sample count (got " + std::to_string(points) + ")");
  }
  return s;
}
}  // namespace detail

inline Chart make_chart(int n, int d, ChartKind kind, const ChartArch& arch, std::size_t points,
                        std::uint64_t seed) {
  Chart c;
  c.kind = kind;
  c.n = n;
  c.d = d;
  if (kind == ChartKind::mlp) {
    if (!((n == 1 && (d == 2 || d == 3)) || (n == 2 && d == 3))) {
      throw InvalidArgument("unsupported mlp chart (n=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
    }
    if (n == 1) {
      if (points < 2) throw InvalidArgument("curve charts need at least two samples");
      c.rows = 1;
      c.cols = points;
      c.topology = chain_topology(points);
    } else {
      c.rows = c.cols = detail::grid_side(points);
      c.topology = grid_topology(c.rows, c.cols);
    }
    c.inputs = parameter_grid(n, c.rows, c.cols);
    nn::MlpSpec spec;
    spec.sizes.push_back(static_cast<std::size_t>(n));
    for (std::size_t h : arch.hidden) spec.sizes.push_back(h);
    spec.sizes.push_back(static_cast<std::size_t>(d));
    spec.hidden = nn::Nonlinearity::relu;
    spec.output = nn::Nonlinearity::tanh;
    spec.batchnorm = arch.batchnorm;
    spec.first_bias_std = arch.first_bias_std;
    spec.seed = seed;
    c.net = nn::init_network(spec);
  } else {
    if (n != 2 || d != 3) {
      throw InvalidArgument("unsupported conv chart (n=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
    }
    if (arch.conv_blocks == 0 || arch.conv_noise_side == 0) throw InvalidArgument("conv chart needs blocks and a noise side");
    if ((arch.conv_channels >> (arch.conv_blocks - 1)) == 0) throw InvalidArgument("too few conv channels for the block count");
    const std::size_t side = arch.conv_noise_side << arch.conv_blocks;
    c.rows = c.cols = side;
    c.topology = grid_topology(side, side);
    c.net = nn::init_conv_decoder(arch.conv_channels, arch.conv_blocks, seed);
    // Noise is drawn once from its own stream and stays fixed.
    Rng rng = make_rng(derive_seed(seed, 0x6e6f697365));
    std::normal_distribution<double> g(0.0, 1.0);
    c.inputs = nn::Tensor({1, arch.conv_noise_side, arch.conv_noise_side, arch.conv_channels});
    for (double& v : c.inputs.data()) v = g(rng);
  }
  return c;
}

/// k independently initialized charts; chart i is seeded by derive_seed(seed, i).
/// `points_per_chart` = 0 picks default_points_per_chart(k); conv charts
/// always produce their fixed output grid.
inline Atlas make_atlas(std::size_t k, int n, int d, ChartKind kind, const ChartArch& arch = {},
                        std::uint64_t seed = 0, std::size_t points_per_chart = 0) {
  if (k == 0) throw InvalidArgument("atlas needs at least one chart");
  if (points_per_chart == 0) points_per_chart = default_points_per_chart(k);
  Atlas a;
  a.n = n;
  a.d = d;
  a.kind = kind;
  for (std::size_t i = 0; i < k; ++i) a.charts.push_back(make_chart(n, d, kind, arch, points_per_chart, derive_seed(seed, i)));
  return a;
}

/// Network output rows as points; d = 2 outputs get z = 0.
inline std::vector<geometry::Vec3> output_points(const nn::Tensor& out, int d) {
  const std::size_t dd = static_cast<std::size_t>(d);
  if (out.size() % dd != 0) throw ShapeError("chart output size is not a multiple of d");
  std::vector<geometry::Vec3> pts(out.size() / dd, geometry::Vec3::Zero());
  const double* p = out.raw();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t c = 0; c < dd; ++c) pts[i][static_cast<Eigen::Index>(c)] = p[i * dd + c];
  return pts;
}

/// Chart output on its sample inputs; batchnorm uses statistics of the full grid.
inline PointCloud sample_chart(const Chart& chart) {
  return PointCloud(output_points(chart.net.predict(chart.inputs), chart.d), chart.d);
}

inline PointCloud sample_atlas(const Atlas& atlas) {
  PointCloud out;
  out.dim = atlas.d;
  for (const auto& c : atlas.charts) {
    auto pts = sample_chart(c).points;
    out.points.insert(out.points.end(), pts.begin(), pts.end());
  }
  return out;
}

/// Mesh of the atlas at `resolution` samples per parameter axis. Each chart's
/// batchnorm statistics are frozen on its training grid first, so the mesh
/// matches the fitted samples at any resolution. Conv charts ignore
/// `resolution` and mesh their fixed output grid. Curve charts become
/// polylines in `edges`. Charts stay disjoint components.
inline TriangleMesh reconstruct(const Atlas& atlas, std::size_t resolution) {
  atlas.validate();
  if (resolution < 2) throw InvalidArgument("reconstruction resolution must be >= 2");
  TriangleMesh mesh;
  for (const auto& chart : atlas.charts) {
    if (chart.kind == ChartKind::conv) {
      const auto pts = sample_chart(chart).points;
      mesh.append(geometry::grid_to_mesh(pts, chart.rows));
      continue;
    }
    nn::Network net = chart.net;
    net.freeze_batchnorm(chart.inputs);
    if (chart.n == 1) {
      const auto pts = output_points(net.predict(parameter_grid(1, 1, resolution)), chart.d);
      mesh.append(geometry::polyline(pts));
    } else {
      const auto pts = output_points(net.predict(parameter_grid(2, resolution, resolution)), chart.d);
      mesh.append(geometry::grid_to_mesh(pts, resolution));
    }
  }
  return mesh;
}

/// Fraction of each chart's samples whose nearest sample on any other chart
/// lies within delta, averaged over charts. delta = 2 x the median length of
/// the sample-grid edges over all charts.
inline double overlap_metric(const Atlas& atlas) {
  atlas.validate();
  if (atlas.size() < 2) throw InvalidArgument("overlap metric needs at least two charts");
  std::vector<std::vector<geometry::Vec3>> samples;
  std::vector<double> edge_lengths;
  for (const auto& c : atlas.charts) {
    samples.push_back(sample_chart(c).points);
    const auto& s = samples.back();
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j : c.topology.neighbors[i])
        if (j > i) edge_lengths.push_back((s[i] - s[j]).norm());
  }
  const auto mid = edge_lengths.begin() + static_cast<std::ptrdiff_t>(edge_lengths.size() / 2);
  std::nth_element(edge_lengths.begin(), mid, edge_lengths.end());
  const double delta = 2.0 * *mid;

  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<geometry::Vec3> others;
    for (std::size_t j = 0; j < samples.size(); ++j)
      if (j != i) others.insert(others.end(), samples[j].begin(), samples[j].end());
    const geometry::SpatialIndex index(others);
    std::size_t close = 0;
    for (const auto& p : samples[i]) close += index.nearest(p).distance2 <= delta * delta ? 1 : 0;
    total += static_cast<double>(close) / static_cast<double>(samples[i].size());
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace dmp::priors
