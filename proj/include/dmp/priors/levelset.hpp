#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dmp/geometry/marching_cubes.hpp"
#include "dmp/geometry/normals.hpp"
#include "dmp/nn/adam.hpp"
#include "dmp/nn/init.hpp"
#include "dmp/priors/atlas.hpp"
#include "dmp/priors/fit.hpp"

namespace dmp::priors {

struct LevelSetOptions {
  double epsilon = 2e-3;  ///< offset along the normal for the +-1 samples
  std::size_t k_normals = 20;
  /// Fraction of degenerate normals above which fitting refuses to run.
  double max_degenerate_fraction = 0.10;
  ChartArch arch;

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidArgument("level-set epsilon must be positive");
    if (k_normals < 3) throw InvalidArgument("level-set normal estimation needs k >= 3");
  }
};

struct LevelSetModel {
  nn::Network net;  ///< R^3 -> R, batchnorm frozen on the training set after fitting
  double epsilon = 2e-3;
  std::size_t k_normals = 20;
  std::vector<double> history;  ///< MSE per iteration

  double evaluate(const geometry::Vec3& p) const {
    nn::Tensor x({1, 3});
    for (std::size_t c = 0; c < 3; ++c) x.at(0, c) = p[static_cast<Eigen::Index>(c)];
    return net.predict(x).at(0, 0);
  }
};

/// Training set {(p + eps n, +1), (p - eps n, -1)} for every point with a
/// valid normal; rows 2i and 2i + 1 come from the i-th kept point.
struct LevelSetSamples {
  nn::Tensor inputs;  ///< (2m x 3)
  nn::Tensor labels;  ///< (2m x 1)
  std::size_t skipped = 0;
};

inline LevelSetSamples levelset_samples(const PointCloud& cloud, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("level-set epsilon must be positive");
  if (!cloud.normals) throw InvalidArgument("level-set samples need normals");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if ((*cloud.normals)[i].allFinite() && (*cloud.normals)[i].norm() > 0.5) keep.push_back(i);
  }
  LevelSetSamples s;
  s.skipped = cloud.size() - keep.size();
  s.inputs = nn::Tensor({2 * keep.size(), 3});
  s.labels = nn::Tensor({2 * keep.size(), 1});
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto& p = cloud.points[keep[r]];
    const auto& n = (*cloud.normals)[keep[r]];
    for (std::size_t c = 0; c < 3; ++c) {
      const auto e = static_cast<Eigen::Index>(c);
      s.inputs.at(2 * r, c) = p[e] + epsilon * n[e];
      s.inputs.at(2 * r + 1, c) = p[e] - epsilon * n[e];
    }
    s.labels.at(2 * r, 0) = 1.0;
    s.labels.at(2 * r + 1, 0) = -1.0;
  }
  return s;
}

/// Estimates normals, then trains an MLP with linear scalar output by full-batch
/// Adam on the mean-squared error to the +-1 labels.
inline LevelSetModel fit_levelset(const PointCloud& target, const FitConfig& cfg, const LevelSetOptions& opt = {}) {
  cfg.validate();
  opt.validate();
  target.validate();
  if (target.dim != 3) throw InvalidArgument("level-set fitting needs a 3D point cloud");
  if (target.size() < opt.k_normals + 1) {
    throw InvalidArgument("level-set fitting needs at least " + std::to_string(opt.k_normals + 1) + " points");
  }
  auto est = geometry::estimate_normals_report(target, opt.k_normals);
  const double frac = static_cast<double>(est.degenerate_count) / static_cast<double>(target.size());
  if (frac > opt.max_degenerate_fraction) {
    throw DegenerateError(std::to_string(est.degenerate_count) + " of " + std::to_string(target.size()) +
                          " points have degenerate normals (limit " +
                          std::to_string(static_cast<int>(opt.max_degenerate_fraction * 100)) + "%)");
  }
  for (std::size_t i = 0; i < est.degenerate.size(); ++i) {
    if (est.degenerate[i]) (*est.cloud.normals)[i] = geometry::Vec3::Zero();
  }
  const LevelSetSamples data = levelset_samples(est.cloud, opt.epsilon);

  nn::MlpSpec spec;
  spec.sizes = {3};
  for (std::size_t h : opt.arch.hidden) spec.sizes.push_back(h);
  spec.sizes.push_back(1);
  spec.hidden = nn::Nonlinearity::relu;
  spec.output = nn::Nonlinearity::none;
  spec.batchnorm = opt.arch.batchnorm;
  spec.first_bias_std = opt.arch.first_bias_std;
  spec.seed = cfg.seed;

  LevelSetModel model;
  model.net = nn::init_network(spec);
  model.epsilon = opt.epsilon;
  model.k_normals = opt.k_normals;
  nn::AdamState optim;
  optim.learning_rate = cfg.learning_rate;
  const std::size_t m = data.labels.size();
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const nn::Tensor y = model.net.forward(data.inputs);
    nn::Tensor g({m, 1});
    std::vector<double> sq(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double r = y.at(i, 0) - data.labels.at(i, 0);
      sq[i] = r * r;
      g.at(i, 0) = 2.0 * r / static_cast<double>(m);
    }
    const double loss = pairwise_sum(sq) / static_cast<double>(m);
    if (!std::isfinite(loss)) throw NonFiniteError("level-set fit diverged at iteration " + std::to_string(it));
    model.history.push_back(loss);
    model.net.backward(g);
    nn::adam_step(model.net, optim);
    if (cfg.on_iteration) cfg.on_iteration(it, loss);
  }
  model.net.freeze_batchnorm(data.inputs);
  return model;
}

inline constexpr double kLevelSetLo = -0.05;
inline constexpr double kLevelSetHi = 1.05;

struct LevelSetExtraction {
  TriangleMesh mesh;
  std::optional<std::string> warning;  ///< set when the field has no zero crossing
};

/// Samples the field on a resolution^3 lattice over [-0.05, 1.05]^3 and runs
/// marching cubes at iso 0 (inside = negative).
inline LevelSetExtraction extract_levelset(const LevelSetModel& model, std::size_t resolution) {
  if (resolution < 2) throw InvalidArgument("level-set resolution must be >= 2");
  auto grid = geometry::ScalarGrid::cube(resolution, kLevelSetLo, kLevelSetHi);
  const std::size_t total = grid.values.size();
  constexpr std::size_t kBatch = 16384;
  for (std::size_t start = 0; start < total; start += kBatch) {
    const std::size_t count = std::min(kBatch, total - start);
    nn::Tensor x({count, 3});
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t idx = start + r;
      const std::size_t i = idx % resolution, j = (idx / resolution) % resolution, k = idx / (resolution * resolution);
      const auto p = grid.position(i, j, k);
      for (std::size_t c = 0; c < 3; ++c) x.at(r, c) = p[static_cast<Eigen::Index>(c)];
    }
    const nn::Tensor y = model.net.predict(x);
    for (std::size_t r = 0; r < count; ++r) grid.values[start + r] = y.at(r, 0);
  }
  LevelSetExtraction out;
  bool neg = false, pos = false;
  for (double v : grid.values) {
    neg = neg || v < 0.0;
    pos = pos || v >= 0.0;
  }
  if (!(neg && pos)) {
    out.warning = "level-set field has no zero crossing on the evaluation grid; mesh is empty";
    return out;
  }
  out.mesh = geometry::marching_cubes(grid, 0.0);
  return out;
}

}  // namespace dmp::priors
