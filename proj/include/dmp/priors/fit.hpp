#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dmp/geometry/chamfer.hpp"
#include "dmp/nn/adam.hpp"
#include "dmp/priors/atlas.hpp"
#include "dmp/priors/stretch.hpp"

namespace dmp::priors {

struct FitConfig {
  double lambda = 1.0;  ///< stretch weight
  double learning_rate = 1e-3;
  std::size_t iterations = 5000;
  std::uint64_t seed = 0;
  /// 0 = default_points_per_chart(k). Used when the caller builds the atlas.
  std::size_t points_per_chart = 0;
  /// Called after each iteration with (iteration, total loss).
  std::function<void(std::size_t, double)> on_iteration;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  }
};

struct FitHistory {
  std::vector<double> total;    ///< L_C + lambda L_S at the start of each iteration
  std::vector<double> chamfer;
  std::vector<double> stretch;  ///< mean stretch over charts
};

/// Adam on L = Chamfer(union of chart samples, target) + lambda * mean_i L_S(chart i).
/// Every chart has its own optimizer state; the target index is built once.
inline FitHistory fit_atlas(Atlas& atlas, const PointCloud& target, const FitConfig& cfg) {
  cfg.validate();
  atlas.validate();
  target.validate();
  if (target.dim != atlas.d) {
    throw ShapeError("target dim " + std::to_string(target.dim) + " does not match atlas d " + std::to_string(atlas.d));
  }
  if (target.empty()) throw InvalidArgument("fit target is empty");

  const std::size_t k = atlas.size();
  const std::size_t d = static_cast<std::size_t>(atlas.d);
  const geometry::SpatialIndex target_index(target);
  std::vector<nn::AdamState> optim(k);
  for (auto& o : optim) o.learning_rate = cfg.learning_rate;

  FitHistory history;
  std::vector<nn::Tensor> outs(k);
  std::vector<std::size_t> offset(k + 1, 0);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::vector<geometry::Vec3> all;
    for (std::size_t c = 0; c < k; ++c) {
      try {
        outs[c] = atlas.charts[c].net.forward(atlas.charts[c].inputs);
      } catch (const NonFiniteError& e) {
        throw NonFiniteError("fit diverged at iteration " + std::to_string(it) + ", chart " + std::to_string(c) + ": " +
                             e.what());
      }
      const auto pts = output_points(outs[c], atlas.d);
      offset[c + 1] = offset[c] + pts.size();
      all.insert(all.end(), pts.begin(), pts.end());
    }

    const geometry::SpatialIndex all_index(all);
    const auto ch = geometry::chamfer(all, all_index, target.points, target_index);
    double stretch_sum = 0.0;
    std::vector<StretchResult> st(k);
    if (cfg.lambda > 0.0) {
      for (std::size_t c = 0; c < k; ++c) {
        st[c] = stretch_loss(std::span<const geometry::Vec3>(all).subspan(offset[c], offset[c + 1] - offset[c]),
                             atlas.charts[c].topology);
        stretch_sum += st[c].value;
      }
    }
    const double stretch = stretch_sum / static_cast<double>(k);
    const double total = ch.value + cfg.lambda * stretch;
    if (!std::isfinite(total)) {
      for (std::size_t c = 0; c < k; ++c) {
        if (!outs[c].all_finite() || (cfg.lambda > 0.0 && !std::isfinite(st[c].value))) {
          throw NonFiniteError("fit diverged at iteration " + std::to_string(it) + ", chart " + std::to_string(c));
        }
      }
      throw NonFiniteError("fit diverged at iteration " + std::to_string(it) + " (Chamfer term)");
    }
    history.total.push_back(total);
    history.chamfer.push_back(ch.value);
    history.stretch.push_back(stretch);

    const double ws = cfg.lambda / static_cast<double>(k);
    for (std::size_t c = 0; c < k; ++c) {
      nn::Tensor g(outs[c].shape(), 0.0);
      double* gp = g.raw();
      for (std::size_t i = 0; i + offset[c] < offset[c + 1]; ++i) {
        geometry::Vec3 gi = ch.grad[offset[c] + i];
        if (cfg.lambda > 0.0) gi += ws * st[c].grad[i];
        for (std::size_t j = 0; j < d; ++j) gp[i * d + j] = gi[static_cast<Eigen::Index>(j)];
      }
      atlas.charts[c].net.backward(g);
      nn::adam_step(atlas.charts[c].net, optim[c]);
    }
    if (cfg.on_iteration) cfg.on_iteration(it, total);
  }
  return history;
}

}  // namespace dmp::priors
