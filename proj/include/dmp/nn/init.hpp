#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dmp/common/error.hpp"
#include "dmp/common/rng.hpp"
#include "dmp/nn/network.hpp"

namespace dmp::nn {

enum class Nonlinearity { relu, leaky_relu, tanh, none };

inline LayerKind layer_kind(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::relu: return LayerKind::relu;
    case Nonlinearity::leaky_relu: return LayerKind::leaky_relu;
    case Nonlinearity::tanh: return LayerKind::tanh;
    case Nonlinearity::none: break;
  }
  throw InvalidArgument("no layer for Nonlinearity::none");
}

/// Fully connected stack: sizes = {input, hidden..., output}.
///
/// Each hidden dense layer is followed by `hidden` and, when `batchnorm` is
/// set, a batchnorm layer. The last dense layer is followed by `output` only.
struct MlpSpec {
  std::vector<std::size_t> sizes;
  Nonlinearity hidden = Nonlinearity::relu;
  Nonlinearity output = Nonlinearity::none;
  bool batchnorm = false;
  double first_bias_std = 0.0;
  double bias_std = 0.0;
  std::uint64_t seed = 0;
};

/// Weight variance that makes wide random networks realize the analytic
/// kernels: 2 on the input-touching layer, 2/fan_in on hidden layers and
/// 1/fan_in on the output layer (sigma_v^2 ~ 1/H).
inline double gp_weight_variance(std::size_t layer, std::size_t dense_layers, std::size_t fan_in) {
  if (layer == 0) return 2.0;
  if (layer + 1 == dense_layers) return 1.0 / static_cast<double>(fan_in);
  return 2.0 / static_cast<double>(fan_in);
}

namespace detail {
inline void fill_normal(std::span<double> v, double stddev, Rng& rng) {
  if (stddev == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& x : v) x = dist(rng);
}
}  // namespace detail

inline Network init_network(const MlpSpec& spec) {
  if (spec.sizes.size() < 2) throw InvalidArgument("network spec needs input and output sizes");
  for (std::size_t s : spec.sizes) {
    if (s == 0) throw InvalidArgument("network spec contains a zero-sized layer");
  }
  if (spec.first_bias_std < 0.0 || spec.bias_std < 0.0) {
    throw InvalidArgument("bias standard deviation must be non-negative");
  }

  Rng rng = make_rng(spec.seed);
  Network net;
  const std::size_t dense_layers = spec.sizes.size() - 1;
  for (std::size_t i = 0; i < dense_layers; ++i) {
    auto& dense = net.emplace<Dense>(spec.sizes[i], spec.sizes[i + 1]);
    const double var = gp_weight_variance(i, dense_layers, spec.sizes[i]);
    detail::fill_normal(dense.weight().value, std::sqrt(var), rng);
    detail::fill_normal(dense.bias().value, i == 0 ? spec.first_bias_std : spec.bias_std, rng);

    const bool last = i + 1 == dense_layers;
    if (!last) {
      if (spec.hidden != Nonlinearity::none) net.emplace<Activation>(layer_kind(spec.hidden));
      if (spec.batchnorm) net.emplace<BatchNorm>(spec.sizes[i + 1]);
    } else if (spec.output != Nonlinearity::none) {
      net.emplace<Activation>(layer_kind(spec.output));
    }
  }
  return net;
}

/// Convolutional decoder: `blocks` ConvBlocks (bilinear x2 upsample, 3x3
/// conv, batchnorm, leaky ReLU), each halving the channel count; the last
/// block's convolution emits 3 channels and is followed by tanh instead.
inline Network init_conv_decoder(std::size_t in_channels, std::size_t blocks, std::uint64_t seed) {
  if (blocks == 0 || in_channels == 0) throw InvalidArgument("conv decoder needs blocks and channels");
  Rng rng = make_rng(seed);
  Network net;
  std::size_t c = in_channels;
  for (std::size_t b = 0; b < blocks; ++b) {
    const bool last = b + 1 == blocks;
    net.emplace<BilinearUpsample>();
    auto& conv = net.emplace<Conv2d>(c, last ? 3 : c / 2, last);
    const double var = (last ? 1.0 : 2.0) / static_cast<double>(conv.fan_in());
    detail::fill_normal(conv.weight().value, std::sqrt(var), rng);
    if (last) {
      net.emplace<Activation>(LayerKind::tanh);
    } else {
      net.emplace<BatchNorm>(c / 2);
      net.emplace<Activation>(LayerKind::leaky_relu);
      c /= 2;
    }
  }
  return net;
}

}  // namespace dmp::nn
