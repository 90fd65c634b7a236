#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dmp/common/error.hpp"
#include "dmp/nn/tensor.hpp"

namespace dmp::nn {

enum class LayerKind { dense, relu, leaky_relu, tanh, batchnorm, conv2d, bilinear_upsample };

inline const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::leaky_relu: return "leaky_relu";
    case LayerKind::tanh: return "tanh";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::bilinear_upsample: return "bilinear_upsample";
  }
  return "unknown";
}

/// Trainable tensor together with its gradient buffer.
struct Parameter {
  std::vector<std::size_t> shape;
  Buffer value;
  Buffer grad;

  explicit Parameter(std::vector<std::size_t> s = {}) : shape(std::move(s)) {
    std::size_t n = shape.empty() ? 0 : 1;
    for (auto d : shape) n *= d;
    value.assign(n, 0.0);
    grad.assign(n, 0.0);
  }
  std::size_t size() const noexcept { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  /// Throws ShapeError if `x` cannot be consumed by this layer.
  virtual void check_input(const Tensor& x) const = 0;

  /// Forward pass that caches whatever backward() needs.
  virtual Tensor forward(const Tensor& x) = 0;

  /// Forward pass without side effects; safe to call concurrently.
  virtual Tensor predict(const Tensor& x) const = 0;

  /// Overwrites parameter gradients and returns the gradient w.r.t. the input.
  virtual Tensor backward(const Tensor& grad_out) = 0;

  virtual std::vector<Parameter*> parameters() { return {}; }
  virtual std::vector<const Parameter*> parameters() const { return {}; }

 protected:
  static void require_rank(const Tensor& x, std::size_t rank, const char* what) {
    if (x.rank() != rank) {
      throw ShapeError(std::string(what) + " expects rank " + std::to_string(rank) +
                       " input, got " + x.shape_string());
    }
  }
};

// ---------------------------------------------------------------------------

/// y = x W^T + b with W of shape (fan_out, fan_in).
class Dense final : public Layer {
 public:
  Dense(std::size_t fan_in, std::size_t fan_out)
      : weight_({fan_out, fan_in}), bias_({fan_out}) {
    if (fan_in == 0 || fan_out == 0) throw InvalidArgument("dense layer with zero size");
  }

  LayerKind kind() const override { return LayerKind::dense; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  std::size_t fan_in() const noexcept { return weight_.shape[1]; }
  std::size_t fan_out() const noexcept { return weight_.shape[0]; }

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  const Parameter& weight() const noexcept { return weight_; }
  const Parameter& bias() const noexcept { return bias_; }

  void check_input(const Tensor& x) const override {
    require_rank(x, 2, "dense");
    if (x.cols() != fan_in()) {
      throw ShapeError("dense expects " + std::to_string(fan_in()) + " features, got " +
                       x.shape_string());
    }
  }

  Tensor forward(const Tensor& x) override {
    input_ = x;
    return predict(x);
  }

  Tensor predict(const Tensor& x) const override {
    Tensor y({x.rows(), fan_out()});
    auto Y = y.matrix();
    Y.noalias() = x.matrix() * W().transpose();
    Y.rowwise() += b().transpose();
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    if (!input_) throw StateError("dense backward without forward");
    const auto G = grad_out.matrix();
    MatrixMap(weight_.grad.data(), fan_out(), fan_in()).noalias() =
        G.transpose() * input_->matrix();
    Eigen::Map<Eigen::VectorXd>(bias_.grad.data(), fan_out()) = G.colwise().sum().transpose();
    Tensor dx({grad_out.rows(), fan_in()});
    dx.matrix().noalias() = G * W();
    input_.reset();
    return dx;
  }

  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  std::vector<const Parameter*> parameters() const override { return {&weight_, &bias_}; }

 private:
  ConstMatrixMap W() const {
    return ConstMatrixMap(weight_.value.data(), static_cast<Eigen::Index>(fan_out()),
                          static_cast<Eigen::Index>(fan_in()));
  }
  Eigen::Map<const Eigen::VectorXd> b() const {
    return Eigen::Map<const Eigen::VectorXd>(bias_.value.data(),
                                             static_cast<Eigen::Index>(fan_out()));
  }

  Parameter weight_;
  Parameter bias_;
  std::optional<Tensor> input_;
};

// ---------------------------------------------------------------------------

/// Elementwise activation; shape preserving, no parameters.
class Activation final : public Layer {
 public:
  static constexpr double kLeakySlope = 0.2;

  explicit Activation(LayerKind kind) : kind_(kind) {
    if (kind != LayerKind::relu && kind != LayerKind::leaky_relu && kind != LayerKind::tanh) {
      throw InvalidArgument("not an activation kind");
    }
  }

  LayerKind kind() const override { return kind_; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Activation>(*this); }
  void check_input(const Tensor& x) const override {
    if (x.empty()) throw ShapeError("activation on empty tensor");
  }

  Tensor forward(const Tensor& x) override {
    Tensor y = predict(x);
    cache_ = kind_ == LayerKind::tanh ? y : x;
    return y;
  }

  Tensor predict(const Tensor& x) const override {
    Tensor y = x;
    auto d = y.data();
    switch (kind_) {
      case LayerKind::relu:
        for (double& v : d) v = v > 0.0 ? v : 0.0;
        break;
      case LayerKind::leaky_relu:
        for (double& v : d) v = v > 0.0 ? v : kLeakySlope * v;
        break;
      default:
        for (double& v : d) v = std::tanh(v);
        break;
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    if (!cache_) throw StateError("activation backward without forward");
    Tensor dx = grad_out;
    auto g = dx.data();
    auto c = cache_->data();
    switch (kind_) {
      case LayerKind::relu:
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = c[i] > 0.0 ? g[i] : 0.0;
        break;
      case LayerKind::leaky_relu:
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = c[i] > 0.0 ? g[i] : kLeakySlope * g[i];
        break;
      default:
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - c[i] * c[i];
        break;
    }
    cache_.reset();
    return dx;
  }

 private:
  LayerKind kind_;
  std::optional<Tensor> cache_;
};

// ---------------------------------------------------------------------------

/// Batch normalization over every axis except the last (features / channels).
///
/// Normalizes with the statistics of the current batch. After freeze() the
/// layer instead applies the stored statistics, which is what inference on
/// batches drawn from a different distribution (e.g. a dense 3D grid) needs.
class BatchNorm final : public Layer {
 public:
  static constexpr double kDefaultEpsilon = 1e-8;

  explicit BatchNorm(std::size_t features, double epsilon = kDefaultEpsilon)
      : gamma_({features}), beta_({features}), epsilon_(epsilon) {
    if (features == 0) throw InvalidArgument("batchnorm with zero features");
    std::fill(gamma_.value.begin(), gamma_.value.end(), 1.0);
  }

  LayerKind kind() const override { return LayerKind::batchnorm; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

  std::size_t features() const noexcept { return gamma_.size(); }
  double epsilon() const noexcept { return epsilon_; }
  bool frozen() const noexcept { return frozen_mean_.has_value(); }

  Parameter& gamma() noexcept { return gamma_; }
  Parameter& beta() noexcept { return beta_; }

  void check_input(const Tensor& x) const override {
    if (x.rank() < 2 || x.shape().back() != features()) {
      throw ShapeError("batchnorm expects trailing dimension " + std::to_string(features()) +
                       ", got " + x.shape_string());
    }
  }

  /// Uses the statistics of `x` for all subsequent passes.
  void freeze(const Tensor& x) {
    Stats s = statistics(x);
    frozen_mean_ = std::move(s.mean);
    frozen_inv_std_ = std::move(s.inv_std);
  }
  void unfreeze() {
    frozen_mean_.reset();
    frozen_inv_std_.reset();
  }

  Tensor forward(const Tensor& x) override {
    Stats s = frozen() ? Stats{*frozen_mean_, *frozen_inv_std_} : statistics(x);
    Cache c;
    c.xhat = normalized(x, s);
    c.inv_std = s.inv_std;
    Tensor y = affine(c.xhat);
    cache_ = std::move(c);
    return y;
  }

  Tensor predict(const Tensor& x) const override {
    if (frozen()) return apply(x, Stats{*frozen_mean_, *frozen_inv_std_});
    return apply(x, statistics(x));
  }

  Tensor backward(const Tensor& grad_out) override {
    if (!cache_) throw StateError("batchnorm backward without forward");
    const std::size_t f = features();
    const std::size_t m = grad_out.size() / f;
    const double* g = grad_out.raw();
    const double* xh = cache_->xhat.raw();

    std::vector<double> sum_g(f, 0.0), sum_gx(f, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < f; ++j) {
        sum_g[j] += g[r * f + j];
        sum_gx[j] += g[r * f + j] * xh[r * f + j];
      }
    }
    for (std::size_t j = 0; j < f; ++j) {
      beta_.grad[j] = sum_g[j];
      gamma_.grad[j] = sum_gx[j];
    }

    Tensor dx(grad_out.shape());
    double* d = dx.raw();
    const double inv_m = 1.0 / static_cast<double>(m);
    std::vector<double> scale(f), mean_g(f), mean_gx(f);
    for (std::size_t j = 0; j < f; ++j) {
      scale[j] = gamma_.value[j] * cache_->inv_std[j];
      mean_g[j] = frozen() ? 0.0 : inv_m * sum_g[j];
      mean_gx[j] = frozen() ? 0.0 : inv_m * sum_gx[j];
    }
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < f; ++j) {
        const std::size_t i = r * f + j;
        d[i] = scale[j] * (g[i] - mean_g[j] - xh[i] * mean_gx[j]);
      }
    }
    cache_.reset();
    return dx;
  }

  std::vector<Parameter*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<const Parameter*> parameters() const override { return {&gamma_, &beta_}; }

 private:
  struct Stats {
    std::vector<double> mean;
    std::vector<double> inv_std;
  };
  struct Cache {
    Tensor xhat;
    std::vector<double> inv_std;
  };

  Stats statistics(const Tensor& x) const {
    const std::size_t f = features();
    const std::size_t m = x.size() / f;
    Stats s{std::vector<double>(f, 0.0), std::vector<double>(f, 0.0)};
    const double* p = x.raw();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t j = 0; j < f; ++j) s.mean[j] += p[r * f + j];
    for (double& v : s.mean) v /= static_cast<double>(m);
    std::vector<double> var(f, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < f; ++j) {
        const double c = p[r * f + j] - s.mean[j];
        var[j] += c * c;
      }
    }
    for (std::size_t j = 0; j < f; ++j) {
      s.inv_std[j] = 1.0 / std::sqrt(var[j] / static_cast<double>(m) + epsilon_);
    }
    return s;
  }

  Tensor normalized(const Tensor& x, const Stats& s) const {
    const std::size_t f = features();
    const std::size_t m = x.size() / f;
    Tensor out(x.shape());
    const double* p = x.raw();
    double* o = out.raw();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t j = 0; j < f; ++j) o[r * f + j] = (p[r * f + j] - s.mean[j]) * s.inv_std[j];
    return out;
  }

  Tensor affine(Tensor xhat) const {
    const std::size_t f = features();
    const std::size_t m = xhat.size() / f;
    double* o = xhat.raw();
    const double* g = gamma_.value.data();
    const double* b = beta_.value.data();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t j = 0; j < f; ++j) o[r * f + j] = g[j] * o[r * f + j] + b[j];
    return xhat;
  }

  Tensor apply(const Tensor& x, const Stats& s) const { return affine(normalized(x, s)); }

  Parameter gamma_;
  Parameter beta_;
  double epsilon_;
  std::optional<std::vector<double>> frozen_mean_;
  std::optional<std::vector<double>> frozen_inv_std_;
  std::optional<Cache> cache_;
};

// ---------------------------------------------------------------------------

/// 3x3 convolution, stride 1, zero "same" padding, on NHWC tensors.
///
/// Every convolution halves the channel count except the one marked final,
/// which emits exactly three channels (point coordinates).
class Conv2d final : public Layer {
 public:
  static constexpr std::size_t kKernel = 3;

  Conv2d(std::size_t in_channels, std::size_t out_channels, bool final_layer = false)
      : weight_({out_channels, kKernel * kKernel * in_channels}),
        bias_({out_channels}),
        in_channels_(in_channels),
        final_(final_layer) {
    if (in_channels == 0 || out_channels == 0) throw InvalidArgument("conv2d with zero channels");
    if (final_layer) {
      if (out_channels != 3) throw InvalidArgument("final conv2d must have 3 output channels");
    } else if (in_channels % 2 != 0 || out_channels != in_channels / 2) {
      throw InvalidArgument("conv2d filter count must be half the input channels (" +
                            std::to_string(in_channels) + " -> " +
                            std::to_string(out_channels) + ")");
    }
  }

  LayerKind kind() const override { return LayerKind::conv2d; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  std::size_t in_channels() const noexcept { return in_channels_; }
  std::size_t out_channels() const noexcept { return weight_.shape[0]; }
  bool is_final() const noexcept { return final_; }
  std::size_t fan_in() const noexcept { return weight_.shape[1]; }

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }

  void check_input(const Tensor& x) const override {
    require_rank(x, 4, "conv2d");
    if (x.dim(3) != in_channels_) {
      throw ShapeError("conv2d expects " + std::to_string(in_channels_) + " channels, got " +
                       x.shape_string());
    }
  }

  Tensor forward(const Tensor& x) override {
    cols_ = im2col(x);
    in_shape_ = x.shape();
    return from_cols(*cols_, x);
  }

  Tensor predict(const Tensor& x) const override { return from_cols(im2col(x), x); }

  Tensor backward(const Tensor& grad_out) override {
    if (!cols_) throw StateError("conv2d backward without forward");
    const ConstMatrixMap G(grad_out.raw(),
                           static_cast<Eigen::Index>(grad_out.size() / out_channels()),
                           static_cast<Eigen::Index>(out_channels()));
    MatrixMap(weight_.grad.data(), static_cast<Eigen::Index>(out_channels()),
              static_cast<Eigen::Index>(fan_in()))
        .noalias() = G.transpose() * *cols_;
    Eigen::Map<Eigen::VectorXd>(bias_.grad.data(), static_cast<Eigen::Index>(out_channels())) =
        G.colwise().sum().transpose();
    RowMatrix dcols = G * W();
    Tensor dx(in_shape_);
    col2im(dcols, dx);
    cols_.reset();
    return dx;
  }

  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  std::vector<const Parameter*> parameters() const override { return {&weight_, &bias_}; }

 private:
  ConstMatrixMap W() const {
    return ConstMatrixMap(weight_.value.data(), static_cast<Eigen::Index>(out_channels()),
                          static_cast<Eigen::Index>(fan_in()));
  }

  RowMatrix im2col(const Tensor& x) const {
    const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    RowMatrix cols = RowMatrix::Zero(static_cast<Eigen::Index>(n * h * w),
                                     static_cast<Eigen::Index>(kKernel * kKernel * c));
    const double* src = x.raw();
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          double* row = cols.data() + ((b * h + y) * w + xx) * kKernel * kKernel * c;
          for (std::size_t ky = 0; ky < kKernel; ++ky) {
            const long sy = static_cast<long>(y) + static_cast<long>(ky) - 1;
            if (sy < 0 || sy >= static_cast<long>(h)) continue;
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
              const long sx = static_cast<long>(xx) + static_cast<long>(kx) - 1;
              if (sx < 0 || sx >= static_cast<long>(w)) continue;
              const double* pix = src + ((b * h + static_cast<std::size_t>(sy)) * w +
                                         static_cast<std::size_t>(sx)) * c;
              std::memcpy(row + (ky * kKernel + kx) * c, pix, c * sizeof(double));
            }
          }
        }
      }
    }
    return cols;
  }

  void col2im(const RowMatrix& dcols, Tensor& dx) const {
    const std::size_t n = dx.dim(0), h = dx.dim(1), w = dx.dim(2), c = dx.dim(3);
    double* dst = dx.raw();
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          const double* row = dcols.data() + ((b * h + y) * w + xx) * kKernel * kKernel * c;
          for (std::size_t ky = 0; ky < kKernel; ++ky) {
            const long sy = static_cast<long>(y) + static_cast<long>(ky) - 1;
            if (sy < 0 || sy >= static_cast<long>(h)) continue;
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
              const long sx = static_cast<long>(xx) + static_cast<long>(kx) - 1;
              if (sx < 0 || sx >= static_cast<long>(w)) continue;
              double* pix = dst + ((b * h + static_cast<std::size_t>(sy)) * w +
                                   static_cast<std::size_t>(sx)) * c;
              const double* part = row + (ky * kKernel + kx) * c;
              for (std::size_t ch = 0; ch < c; ++ch) pix[ch] += part[ch];
            }
          }
        }
      }
    }
  }

  Tensor from_cols(const RowMatrix& cols, const Tensor& x) const {
    Tensor y({x.dim(0), x.dim(1), x.dim(2), out_channels()});
    Eigen::Map<RowMatrix> Y(y.raw(), cols.rows(), static_cast<Eigen::Index>(out_channels()));
    Y.noalias() = cols * W().transpose();
    Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(
        bias_.value.data(), static_cast<Eigen::Index>(out_channels()));
    return y;
  }

  Parameter weight_;
  Parameter bias_;
  std::size_t in_channels_;
  bool final_;
  std::optional<RowMatrix> cols_;
  std::vector<std::size_t> in_shape_;
};

// ---------------------------------------------------------------------------

/// x2 bilinear upsampling on NHWC tensors with half-pixel centers and edge
/// clamping (the align_corners=false convention). Exact on constant input.
class BilinearUpsample final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::bilinear_upsample; }
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<BilinearUpsample>(*this);
  }

  void check_input(const Tensor& x) const override { require_rank(x, 4, "bilinear_upsample"); }

  Tensor forward(const Tensor& x) override {
    in_shape_ = x.shape();
    return predict(x);
  }

  Tensor predict(const Tensor& x) const override {
    const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    const auto ty = taps(h), tx = taps(w);
    Tensor y({n, 2 * h, 2 * w, c});
    const double* src = x.raw();
    double* dst = y.raw();
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t oy = 0; oy < 2 * h; ++oy) {
        for (std::size_t ox = 0; ox < 2 * w; ++ox) {
          double* out = dst + ((b * 2 * h + oy) * 2 * w + ox) * c;
          for (int a = 0; a < 2; ++a) {
            for (int e = 0; e < 2; ++e) {
              const double wgt = ty[oy].weight[a] * tx[ox].weight[e];
              if (wgt == 0.0) continue;
              const double* in = src + ((b * h + ty[oy].index[a]) * w + tx[ox].index[e]) * c;
              for (std::size_t ch = 0; ch < c; ++ch) out[ch] += wgt * in[ch];
            }
          }
        }
      }
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    if (in_shape_.empty()) throw StateError("bilinear_upsample backward without forward");
    const std::size_t n = in_shape_[0], h = in_shape_[1], w = in_shape_[2], c = in_shape_[3];
    const auto ty = taps(h), tx = taps(w);
    Tensor dx(in_shape_);
    const double* g = grad_out.raw();
    double* d = dx.raw();
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t oy = 0; oy < 2 * h; ++oy) {
        for (std::size_t ox = 0; ox < 2 * w; ++ox) {
          const double* go = g + ((b * 2 * h + oy) * 2 * w + ox) * c;
          for (int a = 0; a < 2; ++a) {
            for (int e = 0; e < 2; ++e) {
              const double wgt = ty[oy].weight[a] * tx[ox].weight[e];
              if (wgt == 0.0) continue;
              double* in = d + ((b * h + ty[oy].index[a]) * w + tx[ox].index[e]) * c;
              for (std::size_t ch = 0; ch < c; ++ch) in[ch] += wgt * go[ch];
            }
          }
        }
      }
    }
    in_shape_.clear();
    return dx;
  }

 private:
  struct Tap {
    std::size_t index[2];
    double weight[2];
  };

  static std::vector<Tap> taps(std::size_t n) {
    std::vector<Tap> t(2 * n);
    for (std::size_t o = 0; o < 2 * n; ++o) {
      double src = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
      if (src < 0.0) src = 0.0;
      const auto i0 = static_cast<std::size_t>(src);
      const std::size_t i1 = std::min(i0 + 1, n - 1);
      const double frac = src - static_cast<double>(i0);
      t[o] = Tap{{i0, i1}, {1.0 - frac, frac}};
    }
    return t;
  }

  std::vector<std::size_t> in_shape_;
};

}  // namespace dmp::nn
