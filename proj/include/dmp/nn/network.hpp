#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dmp/nn/layers.hpp"

namespace dmp::nn {

/// Sequential stack of layers with value semantics (copies deep-clone).
class Network {
 public:
  Network() = default;
  Network(const Network& other) { *this = other; }
  Network& operator=(const Network& other) {
    if (this == &other) return *this;
    layers_.clear();
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
    pending_backward_ = false;
    return *this;
  }
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  template <class L, class... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// Training forward pass; caches activations for backward().
  Tensor forward(const Tensor& input) {
    check_finite(input, "network input");
    Tensor x = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      check(i, x);
      x = layers_[i]->forward(x);
      check_finite(x, i);
    }
    pending_backward_ = true;
    return x;
  }

  /// Inference pass without caching; safe for concurrent use on a frozen net.
  Tensor predict(const Tensor& input) const {
    check_finite(input, "network input");
    Tensor x = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      check(i, x);
      x = layers_[i]->predict(x);
      check_finite(x, i);
    }
    return x;
  }

  /// Fills every parameter gradient and returns d(loss)/d(input).
  Tensor backward(const Tensor& output_grad) {
    if (!pending_backward_) throw StateError("backward() called without a preceding forward()");
    pending_backward_ = false;
    Tensor g = output_grad;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      for (Parameter* p : layers_[i]->parameters()) p->zero_grad();
      g = layers_[i]->backward(g);
    }
    return g;
  }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    for (auto& l : layers_)
      for (Parameter* p : l->parameters()) out.push_back(p);
    return out;
  }
  std::vector<const Parameter*> parameters() const {
    std::vector<const Parameter*> out;
    for (const auto& l : layers_)
      for (const Parameter* p : std::as_const(*l).parameters()) out.push_back(p);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Parameter* p : parameters()) n += p->size();
    return n;
  }

  /// Replaces batch statistics in every batchnorm layer by those seen on `data`.
  void freeze_batchnorm(const Tensor& data) {
    Tensor x = data;
    for (auto& l : layers_) {
      if (auto* bn = dynamic_cast<BatchNorm*>(l.get())) bn->freeze(x);
      x = l->predict(x);
    }
  }

 private:
  void check(std::size_t i, const Tensor& x) const {
    try {
      layers_[i]->check_input(x);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + to_string(layers_[i]->kind()) +
                       "): " + e.what());
    }
  }
  static void check_finite(const Tensor& x, const char* where) {
    if (!x.all_finite()) throw NonFiniteError(std::string("non-finite values in ") + where);
  }
  void check_finite(const Tensor& x, std::size_t i) const {
    if (!x.all_finite()) {
      throw NonFiniteError("layer " + std::to_string(i) + " (" + to_string(layers_[i]->kind()) +
                           ") produced non-finite values");
    }
  }

  std::vector<std::unique_ptr<Layer>> layers_;
  bool pending_backward_ = false;
};

}  // namespace dmp::nn
