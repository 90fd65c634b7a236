#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "dmp/common/rng.hpp"
#include "dmp/nn/network.hpp"

namespace dmp::nn {

struct GradCheckResult {
  double max_input_error = 0.0;
  double max_param_error = 0.0;
  std::size_t checked = 0;
};

/// |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Compares backprop gradients of L = <r, net(x)> (r random) against
/// central finite differences for the input and every parameter.
inline GradCheckResult check_gradients(Network& net, const Tensor& input, std::uint64_t seed,
                                       double h = 1e-5) {
  Tensor probe = net.predict(input);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  Tensor weights(probe.shape());
  for (double& w : weights.data()) w = normal(rng);

  auto loss = [&](const Tensor& x) {
    Tensor y = net.predict(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += weights[i] * y[i];
    return s;
  };

  net.forward(input);
  Tensor input_grad = net.backward(weights);

  GradCheckResult result;
  Tensor x = input;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = loss(x);
    x[i] = saved - h;
    const double down = loss(x);
    x[i] = saved;
    result.max_input_error =
        std::max(result.max_input_error, relative_error(input_grad[i], (up - down) / (2 * h)));
    ++result.checked;
  }
  for (Parameter* p : net.parameters()) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss(input);
      p->value[i] = saved - h;
      const double down = loss(input);
      p->value[i] = saved;
      result.max_param_error =
          std::max(result.max_param_error, relative_error(p->grad[i], (up - down) / (2 * h)));
      ++result.checked;
    }
  }
  return result;
}

}  // namespace dmp::nn
