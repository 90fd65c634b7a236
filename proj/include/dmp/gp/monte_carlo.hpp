#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "dmp/common/rng.hpp"
#include "dmp/gp/kernels.hpp"
#include "dmp/gp/stats.hpp"
#include "dmp/nn/init.hpp"

namespace dmp::gp {

/// Random fully connected network family used for Monte-Carlo checks.
struct McArch {
  nn::Nonlinearity hidden = nn::Nonlinearity::relu;
  int hidden_layers = 1;  ///< a "2-layer" network has one hidden layer
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  double bias_std = 0.0;
};

/// Draw `index` of the network family: GP-matching weight variances, seeded
/// by derive_seed(seed, index) so draws are independent of evaluation order.
inline nn::Network mc_network(const McArch& arch, std::size_t width, std::uint64_t seed, std::uint64_t index) {
  nn::MlpSpec spec;
  spec.sizes.push_back(arch.input_dim);
  for (int l = 0; l < arch.hidden_layers; ++l) spec.sizes.push_back(width);
  spec.sizes.push_back(arch.output_dim);
  spec.hidden = arch.hidden;
  spec.output = nn::Nonlinearity::none;
  spec.first_bias_std = arch.bias_std;
  spec.bias_std = arch.bias_std;
  spec.seed = derive_seed(seed, index);
  return nn::init_network(spec);
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct McCovariance {
  std::vector<Vector> inputs;                     ///< distinct inputs, first-seen order
  std::vector<std::pair<std::size_t, std::size_t>> pair_index;
  std::vector<Estimate> covariance;               ///< one per requested pair
  std::vector<Estimate> mean;                     ///< one per distinct input
  std::vector<Estimate> cross_covariance;         ///< Cov(f_0(x), f_1(x)) per input; empty if d = 1
  std::size_t draws = 0;
  std::size_t batches = 0;
};

/// Empirical mean and covariance of random-network outputs over `draws`
/// initializations. Output coordinates are pooled (they are identically
/// distributed and uncorrelated). Standard errors come from the spread of
/// the estimates over `batches` contiguous groups of draws.
inline McCovariance mc_covariance(const McArch& arch, std::size_t width, std::size_t draws,
                                  const std::vector<std::pair<Vector, Vector>>& pairs, std::uint64_t seed,
                                  std::size_t batches = 100) {
  if (width < 64) throw InvalidArgument("Monte-Carlo width must be >= 64");
  if (draws < 1000) throw InvalidArgument("Monte-Carlo needs >= 1000 draws");
  if (arch.hidden_layers < 1) throw InvalidArgument("network needs at least one hidden layer");
  if (pairs.empty()) throw InvalidArgument("no input pairs given");
  batches = std::clamp<std::size_t>(batches, 2, draws / 2);

  McCovariance out;
  out.draws = draws;
  out.batches = batches;
  auto intern = [&](const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != arch.input_dim) throw ShapeError("input dimension mismatch");
    for (std::size_t i = 0; i < out.inputs.size(); ++i) {
      if (out.inputs[i] == v) return i;
    }
    out.inputs.push_back(v);
    return out.inputs.size() - 1;
  };
  for (const auto& [x, y] : pairs) out.pair_index.emplace_back(intern(x), intern(y));

  const std::size_t m = out.inputs.size(), d = arch.output_dim, p = out.pair_index.size();
  nn::Tensor batch_in({m, arch.input_dim});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < arch.input_dim; ++c) batch_in.at(i, c) = out.inputs[i][static_cast<Eigen::Index>(c)];

  // Per-batch sums: f_i, f_i f_j per pair, f_0 f_1 per input, f_0, f_1.
  struct Sums {
    double n = 0.0;
    std::vector<double> f, ff, c01, f0, f1;
  };
  auto fresh = [&] {
    Sums s;
    s.f.assign(m, 0.0);
    s.ff.assign(p, 0.0);
    s.c01.assign(m, 0.0);
    s.f0.assign(m, 0.0);
    s.f1.assign(m, 0.0);
    return s;
  };
  std::vector<Sums> per_batch(batches, fresh());

  for (std::size_t r = 0; r < draws; ++r) {
    const nn::Network net = mc_network(arch, width, seed, r);
    const nn::Tensor y = net.predict(batch_in);
    Sums& s = per_batch[r * batches / draws];
    s.n += static_cast<double>(d);
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t i = 0; i < m; ++i) s.f[i] += y.at(i, c);
      for (std::size_t k = 0; k < p; ++k) s.ff[k] += y.at(out.pair_index[k].first, c) * y.at(out.pair_index[k].second, c);
    }
    if (d >= 2) {
      for (std::size_t i = 0; i < m; ++i) {
        s.c01[i] += y.at(i, 0) * y.at(i, 1);
        s.f0[i] += y.at(i, 0);
        s.f1[i] += y.at(i, 1);
      }
    }
  }

  Sums total = fresh();
  for (const auto& s : per_batch) {
    total.n += s.n;
    for (std::size_t i = 0; i < m; ++i) {
      total.f[i] += s.f[i];
      total.c01[i] += s.c01[i];
      total.f0[i] += s.f0[i];
      total.f1[i] += s.f1[i];
    }
    for (std::size_t k = 0; k < p; ++k) total.ff[k] += s.ff[k];
  }

  auto covariance_of = [&](const Sums& s, std::size_t k) {
    const auto [i, j] = out.pair_index[k];
    return s.ff[k] / s.n - (s.f[i] / s.n) * (s.f[j] / s.n);
  };
  auto cross_of = [&](const Sums& s, std::size_t i) {
    const double n = s.n / static_cast<double>(d);
    return s.c01[i] / n - (s.f0[i] / n) * (s.f1[i] / n);
  };
  auto with_se = [&](double full, auto&& per) {
    std::vector<double> est(batches);
    for (std::size_t b = 0; b < batches; ++b) est[b] = per(per_batch[b]);
    return Estimate{full, mean_se(est).se};
  };

  for (std::size_t k = 0; k < p; ++k) {
    out.covariance.push_back(with_se(covariance_of(total, k), [&](const Sums& s) { return covariance_of(s, k); }));
  }
  for (std::size_t i = 0; i < m; ++i) {
    out.mean.push_back(with_se(total.f[i] / total.n, [&](const Sums& s) { return s.f[i] / s.n; }));
  }
  if (d >= 2) {
    for (std::size_t i = 0; i < m; ++i) {
      out.cross_covariance.push_back(with_se(cross_of(total, i), [&](const Sums& s) { return cross_of(s, i); }));
    }
  }
  return out;
}

}  // namespace dmp::gp
