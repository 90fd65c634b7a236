#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dmp/geometry/sampling.hpp"
#include "dmp/geometry/types.hpp"
#include "dmp/gp/curves.hpp"
#include "dmp/gp/kernels.hpp"
#include "dmp/gp/monte_carlo.hpp"
#include "dmp/gp/stats.hpp"

namespace dmp::gp {

/// Random-function family behind the prior samples: tanh hidden layers with
/// GP-matching weights (the chaotic regime, so roughness grows with depth).
struct PriorSampleSpec {
  int depth = 1;  ///< hidden layers
  std::size_t width = 256;
  double bias_std = 0.1;
  std::size_t points = 512;  ///< samples per curve, or per surface side
  double t_range = 1.0;      ///< inputs span [-t_range, t_range]^n
  bool arclength = false;

  void validate() const {
    if (depth < 1) throw InvalidArgument("prior sample depth must be >= 1");
    if (width < 1) throw InvalidArgument("prior sample width must be >= 1");
    if (points < 3) throw InvalidArgument("prior samples need at least three points per axis");
    if (!(t_range > 0.0)) throw InvalidArgument("prior sample range must be positive");
  }
};

namespace detail {
inline McArch prior_arch(const PriorSampleSpec& s, std::size_t in, std::size_t out) {
  McArch a;
  a.hidden = nn::Nonlinearity::tanh;
  a.hidden_layers = s.depth;
  a.input_dim = in;
  a.output_dim = out;
  a.bias_std = s.bias_std;
  return a;
}

inline std::vector<double> symmetric_grid(std::size_t m, double r) {
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) t[i] = -r + 2.0 * r * static_cast<double>(i) / static_cast<double>(m - 1);
  return t;
}

/// Arc-length curve of total length 2 * t_range driven by the angle f.
inline std::vector<geometry::Vec3> angle_curve(std::span<const double> f, double t_range) {
  const auto p2 = arclength_curve(f, 2.0 * t_range);
  std::vector<geometry::Vec3> out;
  out.reserve(p2.size());
  for (const auto& p : p2) out.emplace_back(p.x(), p.y(), 0.0);
  return out;
}
}  // namespace detail

/// Planar curve from one random network. Coordinate construction: t -> (x, y).
/// Arc-length construction: t -> angle f(t), integrated as (cos f, sin f).
inline std::vector<geometry::Vec3> random_network_curve(const PriorSampleSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto t = detail::symmetric_grid(spec.points, spec.t_range);
  nn::Tensor x({t.size(), 1});
  for (std::size_t i = 0; i < t.size(); ++i) x.at(i, 0) = t[i];
  const std::size_t out = spec.arclength ? 1 : 2;
  const nn::Tensor y = mc_network(detail::prior_arch(spec, 1, out), spec.width, seed, 0).predict(x);
  if (spec.arclength) {
    std::vector<double> f(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) f[i] = y.at(i, 0);
    return detail::angle_curve(f, spec.t_range);
  }
  std::vector<geometry::Vec3> pts;
  pts.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) pts.emplace_back(y.at(i, 0), y.at(i, 1), 0.0);
  return pts;
}

/// Surface (u, v) -> R^3 from one random network on a points x points grid.
inline geometry::TriangleMesh random_network_surface(const PriorSampleSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto t = detail::symmetric_grid(spec.points, spec.t_range);
  const std::size_t m = t.size();
  nn::Tensor x({m * m, 2});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      x.at(i * m + j, 0) = t[i];
      x.at(i * m + j, 1) = t[j];
    }
  }
  const nn::Tensor y = mc_network(detail::prior_arch(spec, 2, 3), spec.width, seed, 0).predict(x);
  std::vector<geometry::Vec3> pts(m * m);
  for (std::size_t r = 0; r < m * m; ++r) pts[r] = {y.at(r, 0), y.at(r, 1), y.at(r, 2)};
  return geometry::grid_to_mesh(pts, m);
}

/// Kernel of the limiting GP used for Cholesky prior samples: the erf
/// composition on the augmented input (t, 1), whose constant entry acts as
/// the bias.
inline Matrix prior_kernel_matrix(std::span<const double> t, int depth) {
  std::vector<Vector> xs;
  xs.reserve(t.size());
  for (double v : t) {
    Vector x(2);
    x << v, 1.0;
    xs.push_back(x);
  }
  KernelSpec k;
  k.nonlinearity = KernelNonlinearity::erf;
  k.depth = depth;
  return kernel_matrix(xs, k);
}

/// Curve from a joint GP draw; same two constructions as the network curves.
inline std::vector<geometry::Vec3> gp_curve(const PriorSampleSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto t = detail::symmetric_grid(spec.points, spec.t_range);
  const Matrix k = prior_kernel_matrix(t, spec.depth);
  const GpSample s = gp_sample(k, spec.arclength ? 1 : 2, seed);
  if (spec.arclength) {
    std::vector<double> f(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) f[i] = s.values(static_cast<Eigen::Index>(i), 0);
    return detail::angle_curve(f, spec.t_range);
  }
  std::vector<geometry::Vec3> pts;
  pts.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    pts.emplace_back(s.values(r, 0), s.values(r, 1), 0.0);
  }
  return pts;
}

/// Squared curvature of arc-length curves driven by wide one-hidden-layer
/// tanh networks, tested against its limiting law sigma^2 chi^2_1 with
/// sigma^2 = Var f'(t).
struct CurvatureChi2Report {
  double t = 0.5;
  double scale = 0.0;  ///< sigma^2
  std::size_t width = 0;
  std::vector<double> kappa2;
  KsResult ks;
};

inline CurvatureChi2Report curvature_chi2_check(std::size_t width, std::size_t draws, double t, std::uint64_t seed,
                                                double h = 1e-4) {
  if (draws < 2) throw InvalidArgument("curvature check needs at least two draws");
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  McArch arch;
  arch.hidden = nn::Nonlinearity::tanh;
  CurvatureChi2Report r;
  r.t = t;
  r.width = width;
  r.scale = tanh_derivative_variance(t);
  const std::vector<double> grid = {t - h, t, t + h};
  nn::Tensor x({3, 1});
  for (std::size_t i = 0; i < 3; ++i) x.at(i, 0) = grid[i];
  r.kappa2.reserve(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    const nn::Tensor y = mc_network(arch, width, seed, d).predict(x);
    const std::vector<double> f = {y.at(0, 0), y.at(1, 0), y.at(2, 0)};
    r.kappa2.push_back(curvature_arclength(f, grid).kappa2_fd[0]);
  }
  r.ks = ks_test(r.kappa2, scaled_chi2_cdf(r.scale));
  return r;
}

}  // namespace dmp::gp
