#pragma once

#include <Eigen/Cholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dmp/common/fileio.hpp"
#include "dmp/common/rng.hpp"
#include "dmp/gp/kernels.hpp"
#include "dmp/gp/stats.hpp"

namespace dmp::gp {

using Point2 = Eigen::Vector2d;

inline constexpr double kJitterStart = 1e-12;
inline constexpr double kJitterMax = 1e-8;

/// Lower Cholesky factor of `k`, adding diagonal jitter from 1e-12 doubling
/// up to 1e-8 when the plain factorization fails. The all-zero matrix maps
/// to the zero factor.
inline Matrix psd_cholesky(const Matrix& k) {
  if (k.rows() != k.cols()) throw ShapeError("kernel matrix must be square");
  if (!k.allFinite()) throw NonFiniteError("kernel matrix has non-finite entries");
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff())) {
    throw NotPsdError("kernel matrix is not symmetric");
  }
  if (k.isZero(0.0)) return Matrix::Zero(k.rows(), k.cols());
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  for (double jitter = kJitterStart; jitter <= kJitterMax * (1 + 1e-12); jitter *= 2) {
    llt.compute(k + jitter * Matrix::Identity(k.rows(), k.cols()));
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw NotPsdError("kernel matrix is not positive semi-definite (Cholesky failed with jitter 1e-8)");
}

/// Joint GP draws on the inputs behind `k`: column c of `values` is
/// L z_c with z_c standard normal, independently per output coordinate.
struct GpSample {
  Matrix values;  ///< n x d
};

inline GpSample gp_sample(const Matrix& k, std::size_t d, std::uint64_t seed) {
  const Matrix l = psd_cholesky(k);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix z(k.rows(), static_cast<Eigen::Index>(d));
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, c) = g(rng);
  return {l * z};
}

/// Uniform grid of `m` points on [0, T].
inline std::vector<double> uniform_grid(double t_max, std::size_t m) {
  if (m < 2) throw InvalidArgument("grid needs at least two points");
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) t[i] = t_max * static_cast<double>(i) / static_cast<double>(m - 1);
  return t;
}

/// Unit-speed curve with heading f: cumulative trapezoidal integral of
/// (cos f, sin f) from the origin over a uniform grid on [0, T].
inline std::vector<Point2> arclength_curve(std::span<const double> f, double t_max) {
  if (f.size() < 2) throw InvalidArgument("arc-length curve needs at least two samples");
  if (!(t_max > 0.0)) throw InvalidArgument("curve length must be positive");
  const double h = t_max / static_cast<double>(f.size() - 1);
  std::vector<Point2> p(f.size(), Point2::Zero());
  for (std::size_t i = 1; i < f.size(); ++i) {
    p[i] = p[i - 1] + 0.5 * h * Point2(std::cos(f[i - 1]) + std::cos(f[i]), std::sin(f[i - 1]) + std::sin(f[i]));
  }
  return p;
}

enum class Parameterization { arc_length, graph };

/// Derivatives and curvature on the interior points of a uniform grid.
struct CurvatureSample {
  Parameterization parameterization = Parameterization::arc_length;
  std::vector<double> t;
  /// arc_length: xdot = cos f, ydot = sin f. graph: first = f', second = f''.
  std::vector<double> first, second;
  std::vector<double> kappa;
  /// arc_length only: kappa^2 from differences of (cos f, sin f) and (f')^2.
  std::vector<double> kappa2_fd, kappa2_fdot;
};

namespace detail {
inline double grid_spacing(std::span<const double> t) {
  if (t.size() < 3) throw InvalidArgument("curvature needs at least three grid points");
  const double h = t[1] - t[0];
  if (!(h > 0.0)) throw InvalidArgument("grid must be increasing");
  for (std::size_t i = 2; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
      throw InvalidArgument("grid must be uniform");
    }
  }
  return h;
}
}  // namespace detail

inline CurvatureSample curvature_arclength(std::span<const double> f, std::span<const double> t) {
  if (f.size() != t.size()) throw ShapeError("curvature: values and grid differ in length");
  const double h = detail::grid_spacing(t);
  CurvatureSample s;
  s.parameterization = Parameterization::arc_length;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const double xdd = (std::cos(f[i + 1]) - std::cos(f[i - 1])) / (2 * h);
    const double ydd = (std::sin(f[i + 1]) - std::sin(f[i - 1])) / (2 * h);
    const double fdot = (f[i + 1] - f[i - 1]) / (2 * h);
    s.t.push_back(t[i]);
    s.first.push_back(std::cos(f[i]));
    s.second.push_back(std::sin(f[i]));
    s.kappa2_fd.push_back(xdd * xdd + ydd * ydd);
    s.kappa2_fdot.push_back(fdot * fdot);
    s.kappa.push_back(std::sqrt(xdd * xdd + ydd * ydd));
  }
  return s;
}

/// kappa = f'' / (1 + f'^2)^{3/2} for the graph (t, f(t)).
inline CurvatureSample curvature_graph(std::span<const double> f, std::span<const double> t) {
  if (f.size() != t.size()) throw ShapeError("curvature: values and grid differ in length");
  const double h = detail::grid_spacing(t);
  CurvatureSample s;
  s.parameterization = Parameterization::graph;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const double d1 = (f[i + 1] - f[i - 1]) / (2 * h);
    const double d2 = (f[i + 1] - 2 * f[i] + f[i - 1]) / (h * h);
    s.t.push_back(t[i]);
    s.first.push_back(d1);
    s.second.push_back(d2);
    s.kappa.push_back(d2 / std::pow(1 + d1 * d1, 1.5));
  }
  return s;
}

/// Mean over interior vertices of |turning angle| / mean adjacent segment
/// length. Vertices next to zero-length segments are skipped.
template <class P>
double mean_abs_discrete_curvature(const std::vector<P>& pts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const P a = pts[i] - pts[i - 1], b = pts[i + 1] - pts[i];
    const double la = a.norm(), lb = b.norm();
    if (!(la > 0.0) || !(lb > 0.0)) continue;
    const double angle = clamped_acos(a.dot(b) / (la * lb));
    sum += angle / (0.5 * (la + lb));
    ++n;
  }
  if (n == 0) throw DegenerateError("curve has no interior vertices with nonzero segments");
  return sum / static_cast<double>(n);
}

/// Monte-Carlo check of xdot = cos(f + mu) with f ~ N(0, sigma^2) against
/// the first-order prediction N(cos mu, sigma^2 sin^2 mu).
struct DeltaMethodReport {
  double mu = 0.0, sigma = 0.0;
  std::size_t draws = 0;
  double mean = 0.0, mean_se = 0.0, variance = 0.0;
  double predicted_mean = 0.0;          ///< cos mu
  double predicted_variance = 0.0;      ///< sigma^2 sin^2 mu
  double second_order_mean = 0.0;       ///< exact E[cos(mu + f)] = cos mu exp(-sigma^2 / 2)
  double mean_z() const { return mean_se > 0 ? (mean - predicted_mean) / mean_se : 0.0; }
  double variance_rel_error() const { return std::abs(variance - predicted_variance) / predicted_variance; }
};

inline DeltaMethodReport delta_method_check(double mu, double sigma, std::size_t draws, std::uint64_t seed) {
  if (std::abs(std::cos(mu)) < 1e-12 || std::abs(std::sin(mu)) < 1e-12) {
    throw InvalidArgument("delta method check needs cos(mu) != 0 and sin(mu) != 0");
  }
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
  if (draws < 2) throw InvalidArgument("delta method check needs at least two draws");
  DeltaMethodReport r;
  r.mu = mu;
  r.sigma = sigma;
  r.draws = draws;
  r.predicted_mean = std::cos(mu);
  r.predicted_variance = sigma * sigma * std::sin(mu) * std::sin(mu);
  r.second_order_mean = std::cos(mu) * std::exp(-0.5 * sigma * sigma);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(draws);
  for (auto& v : x) v = std::cos(mu + sigma * g(rng));
  const MeanSe ms = mean_se(x);
  r.mean = ms.mean;
  r.mean_se = ms.se;
  double ss = 0.0;
  for (double v : x) ss += (v - ms.mean) * (v - ms.mean);
  r.variance = ss / static_cast<double>(draws - 1);
  return r;
}

/// Var(f'(t)) for the infinitely wide one-hidden-layer tanh network
/// f(t) = sum_j v_j tanh(u_j t + b_j) with u ~ N(0, w2), b ~ N(0, b2) and
/// sum_j Var(v_j) = 1: E[u^2 sech^4(u t + b)], by Gauss-Kronrod quadrature.
inline double tanh_derivative_variance(double t, double w2 = 2.0, double b2 = 0.0) {
  using boost::math::quadrature::gauss_kronrod;
  const double sd = std::sqrt(w2 * t * t + b2);
  auto sech4 = [](double z) {
    const double c = 1.0 / std::cosh(z);
    return c * c * c * c;
  };
  auto phi = [](double z, double s) {
    return std::exp(-0.5 * z * z / (s * s)) / (s * std::sqrt(2 * std::numbers::pi));
  };
  if (b2 == 0.0) {
    // z = u t; integrate over u directly.
    const double su = std::sqrt(w2);
    auto g = [&](double u) { return u * u * sech4(u * t) * phi(u, su); };
    return gauss_kronrod<double, 61>::integrate(g, -12 * su, 12 * su, 15, 1e-13);
  }
  // u and z = u t + b are jointly Gaussian; E[u^2 | z] = Var(u|z) + E[u|z]^2.
  const double cov = w2 * t;
  auto g = [&](double z) {
    const double mean_u = cov / (sd * sd) * z;
    const double var_u = w2 - cov * cov / (sd * sd);
    return (var_u + mean_u * mean_u) * sech4(z) * phi(z, sd);
  };
  return gauss_kronrod<double, 61>::integrate(g, -12 * sd, 12 * sd, 15, 1e-13);
}

/// CSV with header `input,depth,value`.
struct CurveCsvRow {
  double input;
  int depth;
  double value;
};

inline std::string format_curve_csv(const std::vector<CurveCsvRow>& rows) {
  std::string out = "input,depth,value\n";
  for (const auto& r : rows) {
    out += format_double(r.input) + ',' + std::to_string(r.depth) + ',' + format_double(r.value) + '\n';
  }
  return out;
}

}  // namespace dmp::gp
