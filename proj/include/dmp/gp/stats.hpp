#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "dmp/common/error.hpp"

namespace dmp::gp {

struct KsResult {
  double statistic = 0.0;  ///< sup |F_n - F|
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF. The p-value
/// uses Stephens' small-sample correction lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidArgument("KS test needs a non-empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d), sample.size()};
}

/// CDF of scale * chi^2 with `dof` degrees of freedom.
inline std::function<double(double)> scaled_chi2_cdf(double scale, double dof = 1.0) {
  if (!(scale > 0.0)) throw InvalidArgument("chi-square scale must be positive");
  boost::math::chi_squared_distribution<double> dist(dof);
  return [dist, scale](double x) { return x <= 0.0 ? 0.0 : boost::math::cdf(dist, x / scale); };
}

inline double normal_cdf(double z) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

struct WilcoxonResult {
  double w_plus = 0.0;     ///< rank sum of positive differences
  double z = 0.0;          ///< normal-approximation score (continuity corrected)
  double p_two_sided = 1.0;
  double p_greater = 1.0;  ///< H1: differences tend to be positive
  std::size_t n_used = 0;  ///< pairs with nonzero difference
};

/// Wilcoxon signed-rank test on paired samples (differences b - a) with the
/// tie-corrected normal approximation. Zero differences are dropped.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("Wilcoxon test needs paired samples of equal size");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] - a[i] != 0.0) d.push_back(b[i] - a[i]);
  }
  WilcoxonResult r;
  r.n_used = d.size();
  if (d.empty()) return r;

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
  std::vector<double> rank(d.size());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0) r.w_plus += rank[i];
  }
  const double n = static_cast<double>(d.size());
  const double mean = n * (n + 1) / 4.0;
  const double var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) return r;
  const double diff = r.w_plus - mean;
  const double cc = diff > 0 ? 0.5 : (diff < 0 ? -0.5 : 0.0);
  r.z = (diff - cc) / std::sqrt(var);
  r.p_two_sided = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(r.z))));
  r.p_greater = 1.0 - normal_cdf(r.z);
  return r;
}

/// Mean and standard error of a sample.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("standard error needs at least two values");
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1) / n)};
}

}  // namespace dmp::gp
