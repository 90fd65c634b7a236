#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dmp/gp.hpp"

using namespace dmp;
using namespace dmp::gp;

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

KernelSpec relu_spec(int depth, double sb2 = 0.0) {
  KernelSpec s;
  s.nonlinearity = KernelNonlinearity::relu;
  s.depth = depth;
  s.bias_variance = sb2;
  return s;
}

KernelSpec erf_spec(int depth, double sb2 = 0.0) {
  KernelSpec s = relu_spec(depth, sb2);
  s.nonlinearity = KernelNonlinearity::erf;
  return s;
}

std::vector<Vector> random_inputs(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vector> xs(n, Vector(static_cast<Eigen::Index>(dim)));
  for (auto& x : xs)
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = g(rng);
  return xs;
}

}  // namespace

// ---- closed-form kernels ----

TEST(VErf, Examples) {
  EXPECT_NEAR(v_erf(vec2(1, 0), vec2(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(v_erf(vec2(1, 0), vec2(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(v_erf(vec2(1, 0), vec2(1, 1)), 0.5, 1e-15);
}

TEST(VErf, InputCovariance) {
  Matrix s = Matrix::Identity(2, 2) * 4.0;
  EXPECT_NEAR(v_erf(vec2(1, 0), vec2(1, 1), s), 0.5, 1e-15);
  Matrix d(2, 2);
  d << 1, 0, 0, 0;
  EXPECT_NEAR(v_erf(vec2(1, 0), vec2(1, 5), d), 1.0, 1e-15);
  EXPECT_THROW(v_erf(vec2(0, 1), vec2(1, 5), d), InvalidArgument);
}

TEST(VErf, ZeroInputThrows) {
  EXPECT_THROW(v_erf(vec2(0, 0), vec2(1, 0)), InvalidArgument);
  EXPECT_THROW(v_erf(vec2(1, 0), Vector::Zero(3)), ShapeError);
}

TEST(VRelu, Examples) {
  EXPECT_NEAR(v_relu(vec2(1, 0), vec2(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(v_relu(vec2(1, 0), vec2(0, 1)), 1.0 / kPi, 1e-15);
  EXPECT_NEAR(v_relu(vec2(1, 0), vec2(-1, 0)), 0.0, 1e-15);
  // Scales with |x||y|.
  EXPECT_NEAR(v_relu(vec2(2, 0), vec2(0, 3)), 6.0 / kPi, 1e-14);
}

TEST(VRelu, ClampsNearlyParallelInputs) {
  const Vector x = vec2(0.1, 0.7);
  const double v = v_relu(x, x * 3.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, 3.0 * x.squaredNorm(), 1e-12);
  EXPECT_THROW(v_relu(Vector::Zero(2), x), InvalidArgument);
}

TEST(KernelDepth, Examples) {
  const Vector x = vec2(1, 0), y = vec2(0, 1);
  EXPECT_NEAR(kernel_depth(x, y, relu_spec(1)), 1.0 / kPi, 1e-15);
  for (int l = 1; l <= 8; ++l) EXPECT_NEAR(kernel_depth(x, x, relu_spec(l)), 1.0, 1e-14) << l;
  // Independent scipy-free recursion value: J(acos(1/pi)) / pi.
  EXPECT_NEAR(kernel_depth(x, y, relu_spec(2)), 0.4937310902003716, 1e-13);
}

TEST(KernelDepth, DepthOneMatchesClosedForms) {
  const auto xs = random_inputs(20, 3, 11);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    EXPECT_NEAR(kernel_depth(xs[i], xs[i + 1], relu_spec(1)), v_relu(xs[i], xs[i + 1]), 1e-12);
    EXPECT_NEAR(kernel_triple(xs[i], xs[i + 1], erf_spec(1)).xy, v_erf(xs[i], xs[i + 1]), 1e-12);
  }
}

TEST(KernelDepth, BiasAddedOncePerLayer) {
  const Vector x = vec2(1, 0), y = vec2(0, 1);
  const double sb2 = 0.25;
  // K0 = x.y + sb2 = 0.25, diag 1.25 -> K1 = 1.25 J(acos(0.2)) / pi + sb2.
  const double expect = 1.25 * arccos_j(std::acos(0.2)) / kPi + sb2;
  EXPECT_NEAR(kernel_depth(x, y, relu_spec(1, sb2)), expect, 1e-14);
  EXPECT_NEAR(kernel_depth(x, x, relu_spec(3, sb2)), 1.0 + 4 * sb2, 1e-14);
}

TEST(KernelDepth, ZeroInputNeedsBias) {
  const Vector z = Vector::Zero(1);
  EXPECT_THROW(kernel_depth(z, scalar_input(1.0), relu_spec(2)), InvalidArgument);
  EXPECT_NO_THROW(kernel_depth(z, scalar_input(1.0), relu_spec(2, 1e-4)));
  KernelSpec bad = relu_spec(0);
  EXPECT_THROW(kernel_depth(scalar_input(1), scalar_input(1), bad), InvalidArgument);
}

class KernelProperty : public ::testing::TestWithParam<int> {};

TEST_P(KernelProperty, SymmetryCauchySchwarzDiagonal) {
  const auto xs = random_inputs(12, 4, 100 + static_cast<std::uint64_t>(GetParam()));
  const double sb2 = 0.01 * GetParam();
  for (const auto& x : xs) {
    for (const auto& y : xs) {
      EXPECT_NEAR(v_relu(x, y), v_relu(y, x), 1e-12);
      EXPECT_NEAR(v_erf(x, y), v_erf(y, x), 1e-12);
      for (const KernelSpec& spec : {relu_spec(1 + GetParam() % 6, sb2), erf_spec(1 + GetParam() % 6, sb2)}) {
        const auto a = kernel_triple(x, y, spec);
        const auto b = kernel_triple(y, x, spec);
        EXPECT_NEAR(a.xy, b.xy, 1e-12);
        EXPECT_LE(std::abs(a.xy), std::sqrt(a.xx * a.yy) + 1e-12);
      }
    }
    for (int l = 1; l <= 6; ++l) EXPECT_NEAR(kernel_depth(x, x, relu_spec(l)), x.squaredNorm(), 1e-12 * x.squaredNorm());
  }
}

INSTANTIATE_TEST_SUITE_P(Instances, KernelProperty, ::testing::Range(1, 11));

TEST(KernelMatrix, PsdWithinJitter) {
  std::vector<Vector> xs;
  for (int i = 0; i < 60; ++i) xs.push_back(scalar_input(-1.0 + 2.0 * i / 59.0));
  for (const auto& spec : {relu_spec(3, 1e-4), erf_spec(3, 1e-4)}) {
    const Matrix k = kernel_matrix(xs, spec);
    EXPECT_TRUE(k.isApprox(k.transpose(), 0.0));
    EXPECT_NO_THROW(psd_cholesky(k));
  }
}

TEST(CosPsiCurve, Examples) {
  const Vector x0 = scalar_input(0.0);
  std::vector<Vector> ys = {x0, scalar_input(0.5), scalar_input(-1.0), scalar_input(3.0)};
  for (int l = 1; l <= 6; ++l) {
    for (const auto& spec : {relu_spec(l, 1e-4), erf_spec(l, 1e-4)}) {
      const auto c = cos_psi_curve(x0, ys, spec);
      EXPECT_NEAR(c[0], 1.0, 1e-15);
      for (double v : c) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
  EXPECT_THROW(cos_psi_curve(x0, ys, relu_spec(1)), InvalidArgument);
}

TEST(CosPsiCurve, ErfDecaysWithDepth) {
  const Vector x0 = scalar_input(0.0);
  const std::vector<Vector> ys = {scalar_input(0.25), scalar_input(0.5), scalar_input(1.0), scalar_input(-0.75)};
  std::vector<double> prev(ys.size(), 2.0);
  for (int l = 1; l <= 6; ++l) {
    const auto c = cos_psi_curve(x0, ys, erf_spec(l, 1e-4));
    for (std::size_t i = 0; i < ys.size(); ++i) {
      EXPECT_LT(c[i], prev[i]) << "depth " << l;
      prev[i] = c[i];
    }
  }
}

TEST(CosPsiCurve, ReluRisesWithDepth) {
  // The arccos map rho -> (sin psi + (pi - psi) rho) / pi never decreases rho.
  const Vector x0 = scalar_input(0.0);
  const std::vector<Vector> ys = {scalar_input(0.5)};
  double prev = -2.0;
  for (int l = 1; l <= 6; ++l) {
    const double c = cos_psi_curve(x0, ys, relu_spec(l, 1e-4))[0];
    EXPECT_GT(c, prev);
    prev = c;
  }
}

// ---- statistics helpers ----

TEST(Stats, KolmogorovQ) {
  // scipy.special.kolmogorov
  EXPECT_NEAR(kolmogorov_q(1.0), 0.26999967167735456, 1e-12);
  EXPECT_NEAR(kolmogorov_q(0.5), 0.9639452436648751, 1e-12);
  EXPECT_NEAR(kolmogorov_q(2.0), 0.0006709252557796953, 1e-15);
  EXPECT_EQ(kolmogorov_q(0.0), 1.0);
}

TEST(Stats, KsStatistic) {
  const std::vector<double> s = {0.1, 0.4, 0.7};
  const auto r = ks_test(s, [](double x) { return std::clamp(x, 0.0, 1.0); });
  // max(1/3-0.1, 0.1, 2/3-0.4, 0.4-1/3, 1-0.7, 0.7-2/3)
  EXPECT_NEAR(r.statistic, 0.3, 1e-15);
  EXPECT_EQ(r.n, 3u);
  EXPECT_THROW(ks_test({}, [](double) { return 0.0; }), InvalidArgument);
}

TEST(Stats, KsAcceptsMatchingDistribution) {
  Rng rng = make_rng(5);
  std::chi_squared_distribution<double> chi(1.0);
  std::vector<double> s(5000);
  for (auto& v : s) v = 0.3 * chi(rng);
  EXPECT_GT(ks_test(s, scaled_chi2_cdf(0.3)).p_value, 0.01);
  EXPECT_LT(ks_test(s, scaled_chi2_cdf(0.4)).p_value, 1e-6);
}

TEST(Stats, ScaledChi2Cdf) {
  // scipy.stats.chi2(1).cdf(1.0)
  EXPECT_NEAR(scaled_chi2_cdf(1.0)(1.0), 0.6826894921370859, 1e-12);
  EXPECT_NEAR(scaled_chi2_cdf(2.0)(2.0), 0.6826894921370859, 1e-12);
  EXPECT_EQ(scaled_chi2_cdf(1.0)(-1.0), 0.0);
  EXPECT_THROW(scaled_chi2_cdf(0.0), InvalidArgument);
}

TEST(Stats, WilcoxonMatchesNormalApproximation) {
  // scipy.stats.wilcoxon(b - a, correction=True, method='approx'): W+ = 27,
  // n = 8 after dropping the zero, one tie pair.
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0};
  const std::vector<double> b = {1.5, 2.5, 2.0, 4.0, 7.0, 5.0, 10.0, 12.0, 9.5};
  const auto r = wilcoxon_signed_rank(a, b);
  EXPECT_EQ(r.n_used, 8u);
  // |d| = .5 .5 1 2 1 3 4 .5 -> ranks 2 2 4.5 6 4.5 7 8 2; negatives at 1 and 1.
  EXPECT_DOUBLE_EQ(r.w_plus, 2 + 2 + 6 + 7 + 8 + 2);
  const double var = 8 * 9 * 17 / 24.0 - ((27 - 3) + (8 - 2)) / 48.0;
  const double z = (27.0 - 18.0 - 0.5) / std::sqrt(var);
  EXPECT_NEAR(r.z, z, 1e-12);
  EXPECT_NEAR(r.p_two_sided, 2 * (1 - normal_cdf(z)), 1e-12);
  EXPECT_NEAR(r.p_greater, 1 - normal_cdf(z), 1e-12);
  EXPECT_NEAR(r.p_two_sided, 0.23107319627794864, 1e-12);
  EXPECT_NEAR(r.p_greater, 0.11553659813897432, 1e-12);
}

TEST(Stats, WilcoxonDegenerate) {
  const std::vector<double> a = {1, 2, 3};
  const auto r = wilcoxon_signed_rank(a, a);
  EXPECT_EQ(r.n_used, 0u);
  EXPECT_EQ(r.p_two_sided, 1.0);
  EXPECT_THROW(wilcoxon_signed_rank(a, std::vector<double>{1.0}), ShapeError);
}

TEST(Stats, MeanSe) {
  const std::vector<double> x = {1, 2, 3, 4};
  const auto m = mean_se(x);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_THROW(mean_se(std::vector<double>{1.0}), InvalidArgument);
}

// ---- Monte Carlo ----

TEST(McCovariance, Preconditions) {
  McArch arch;
  arch.input_dim = 2;
  const std::vector<std::pair<Vector, Vector>> pairs = {{vec2(1, 0), vec2(0, 1)}};
  EXPECT_THROW(mc_covariance(arch, 32, 1000, pairs, 1), InvalidArgument);
  EXPECT_THROW(mc_covariance(arch, 64, 999, pairs, 1), InvalidArgument);
  EXPECT_THROW(mc_covariance(arch, 64, 1000, {}, 1), InvalidArgument);
  const std::vector<std::pair<Vector, Vector>> bad = {{vec2(1, 0), Vector::Zero(3)}};
  EXPECT_THROW(mc_covariance(arch, 64, 1000, bad, 1), ShapeError);
}

TEST(McCovariance, TwoLayerReluMatchesArccosKernel) {
  McArch arch;
  arch.input_dim = 2;
  arch.output_dim = 2;
  const std::vector<std::pair<Vector, Vector>> pairs = {
      {vec2(1, 0), vec2(0, 1)}, {vec2(1, 0), vec2(1, 0)}, {vec2(1, 0.5), vec2(-0.5, 1)}};
  const auto mc = mc_covariance(arch, 512, 4000, pairs, 7);
  ASSERT_EQ(mc.covariance.size(), 3u);
  EXPECT_EQ(mc.inputs.size(), 4u);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double expect = v_relu(pairs[k].first, pairs[k].second);
    EXPECT_LT(std::abs(mc.covariance[k].value - expect), 4 * mc.covariance[k].se) << k;
  }
  for (const auto& m : mc.mean) EXPECT_LT(std::abs(m.value), 4 * m.se);
  ASSERT_EQ(mc.cross_covariance.size(), mc.inputs.size());
  for (const auto& c : mc.cross_covariance) EXPECT_LT(std::abs(c.value), 4 * c.se);
}

TEST(McCovariance, ThreeLayerReluMatchesDepthTwoKernel) {
  McArch arch;
  arch.input_dim = 2;
  arch.hidden_layers = 2;
  arch.output_dim = 4;
  const std::vector<std::pair<Vector, Vector>> pairs = {{vec2(1, 0), vec2(0, 1)}};
  const auto mc = mc_covariance(arch, 256, 3000, pairs, 9);
  EXPECT_LT(std::abs(mc.covariance[0].value - 0.4937310902003716), 4 * mc.covariance[0].se);
}

TEST(McCovariance, DeterministicPerSeed) {
  McArch arch;
  const std::vector<std::pair<Vector, Vector>> pairs = {{scalar_input(0.5), scalar_input(-1.0)}};
  const auto a = mc_covariance(arch, 64, 1000, pairs, 3);
  const auto b = mc_covariance(arch, 64, 1000, pairs, 3);
  const auto c = mc_covariance(arch, 64, 1000, pairs, 4);
  EXPECT_EQ(a.covariance[0].value, b.covariance[0].value);
  EXPECT_NE(a.covariance[0].value, c.covariance[0].value);
}

TEST(McCovariance, ErrorShrinksLikeInverseSqrtDraws) {
  // RMS error over replicates at N and 4N draws; ratio should be near 2.
  McArch arch;
  arch.input_dim = 2;
  const std::vector<std::pair<Vector, Vector>> pairs = {{vec2(1, 0), vec2(0.6, 0.8)}};
  const double truth = v_relu(pairs[0].first, pairs[0].second);
  auto rms = [&](std::size_t draws, std::uint64_t base) {
    double ss = 0.0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
      const double e = mc_covariance(arch, 64, draws, pairs, derive_seed(base, r), 20).covariance[0].value - truth;
      ss += e * e;
    }
    return std::sqrt(ss / reps);
  };
  // Width 64 leaves a finite-width bias; it is well below the N=1000 noise.
  const double ratio = rms(1000, 21) / rms(4000, 22);
  EXPECT_GE(ratio, 1.6);
  EXPECT_LE(ratio, 2.6);
}

// ---- GP sampling ----

TEST(GpSample, ZeroKernel) {
  const auto s = gp_sample(Matrix::Zero(5, 5), 3, 1);
  EXPECT_TRUE(s.values.isZero(0.0));
  EXPECT_EQ(s.values.cols(), 3);
}

TEST(GpSample, IdentityKernelGivesStandardNormals) {
  // 2000 inputs x 5 coordinates = 10^4 values.
  const auto s = gp_sample(Matrix::Identity(2000, 2000), 5, 2);
  const Eigen::VectorXd v = s.values.reshaped();
  const double mean = v.mean();
  const double var = (v.array() - mean).square().sum() / (v.size() - 1);
  EXPECT_NEAR(var, 1.0, 0.05);
  EXPECT_NEAR(mean, 0.0, 0.04);
}

TEST(GpSample, SampleCovarianceMatchesKernel) {
  // Inputs on a short arc keep correlations high; the relative standard
  // error of a weakly correlated entry would swamp a 5% tolerance.
  std::vector<Vector> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(vec2(std::cos(0.1 * i), std::sin(0.1 * i)) * (1.0 + 0.05 * i));
  const Matrix k = kernel_matrix(xs, relu_spec(2, 0.01));
  const auto s = gp_sample(k, 5000, 3);
  const Matrix emp = s.values * s.values.transpose() / 5000.0;
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      if (k(i, j) > 0.1) {
        EXPECT_NEAR(emp(i, j) / k(i, j), 1.0, 0.05) << i << "," << j;
      }
    }
  }
}

TEST(GpSample, JitterAndNotPsd) {
  // Rank-one PSD matrix needs jitter; indefinite matrix must fail.
  Vector u(3);
  u << 1, 2, 3;
  EXPECT_NO_THROW(gp_sample(u * u.transpose(), 2, 1));
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(gp_sample(bad, 1, 1), NotPsdError);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(gp_sample(asym, 1, 1), NotPsdError);
}

TEST(GpSample, CoordinatesIndependent) {
  const auto s = gp_sample(Matrix::Identity(2, 2), 20000, 4);
  // Columns are coordinates here; rows are inputs. Correlate the two inputs.
  const double c = s.values.row(0).dot(s.values.row(1)) / 20000.0;
  EXPECT_LT(std::abs(c), 3.0 / std::sqrt(20000.0));
}

// ---- curves ----

TEST(ArclengthCurve, Examples) {
  const double t_max = 3.0;
  std::vector<double> zero(101, 0.0), up(101, kPi / 2);
  auto p = arclength_curve(zero, t_max);
  EXPECT_NEAR(p.back().x(), t_max, 1e-12);
  EXPECT_NEAR(p.back().y(), 0.0, 1e-15);
  p = arclength_curve(up, t_max);
  EXPECT_NEAR(p.back().x(), 0.0, 1e-12);
  EXPECT_NEAR(p.back().y(), t_max, 1e-12);

  const auto t = uniform_grid(2 * kPi, 1001);
  const double h = t[1] - t[0];
  p = arclength_curve(t, 2 * kPi);
  EXPECT_LT(p.back().norm(), h * h);
  EXPECT_THROW(arclength_curve(std::vector<double>{1.0}, 1.0), InvalidArgument);
}

TEST(CurvatureArclength, Examples) {
  const auto t = uniform_grid(1.0, 1001);
  const std::vector<double> c(t.size(), 0.7);
  auto s = curvature_arclength(c, t);
  for (double k : s.kappa) EXPECT_NEAR(k, 0.0, 1e-12);
  s = curvature_arclength(t, t);
  for (double k : s.kappa) EXPECT_NEAR(k, 1.0, 1e-6);
  for (std::size_t i = 0; i < s.first.size(); ++i) {
    EXPECT_NEAR(s.first[i] * s.first[i] + s.second[i] * s.second[i], 1.0, 1e-6);
  }
  EXPECT_THROW(curvature_arclength(std::vector<double>{0, 1}, std::vector<double>{0, 1}), InvalidArgument);
}

TEST(CurvatureArclength, FiniteDifferenceMatchesFdotSquared) {
  // Error is O(h^2): halving h cuts it by about 4.
  auto max_err = [](std::size_t m) {
    const auto t = uniform_grid(1.0, m);
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) f[i] = std::sin(3 * t[i]) + t[i] * t[i];
    const auto s = curvature_arclength(f, t);
    double e = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i) e = std::max(e, std::abs(s.kappa2_fd[i] - s.kappa2_fdot[i]));
    return e;
  };
  const double e1 = max_err(501), e2 = max_err(1001);
  EXPECT_LT(e2, 1e-4);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(CurvatureGraph, Examples) {
  std::vector<double> t, f;
  for (int i = -5; i <= 5; ++i) t.push_back(1e-3 * i);
  for (double x : t) f.push_back(0.5 * x * x);
  auto s = curvature_graph(f, t);
  EXPECT_NEAR(s.kappa[4], 1.0, 1e-6);  // interior index 4 is t = 0
  EXPECT_NEAR(s.t[4], 0.0, 1e-15);
  f.clear();
  for (double x : t) f.push_back(2 * x - 1);
  s = curvature_graph(f, t);
  for (double k : s.kappa) EXPECT_NEAR(k, 0.0, 1e-8);
  f.clear();
  for (double x : t) f.push_back(std::sin(x));
  s = curvature_graph(f, t);
  EXPECT_NEAR(s.kappa[4], 0.0, 1e-10);
  std::vector<double> bad_t = {0.0, 0.1, 0.3};
  EXPECT_THROW(curvature_graph(std::vector<double>{0, 0, 0}, bad_t), InvalidArgument);
}

TEST(DiscreteCurvature, CircleIsOneOverRadius) {
  std::vector<Point2> pts;
  for (int i = 0; i <= 400; ++i) {
    const double a = 2 * kPi * i / 400;
    pts.emplace_back(2 * std::cos(a), 2 * std::sin(a));
  }
  EXPECT_NEAR(mean_abs_discrete_curvature(pts), 0.5, 1e-4);
  std::vector<Point2> line = {Point2(0, 0), Point2(1, 0), Point2(2, 0)};
  EXPECT_NEAR(mean_abs_discrete_curvature(line), 0.0, 1e-15);
}

TEST(DeltaMethod, Examples) {
  const auto r0 = delta_method_check(kPi / 4, 0.0, 100, 1);
  EXPECT_DOUBLE_EQ(r0.mean, std::cos(kPi / 4));
  EXPECT_THROW(delta_method_check(0.0, 0.05, 100, 1), InvalidArgument);
  EXPECT_THROW(delta_method_check(kPi / 2, 0.05, 100, 1), InvalidArgument);

  const auto r = delta_method_check(kPi / 4, 0.05, 100000, 2);
  EXPECT_LT(r.variance_rel_error(), 0.10);
  // The mean sits on the exact second-order value, not on cos(mu).
  EXPECT_LT(std::abs(r.mean - r.second_order_mean), 3 * r.mean_se);
  EXPECT_GT(std::abs(r.mean_z()), 3.0);
}

TEST(TanhDerivativeVariance, MatchesQuadratureOracle) {
  // scipy.integrate.quad of u^2 sech^4(u/2) N(u; 0, 2).
  EXPECT_NEAR(tanh_derivative_variance(0.5), 0.43673838267077325, 1e-10);
  EXPECT_NEAR(tanh_derivative_variance(0.0), 2.0, 1e-12);
}

TEST(TanhDerivativeVariance, WithBiasMatchesMonteCarlo) {
  Rng rng = make_rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  const double t = 0.7, w2 = 2.0, b2 = 0.5;
  double s = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double u = std::sqrt(w2) * g(rng), b = std::sqrt(b2) * g(rng);
    const double c = 1.0 / std::cosh(u * t + b);
    s += u * u * c * c * c * c;
  }
  EXPECT_NEAR(tanh_derivative_variance(t, w2, b2), s / n, 5e-3);
}

TEST(CurveCsv, Format) {
  const auto csv = format_curve_csv({{0.5, 2, 1.0 / 3.0}});
  EXPECT_EQ(csv, "input,depth,value\n0.5,2,0.33333333333333331\n");
}
