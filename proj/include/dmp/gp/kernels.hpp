#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "dmp/common/error.hpp"

namespace dmp::gp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class KernelNonlinearity { erf, relu };

/// Parameters of a limiting-GP kernel.
struct KernelSpec {
  KernelNonlinearity nonlinearity = KernelNonlinearity::relu;
  int depth = 1;
  /// sigma_b^2, added once to the input inner product and once per layer.
  double bias_variance = 0.0;
  /// Input covariance for the erf kernel; identity when unset.
  std::optional<Matrix> input_covariance;

  void validate(Eigen::Index input_dim) const {
    if (depth < 1) throw InvalidArgument("kernel depth must be >= 1");
    if (!(bias_variance >= 0.0)) throw InvalidArgument("bias variance must be non-negative");
    if (input_covariance) {
      if (input_covariance->rows() != input_dim || input_covariance->cols() != input_dim) {
        throw ShapeError("input covariance does not match the input dimension");
      }
    }
  }
};

/// J(psi) = sin(psi) + (pi - psi) cos(psi).
inline double arccos_j(double psi) {
  return std::sin(psi) + (std::numbers::pi - psi) * std::cos(psi);
}

/// acos with its argument clamped to [-1, 1] to absorb roundoff.
inline double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

/// (2/pi) asin(x^T S y / sqrt(x^T S x * y^T S y)).
inline double v_erf(const Vector& x, const Vector& y, const Matrix& sigma) {
  if (x.size() != y.size() || sigma.rows() != x.size() || sigma.cols() != x.size()) {
    throw ShapeError("v_erf: mismatched input dimensions");
  }
  const double xx = x.dot(sigma * x), yy = y.dot(sigma * y), xy = x.dot(sigma * y);
  if (!(xx > 0.0) || !(yy > 0.0)) throw InvalidArgument("v_erf: inputs must have positive norm under sigma");
  return 2.0 / std::numbers::pi * std::asin(std::clamp(xy / std::sqrt(xx * yy), -1.0, 1.0));
}

inline double v_erf(const Vector& x, const Vector& y) {
  return v_erf(x, y, Matrix::Identity(x.size(), x.size()));
}

/// (1/pi) |x| |y| J(psi), psi the angle between x and y.
inline double v_relu(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw ShapeError("v_relu: mismatched input dimensions");
  const double nx = x.norm(), ny = y.norm();
  if (!(nx > 0.0) || !(ny > 0.0)) throw InvalidArgument("v_relu: inputs must be nonzero");
  const double psi = clamped_acos(x.dot(y) / (nx * ny));
  return nx * ny * arccos_j(psi) / std::numbers::pi;
}

/// Kernel triple (K(x,x), K(x,y), K(y,y)) after `spec.depth` layers.
///
/// relu: K_{l+1}(x,y) = (1/pi) sqrt(K_l(x,x) K_l(y,y)) J(psi_l) + sigma_b^2.
/// erf:  K_{l+1}(x,y) = (2/pi) asin(K_l(x,y) / sqrt(K_l(x,x) K_l(y,y))) + sigma_b^2.
/// Both start from K_0(x,y) = x^T S y + sigma_b^2 (S = I for relu).
struct KernelTriple {
  double xx, xy, yy;
  double cos_psi() const { return xy / std::sqrt(xx * yy); }
};

inline KernelTriple kernel_triple(const Vector& x, const Vector& y, const KernelSpec& spec) {
  if (x.size() != y.size()) throw ShapeError("kernel: mismatched input dimensions");
  spec.validate(x.size());
  const double sb2 = spec.bias_variance;
  KernelTriple k{};
  if (spec.nonlinearity == KernelNonlinearity::erf && spec.input_covariance) {
    const Matrix& s = *spec.input_covariance;
    k = {x.dot(s * x) + sb2, x.dot(s * y) + sb2, y.dot(s * y) + sb2};
  } else {
    k = {x.squaredNorm() + sb2, x.dot(y) + sb2, y.squaredNorm() + sb2};
  }
  if (!(k.xx > 0.0) || !(k.yy > 0.0)) {
    throw InvalidArgument("kernel: zero diagonal (zero input with sigma_b = 0)");
  }
  for (int l = 0; l < spec.depth; ++l) {
    const double c = k.xy / std::sqrt(k.xx * k.yy);
    if (spec.nonlinearity == KernelNonlinearity::relu) {
      const double psi = clamped_acos(c);
      if (!(psi >= 0.0 && psi <= std::numbers::pi)) throw Error("kernel recursion: angle out of range");
      // J(0) = pi keeps the diagonal: K(x,x) -> K(x,x) + sigma_b^2.
      k = {k.xx + sb2, std::sqrt(k.xx * k.yy) * arccos_j(psi) / std::numbers::pi + sb2, k.yy + sb2};
    } else {
      const double a = 2.0 / std::numbers::pi * std::asin(std::clamp(c, -1.0, 1.0));
      k = {1.0 + sb2, a + sb2, 1.0 + sb2};
    }
  }
  return k;
}

inline double kernel_depth(const Vector& x, const Vector& y, const KernelSpec& spec) {
  return kernel_triple(x, y, spec).xy;
}

/// Normalized covariance cos(psi_l) between `x_ref` and each of `xs`.
inline std::vector<double> cos_psi_curve(const Vector& x_ref, const std::vector<Vector>& xs,
                                         const KernelSpec& spec) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& y : xs) out.push_back(std::clamp(kernel_triple(x_ref, y, spec).cos_psi(), -1.0, 1.0));
  return out;
}

/// Kernel matrix K_ij = kernel_depth(x_i, x_j).
inline Matrix kernel_matrix(const std::vector<Vector>& xs, const KernelSpec& spec) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = kernel_depth(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)], spec);
    }
  }
  return k;
}

/// One-dimensional input convenience: x = (t).
inline Vector scalar_input(double t) { return Vector::Constant(1, t); }

}  // namespace dmp::gp
