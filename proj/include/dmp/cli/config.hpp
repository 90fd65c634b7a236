#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dmp/common/error.hpp"

namespace dmp::cli {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Bad flags or flag combinations; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class PriorKind { mlp, conv, levelset };

inline std::string to_string(PriorKind k) {
  switch (k) {
    case PriorKind::mlp: return "mlp";
    case PriorKind::conv: return "conv";
    case PriorKind::levelset: return "levelset";
  }
  return "unknown";
}

inline PriorKind parse_prior_kind(const std::string& s) {
  if (s == "mlp") return PriorKind::mlp;
  if (s == "conv") return PriorKind::conv;
  if (s == "levelset") return PriorKind::levelset;
  throw UsageError("unknown prior kind '" + s + "' (expected mlp, conv or levelset)");
}

/// Everything a command needs; filled from flags and validated up front.
struct RunConfig {
  std::string command;
  std::filesystem::path input;
  std::optional<std::filesystem::path> ground_truth;
  std::filesystem::path out;
  std::optional<std::filesystem::path> metrics;  ///< default: <out>.metrics.csv

  std::size_t charts = 8;
  int dim = 2;  ///< manifold dimension n
  PriorKind kind = PriorKind::mlp;
  double lambda = 1.0;
  std::size_t iters = 5000;
  std::uint64_t seed = 0;
  /// Noise added before fitting. Unset means 0 for denoise / interpolate
  /// (their input is already noisy) and 2e-3 for benchmark.
  std::optional<double> noise;
  std::size_t eval_samples = 16384;
  std::optional<std::size_t> subsample;
  std::size_t points_per_chart = 0;  ///< 0 = default for the chart count
  std::size_t resolution = 64;       ///< reconstruction grid per axis

  // sample-prior / gp-verify
  bool arclength = false;
  bool gp = false;
  std::vector<int> depths = {1, 2, 3, 4, 5, 6};
  std::size_t draws = 5000;
  std::size_t width = 512;

  // benchmark
  std::vector<std::string> shapes;
  std::vector<std::string> configs;
  std::optional<std::filesystem::path> shapes_dir;
  std::size_t threads = 0;  ///< 0 = hardware concurrency
  bool timing = true;

  double noise_or(double fallback) const { return noise.value_or(fallback); }

  std::filesystem::path metrics_path() const {
    if (metrics) return *metrics;
    auto p = out;
    p += ".metrics.csv";
    return p;
  }

  void validate() const {
    if (charts < 1) throw UsageError("--charts must be >= 1");
    if (dim != 1 && dim != 2) throw UsageError("--dim must be 1 or 2");
    if (!(lambda >= 0.0) || lambda > 1e12) throw UsageError("--lambda must be a finite value >= 0");
    if (iters < 1) throw UsageError("--iters must be >= 1");
    if (noise && !(*noise >= 0.0)) throw UsageError("--noise must be >= 0");
    if (eval_samples < 1) throw UsageError("--eval-samples must be >= 1");
    if (subsample && *subsample < 1) throw UsageError("--subsample must be >= 1");
    if (resolution < 2) throw UsageError("--resolution must be >= 2");
    if (depths.empty()) throw UsageError("--depth needs at least one value");
    for (int d : depths) {
      if (d < 1) throw UsageError("--depth must be >= 1 (got " + std::to_string(d) + ")");
    }
    if (draws < 1) throw UsageError("--draws must be >= 1");
    if (width < 1) throw UsageError("--width must be >= 1");
    if (kind == PriorKind::conv && dim != 2) throw UsageError("--kind conv needs --dim 2");
  }
};

/// Ablation label: S/C = surface/contour charts, count, R = stretch on;
/// Conv<k>[R] for convolutional charts and Implicit for the level set.
inline std::string config_name(PriorKind kind, int dim, std::size_t charts, double lambda) {
  const std::string r = lambda > 0.0 ? "R" : "";
  switch (kind) {
    case PriorKind::levelset: return "Implicit";
    case PriorKind::conv: return "Conv" + std::to_string(charts) + r;
    case PriorKind::mlp: break;
  }
  return (dim == 2 ? "S" : "C") + std::to_string(charts) + r;
}

struct PriorSetup {
  PriorKind kind = PriorKind::mlp;
  int dim = 2;
  std::size_t charts = 1;
  double lambda = 0.0;
};

/// Inverse of config_name for the benchmark's configuration list.
inline PriorSetup parse_config_name(const std::string& name) {
  if (name == "Implicit") return {PriorKind::levelset, 2, 1, 0.0};
  auto rest = [&](std::size_t prefix) {
    std::string body = name.substr(prefix);
    double lambda = 0.0;
    if (!body.empty() && body.back() == 'R') {
      lambda = 1.0;
      body.pop_back();
    }
    if (body.empty() || body.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("unknown configuration '" + name + "'");
    }
    return std::make_pair(static_cast<std::size_t>(std::stoul(body)), lambda);
  };
  if (name.rfind("Conv", 0) == 0) {
    auto [k, l] = rest(4);
    return {PriorKind::conv, 2, k, l};
  }
  if (!name.empty() && (name[0] == 'S' || name[0] == 'C')) {
    auto [k, l] = rest(1);
    return {PriorKind::mlp, name[0] == 'S' ? 2 : 1, k, l};
  }
  throw UsageError("unknown configuration '" + name + "'");
}

inline const std::vector<std::string>& default_benchmark_configs() {
  static const std::vector<std::string> c = {"S1", "S1R", "S8", "S8R", "C1", "C1R", "C8", "C8R", "Implicit", "Conv8R"};
  return c;
}

}  // namespace dmp::cli
