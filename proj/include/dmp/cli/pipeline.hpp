#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dmp/cli/config.hpp"
#include "dmp/common/fileio.hpp"
#include "dmp/geometry.hpp"
#include "dmp/priors.hpp"

namespace dmp::cli {

using geometry::PointCloud;
using geometry::TriangleMesh;
using geometry::Vec3;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Stream ids for derive_seed(cfg.seed, id).
enum SeedStream : std::uint64_t {
  kSeedNoise = 1,
  kSeedSubsample = 2,
  kSeedEvalMesh = 3,
  kSeedEvalTruth = 4,
  kSeedInputSample = 5,
};

/// A point set or a mesh read from disk.
struct Loaded {
  PointCloud cloud;
  std::optional<TriangleMesh> mesh;  ///< set for OBJ files with faces or lines
};

/// .xyz -> points. .obj -> the mesh plus `samples` surface points, or its
/// vertices when the file has no elements.
inline Loaded load_geometry(const std::filesystem::path& path, std::size_t samples, std::uint64_t seed) {
  if (!std::filesystem::exists(path)) throw IoError("input file '" + path.string() + "' does not exist");
  const std::string ext = path.extension().string();
  Loaded out;
  if (ext == ".xyz" || ext == ".XYZ") {
    out.cloud = geometry::read_xyz(path);
  } else if (ext == ".obj" || ext == ".OBJ") {
    TriangleMesh mesh = geometry::read_obj(path);
    if (mesh.faces.empty() && mesh.edges.empty()) {
      out.cloud = PointCloud(mesh.vertices, 3);
    } else {
      out.cloud = geometry::sample_mesh(mesh, samples, seed);
      out.mesh = std::move(mesh);
    }
  } else {
    throw IoError("unsupported file type '" + path.string() + "' (expected .xyz or .obj)");
  }
  if (out.cloud.empty()) throw IoError("'" + path.string() + "' contains no points");
  return out;
}

/// Maps into the unit cube; planar clouds keep z = 0.
inline void to_unit_cube(const geometry::UnitCubeTransform& t, PointCloud& c) {
  for (auto& p : c.points) {
    p = t.apply(p);
    if (c.dim == 2) p.z() = 0.0;
  }
}

inline void to_unit_cube(const geometry::UnitCubeTransform& t, TriangleMesh& m, int dim) {
  for (auto& p : m.vertices) {
    p = t.apply(p);
    if (dim == 2) p.z() = 0.0;
  }
}

inline void from_unit_cube(const geometry::UnitCubeTransform& t, TriangleMesh& m, int dim) {
  for (auto& p : m.vertices) {
    p = t.invert(p);
    if (dim == 2) p.z() = 0.0;
  }
}

/// One fitted prior and its reconstruction, in unit-cube coordinates.
struct PriorResult {
  TriangleMesh mesh;
  double overlap = kNaN;
  std::optional<std::string> warning;
};

struct PriorRequest {
  PriorKind kind = PriorKind::mlp;
  int dim = 2;  ///< manifold dimension (mlp)
  std::size_t charts = 1;
  double lambda = 0.0;
  std::size_t iters = 5000;
  std::uint64_t seed = 0;
  std::size_t points_per_chart = 0;
  std::size_t resolution = 64;
  priors::ChartArch arch;
};

inline PriorResult run_prior(const PointCloud& target, const PriorRequest& req) {
  priors::FitConfig fc;
  fc.lambda = req.lambda;
  fc.iterations = req.iters;
  fc.seed = req.seed;
  fc.points_per_chart = req.points_per_chart;
  PriorResult out;
  if (req.kind == PriorKind::levelset) {
    if (target.dim != 3) throw UsageError("--kind levelset needs a 3D point cloud");
    priors::LevelSetOptions opt;
    opt.arch = req.arch;
    const auto model = priors::fit_levelset(target, fc, opt);
    auto ext = priors::extract_levelset(model, req.resolution);
    out.mesh = std::move(ext.mesh);
    out.warning = std::move(ext.warning);
    return out;
  }
  const int d = target.dim;
  if (d == 2 && req.dim != 1) throw UsageError("planar inputs need --dim 1");
  const auto chart_kind = req.kind == PriorKind::conv ? priors::ChartKind::conv : priors::ChartKind::mlp;
  priors::Atlas atlas = priors::make_atlas(req.charts, req.dim, d, chart_kind, req.arch, req.seed, req.points_per_chart);
  priors::fit_atlas(atlas, target, fc);
  out.mesh = priors::reconstruct(atlas, req.resolution);
  if (atlas.size() >= 2) out.overlap = priors::overlap_metric(atlas);
  return out;
}

/// Mean-normalized Chamfer between `samples` uniform points of `mesh` and
/// `reference`; NaN for an empty mesh.
inline double mesh_chamfer(const TriangleMesh& mesh, const PointCloud& reference, std::size_t samples,
                           std::uint64_t seed) {
  if (mesh.empty()) return kNaN;
  PointCloud s = geometry::sample_mesh(mesh, samples, seed);
  s.dim = reference.dim;
  if (reference.dim == 2)
    for (auto& p : s.points) p.z() = 0.0;
  return geometry::chamfer_distance(s, reference);
}

/// One row of the metrics CSV.
struct MetricsRow {
  std::string shape;
  std::string config;
  double lambda = 0.0;
  std::size_t charts = 0;
  std::size_t iters = 0;
  std::uint64_t seed = 0;
  double chamfer_eval = kNaN;
  double chamfer_noisy_baseline = kNaN;
  double overlap = kNaN;
  double seconds = kNaN;
};

inline constexpr const char* kMetricsHeader =
    "shape,config,lambda,charts,iters,seed,chamfer_eval,chamfer_noisy_baseline,overlap,seconds";

inline std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

inline std::string format_metrics_row(const MetricsRow& r) {
  return r.shape + "," + r.config + "," + csv_number(r.lambda) + "," + std::to_string(r.charts) + "," +
         std::to_string(r.iters) + "," + std::to_string(r.seed) + "," + csv_number(r.chamfer_eval) + "," +
         csv_number(r.chamfer_noisy_baseline) + "," + csv_number(r.overlap) + "," + csv_number(r.seconds);
}

inline std::string format_metrics(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) out += format_metrics_row(r) + "\n";
  return out;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace dmp::cli
