#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "dmp/cli/config.hpp"
#include "dmp/cli/pipeline.hpp"
#include "dmp/gp.hpp"

namespace dmp::cli {

/// FNV-1a; stable across platforms, used to seed benchmark cells by name.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline PriorRequest request_from(const RunConfig& cfg) {
  PriorRequest r;
  r.kind = cfg.kind;
  r.dim = cfg.dim;
  r.charts = cfg.charts;
  r.lambda = cfg.lambda;
  r.iters = cfg.iters;
  r.seed = cfg.seed;
  r.points_per_chart = cfg.points_per_chart;
  r.resolution = cfg.resolution;
  return r;
}

/// Shared body of denoise and interpolate.
inline int fit_and_write(const RunConfig& cfg, const PriorRequest& req, std::ostream& log) {
  if (cfg.out.empty()) throw UsageError("--out is required");
  Stopwatch clock;
  Loaded in = load_geometry(cfg.input, cfg.eval_samples, derive_seed(cfg.seed, kSeedInputSample));
  std::optional<Loaded> truth;
  if (cfg.ground_truth) truth = load_geometry(*cfg.ground_truth, cfg.eval_samples, derive_seed(cfg.seed, kSeedEvalTruth));

  const int dim = in.cloud.dim;
  const auto transform = geometry::unit_cube_transform(in.cloud.points);
  PointCloud target = in.cloud;
  to_unit_cube(transform, target);
  target.normals.reset();
  if (cfg.subsample) {
    if (*cfg.subsample > target.size()) {
      throw UsageError("--subsample " + std::to_string(*cfg.subsample) + " exceeds the " +
                       std::to_string(target.size()) + " input points");
    }
    target = geometry::subsample(target, *cfg.subsample, derive_seed(cfg.seed, kSeedSubsample));
  }
  target = geometry::perturb(target, cfg.noise_or(0.0), derive_seed(cfg.seed, kSeedNoise));

  PriorResult fit = run_prior(target, req);
  if (fit.warning) log << "warning: " << *fit.warning << "\n";

  MetricsRow row;
  row.shape = cfg.input.stem().string();
  row.config = config_name(req.kind, req.dim, req.charts, req.lambda);
  row.lambda = req.lambda;
  row.charts = req.kind == PriorKind::levelset ? 1 : req.charts;
  row.iters = req.iters;
  row.seed = cfg.seed;
  row.overlap = fit.overlap;
  const std::uint64_t eval_seed = derive_seed(cfg.seed, kSeedEvalMesh);
  if (truth) {
    PointCloud ref = truth->cloud;
    ref.dim = dim;
    to_unit_cube(transform, ref);
    row.chamfer_eval = mesh_chamfer(fit.mesh, ref, cfg.eval_samples, eval_seed);
    row.chamfer_noisy_baseline = geometry::chamfer_distance(target, ref);
  } else {
    // Without ground truth the fit is scored against its own input.
    row.chamfer_eval = mesh_chamfer(fit.mesh, target, cfg.eval_samples, eval_seed);
  }
  row.seconds = cfg.timing ? clock.seconds() : 0.0;

  TriangleMesh mesh = fit.mesh;
  from_unit_cube(transform, mesh, dim);
  const std::string obj = geometry::format_obj(mesh);
  const std::string csv = format_metrics({row});
  write_file_atomic(cfg.out, obj);
  write_file_atomic(cfg.metrics_path(), csv);
  std::cout << csv;
  return kExitOk;
}

}  // namespace detail

inline int cmd_denoise(const RunConfig& cfg, std::ostream& log = std::cerr) {
  cfg.validate();
  return detail::fit_and_write(cfg, detail::request_from(cfg), log);
}

/// Single chart with stretch regularization, optionally on a random subset.
inline int cmd_interpolate(const RunConfig& cfg, std::ostream& log = std::cerr) {
  cfg.validate();
  if (cfg.kind != PriorKind::mlp) throw UsageError("interpolate fits an mlp chart; --kind must be mlp");
  PriorRequest req = detail::request_from(cfg);
  req.charts = 1;
  req.lambda = 1.0;
  return detail::fit_and_write(cfg, req, log);
}

// ---- gp-verify ----

struct VerifyRow {
  std::string check;
  int depth = 0;
  std::string entry;
  double expected = kNaN;
  double observed = kNaN;
  double se = kNaN;
  std::string pass;  ///< "1", "0" or "diag"
};

inline std::string format_verify(const std::vector<VerifyRow>& rows) {
  std::string out = "check,depth,entry,expected,observed,se,pass\n";
  for (const auto& r : rows) {
    out += r.check + "," + std::to_string(r.depth) + "," + r.entry + "," + csv_number(r.expected) + "," +
           csv_number(r.observed) + "," + csv_number(r.se) + "," + r.pass + "\n";
  }
  return out;
}

/// 25 input pairs in the positive quadrant: angles a pi/16 and b pi/16
/// (a, b = 0..4) with norms 0.8 + 0.1 a and 0.9 + 0.1 b.
inline std::vector<std::pair<gp::Vector, gp::Vector>> verification_pairs() {
  std::vector<std::pair<gp::Vector, gp::Vector>> pairs;
  auto polar = [](double r, double angle) {
    gp::Vector v(2);
    v << r * std::cos(angle), r * std::sin(angle);
    return v;
  };
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      pairs.emplace_back(polar(0.8 + 0.1 * a, a * std::numbers::pi / 16), polar(0.9 + 0.1 * b, b * std::numbers::pi / 16));
  return pairs;
}

inline constexpr std::size_t kVerifyMinDraws = 1000;
inline constexpr double kVerifyRelTol = 0.03;
inline constexpr double kVerifySeTol = 3.0;
inline constexpr double kVerifyKsAlpha = 0.01;

/// Monte-Carlo covariance at depths 1..max(depths) against the ReLU kernel,
/// the erf cos psi depth-decay check and the curvature chi^2 KS test.
inline int cmd_gp_verify(const RunConfig& cfg, std::ostream& log = std::cerr) {
  cfg.validate();
  if (cfg.draws < kVerifyMinDraws) {
    log << "warning: under-sampled: --draws " << cfg.draws << " is below " << kVerifyMinDraws
        << "; no verification performed and no pass is claimed\n";
    return kExitFailure;
  }
  if (cfg.width < 64) throw UsageError("--width must be >= 64 for Monte-Carlo verification");
  const int max_depth = *std::max_element(cfg.depths.begin(), cfg.depths.end());

  std::vector<VerifyRow> rows;
  const auto pairs = verification_pairs();
  for (int depth = 1; depth <= max_depth; ++depth) {
    gp::McArch arch;
    arch.hidden_layers = depth;
    arch.input_dim = 2;
    arch.output_dim = 16;
    const auto mc = gp::mc_covariance(arch, cfg.width, cfg.draws, pairs, derive_seed(cfg.seed, 100 + depth));
    gp::KernelSpec spec;
    spec.depth = depth;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double e = gp::kernel_depth(pairs[k].first, pairs[k].second, spec);
      const auto& o = mc.covariance[k];
      const double err = std::abs(o.value - e);
      const bool ok = err <= kVerifySeTol * o.se && err <= kVerifyRelTol * std::abs(e);
      rows.push_back({"mc_covariance", depth, "pair" + std::to_string(k), e, o.value, o.se, ok ? "1" : "0"});
    }
    for (std::size_t i = 0; i < mc.mean.size(); ++i) {
      const auto& o = mc.mean[i];
      const bool ok = std::abs(o.value) <= kVerifySeTol * o.se;
      rows.push_back({"mc_mean", depth, "input" + std::to_string(i), 0.0, o.value, o.se, ok ? "1" : "0"});
    }
  }

  const gp::Vector x = gp::scalar_input(0.0), y = gp::scalar_input(0.5);
  for (auto nl : {gp::KernelNonlinearity::erf, gp::KernelNonlinearity::relu}) {
    const bool erf = nl == gp::KernelNonlinearity::erf;
    double prev = kNaN;
    for (int depth = 1; depth <= 6; ++depth) {
      gp::KernelSpec spec;
      spec.nonlinearity = nl;
      spec.depth = depth;
      spec.bias_variance = 1e-4;
      const double c = gp::cos_psi_curve(x, {y}, spec)[0];
      std::string pass = "diag";
      if (erf) pass = (depth == 1 || c < prev) ? "1" : "0";
      rows.push_back({erf ? "cos_psi_decay_erf" : "cos_psi_relu", depth, "x0_y0.5", prev, c, kNaN, pass});
      prev = c;
    }
  }

  const auto ks = gp::curvature_chi2_check(cfg.width, cfg.draws, 0.5, derive_seed(cfg.seed, 200));
  rows.push_back({"curvature_ks", 1, "t0.5", kVerifyKsAlpha, ks.ks.p_value, kNaN,
                  ks.ks.p_value > kVerifyKsAlpha ? "1" : "0"});

  const std::string csv = format_verify(rows);
  if (cfg.out.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(cfg.out, csv);
  }
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.pass == "0") {
      ++failed;
      log << "FAIL " << r.check << " depth " << r.depth << " " << r.entry << ": expected " << csv_number(r.expected)
          << ", observed " << csv_number(r.observed) << ", se " << csv_number(r.se) << "\n";
    }
  }
  log << (failed == 0 ? "gp-verify: all checks passed\n" : "gp-verify: " + std::to_string(failed) + " checks failed\n");
  return failed == 0 ? kExitOk : kExitFailure;
}

// ---- sample-prior ----

/// Per depth: a random curve and (network mode) a random surface, plus the
/// erf cos psi curves as CSV. Everything is computed before anything is written.
inline int cmd_sample_prior(const RunConfig& cfg, std::ostream& log = std::cerr) {
  cfg.validate();
  if (cfg.out.empty()) throw UsageError("--out (output directory) is required");
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  for (int depth : cfg.depths) {
    gp::PriorSampleSpec spec;
    spec.depth = depth;
    spec.width = cfg.width;
    spec.arclength = cfg.arclength;
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(depth));
    const auto pts = cfg.gp ? gp::gp_curve(spec, s) : gp::random_network_curve(spec, s);
    files.emplace_back(cfg.out / ("curve_depth" + std::to_string(depth) + ".obj"),
                       geometry::format_obj(geometry::polyline(pts)));
    if (!cfg.gp) {
      spec.points = cfg.resolution;
      files.emplace_back(cfg.out / ("surface_depth" + std::to_string(depth) + ".obj"),
                         geometry::format_obj(gp::random_network_surface(spec, derive_seed(s, 1))));
    }
    log << "depth " << depth << ": mean |curvature| " << gp::mean_abs_discrete_curvature(pts) << "\n";
  }
  std::vector<gp::CurveCsvRow> rows;
  std::vector<gp::Vector> ys;
  for (int i = 0; i <= 40; ++i) ys.push_back(gp::scalar_input(-1.0 + i / 20.0));
  for (int depth : cfg.depths) {
    gp::KernelSpec spec;
    spec.nonlinearity = gp::KernelNonlinearity::erf;
    spec.depth = depth;
    spec.bias_variance = 1e-4;
    const auto c = gp::cos_psi_curve(gp::scalar_input(0.0), ys, spec);
    for (std::size_t i = 0; i < ys.size(); ++i) rows.push_back({ys[i][0], depth, c[i]});
  }
  files.emplace_back(cfg.out / "cos_psi.csv", gp::format_curve_csv(rows));

  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out.string() + "'");
  for (const auto& [path, text] : files) write_file_atomic(path, text);
  return kExitOk;
}

// ---- benchmark ----

struct BenchmarkShape {
  std::string name;
  PointCloud truth;  ///< eval_samples clean points in the unit cube
  PointCloud input;  ///< noisy observation
  double baseline = kNaN;
};

inline std::vector<BenchmarkShape> benchmark_shapes(const RunConfig& cfg) {
  std::vector<std::pair<std::string, TriangleMesh>> meshes;
  if (cfg.shapes_dir) {
    if (!std::filesystem::is_directory(*cfg.shapes_dir)) {
      throw IoError("shape directory '" + cfg.shapes_dir->string() + "' does not exist");
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(*cfg.shapes_dir)) {
      if (e.path().extension() == ".obj") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw IoError("no .obj files in '" + cfg.shapes_dir->string() + "'");
    for (const auto& p : paths) {
      TriangleMesh m = geometry::read_obj(p);
      if (m.faces.empty() && m.edges.empty()) throw IoError("'" + p.string() + "' has no faces or lines");
      meshes.emplace_back(p.stem().string(), std::move(m));
    }
  } else {
    const std::vector<std::string> names =
        cfg.shapes.empty() ? std::vector<std::string>{"sphere", "torus", "plane", "ring", "spiral"} : cfg.shapes;
    for (const auto& n : names) {
      try {
        meshes.emplace_back(n, geometry::procedural_shape(n));
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
    }
  }
  std::vector<BenchmarkShape> out;
  for (auto& [name, mesh] : meshes) {
    const auto t = geometry::unit_cube_transform(mesh.vertices);
    to_unit_cube(t, mesh, 3);
    const std::uint64_t s = derive_seed(cfg.seed, stable_hash(name));
    BenchmarkShape b;
    b.name = name;
    b.truth = geometry::sample_mesh(mesh, cfg.eval_samples, derive_seed(s, kSeedEvalTruth));
    b.input = geometry::perturb(geometry::sample_mesh(mesh, cfg.eval_samples, derive_seed(s, kSeedInputSample)),
                                cfg.noise_or(2e-3), derive_seed(s, kSeedNoise));
    b.baseline = geometry::chamfer_distance(b.input, b.truth);
    out.push_back(std::move(b));
  }
  return out;
}

/// Wide table: one row per shape, one column per configuration, plus the
/// per-configuration average over shapes with a finite score.
inline std::string format_benchmark_table(const std::vector<std::string>& shapes,
                                          const std::vector<std::string>& configs,
                                          const std::vector<MetricsRow>& cells) {
  std::string out = "shape";
  for (const auto& c : configs) out += "," + c;
  out += "\n";
  std::vector<double> sum(configs.size(), 0.0);
  std::vector<std::size_t> count(configs.size(), 0);
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    out += shapes[s];
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const double v = cells[s * configs.size() + c].chamfer_eval;
      out += "," + csv_number(v);
      if (std::isfinite(v)) {
        sum[c] += v;
        ++count[c];
      }
    }
    out += "\n";
  }
  out += "avg";
  for (std::size_t c = 0; c < configs.size(); ++c) {
    out += "," + csv_number(count[c] ? sum[c] / static_cast<double>(count[c]) : kNaN);
  }
  return out + "\n";
}

/// Every shape x configuration cell is fitted independently on a worker
/// pool. Failed cells are reported and scored NaN; the run continues.
inline int cmd_benchmark(const RunConfig& cfg, std::ostream& log = std::cerr) {
  cfg.validate();
  if (cfg.out.empty()) throw UsageError("--out is required");
  const std::vector<std::string> configs = cfg.configs.empty() ? default_benchmark_configs() : cfg.configs;
  std::vector<PriorSetup> setups;
  for (const auto& c : configs) setups.push_back(parse_config_name(c));
  const auto shapes = benchmark_shapes(cfg);

  const std::size_t total = shapes.size() * configs.size();
  std::vector<MetricsRow> cells(total);
  std::vector<std::string> errors(total);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const auto& shape = shapes[i / configs.size()];
      const std::size_t c = i % configs.size();
      const PriorSetup& setup = setups[c];
      MetricsRow& row = cells[i];
      row.shape = shape.name;
      row.config = configs[c];
      row.lambda = setup.lambda;
      row.charts = setup.charts;
      row.iters = cfg.iters;
      row.seed = derive_seed(cfg.seed, stable_hash(shape.name + "/" + configs[c]));
      row.chamfer_noisy_baseline = shape.baseline;
      Stopwatch clock;
      try {
        PriorRequest req;
        req.kind = setup.kind;
        req.dim = setup.dim;
        req.charts = setup.charts;
        req.lambda = setup.lambda;
        req.iters = cfg.iters;
        req.seed = row.seed;
        req.points_per_chart = cfg.points_per_chart;
        req.resolution = cfg.resolution;
        PriorResult fit = run_prior(shape.input, req);
        row.overlap = fit.overlap;
        row.chamfer_eval = mesh_chamfer(fit.mesh, shape.truth, cfg.eval_samples, derive_seed(row.seed, kSeedEvalMesh));
        if (fit.warning) errors[i] = *fit.warning;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      row.seconds = cfg.timing ? clock.seconds() : 0.0;
      std::lock_guard lock(log_mutex);
      log << "[" << shape.name << " " << configs[c] << "] chamfer " << csv_number(row.chamfer_eval)
          << (errors[i].empty() ? "" : " (" + errors[i] + ")") << "\n";
    }
  };
  std::size_t n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, total);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::string> names;
  for (const auto& s : shapes) names.push_back(s.name);
  const std::string table = format_benchmark_table(names, configs, cells);
  write_file_atomic(cfg.out, table);
  write_file_atomic(cfg.metrics_path(), format_metrics(cells));
  std::cout << table;
  std::size_t failed = 0;
  for (const auto& row : cells) failed += std::isfinite(row.chamfer_eval) ? 0 : 1;
  if (failed) log << "benchmark: " << failed << " of " << total << " cells failed (scored nan)\n";
  return kExitOk;
}

}  // namespace dmp::cli
