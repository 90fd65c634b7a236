#pragma once

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "dmp/cli/commands.hpp"
#include "dmp/cli/config.hpp"

namespace dmp::cli {

namespace detail {

inline void add_fit_options(CLI::App* sub, RunConfig& cfg, std::string& kind) {
  sub->add_option("--input", cfg.input, "Input point cloud (.xyz) or mesh (.obj)")->required();
  sub->add_option("--ground-truth", cfg.ground_truth, "Clean reference (.xyz or .obj) for evaluation");
  sub->add_option("--out", cfg.out, "Output mesh (.obj)")->required();
  sub->add_option("--metrics", cfg.metrics, "Metrics CSV (default <out>.metrics.csv)");
  sub->add_option("--kind", kind, "Prior: mlp, conv or levelset")->capture_default_str();
  sub->add_option("--dim", cfg.dim, "Manifold dimension of the charts (1 or 2)")->capture_default_str();
  sub->add_option("--iters", cfg.iters, "Adam iterations")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sub->add_option("--noise", cfg.noise, "Gaussian noise sigma added before fitting (default 0)");
  sub->add_option("--eval-samples", cfg.eval_samples, "Mesh samples for evaluation")->capture_default_str();
  sub->add_option("--subsample", cfg.subsample, "Fit on a random subset of this many points");
  sub->add_option("--points-per-chart", cfg.points_per_chart, "Samples per chart (0 = 16384 for one chart, else 4096)")
      ->capture_default_str();
  sub->add_option("--resolution", cfg.resolution, "Reconstruction samples per axis")->capture_default_str();
  sub->add_flag("!--no-timing", cfg.timing, "Write 0 for seconds so the metrics file is reproducible");
}

}  // namespace detail

/// Parses `argv` and runs the selected command. Returns the process exit code:
/// 0 success, 1 verification or runtime failure, 2 usage or I/O error.
inline int run_cli(int argc, const char* const* argv, std::ostream& log = std::cerr) {
  CLI::App app{"Neural manifold priors: fitting, GP verification and benchmarks"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string kind = "mlp";

  auto* denoise = app.add_subcommand("denoise", "Fit a prior to a noisy point cloud and write the reconstruction");
  detail::add_fit_options(denoise, cfg, kind);
  denoise->add_option("--charts", cfg.charts, "Number of charts")->capture_default_str();
  denoise->add_option("--lambda", cfg.lambda, "Stretch regularization weight")->capture_default_str();

  auto* interp = app.add_subcommand("interpolate", "Single-chart fit with stretch regularization on sparse input");
  detail::add_fit_options(interp, cfg, kind);

  auto* verify = app.add_subcommand("gp-verify", "Monte-Carlo check of random networks against the limiting GP");
  verify->add_option("--out", cfg.out, "Report CSV (default stdout)");
  verify->add_option("--depth", cfg.depths, "Check depths 1..max(depth)")->default_str("3");
  verify->add_option("--draws", cfg.draws, "Network draws per depth")->capture_default_str();
  verify->add_option("--width", cfg.width, "Hidden width")->capture_default_str();
  verify->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();

  auto* sample = app.add_subcommand("sample-prior", "Draw random curves and surfaces at several depths");
  sample->add_option("--out", cfg.out, "Output directory")->required();
  sample->add_option("--depth", cfg.depths, "Depths to sample")->default_str("1 2 3 4 5 6");
  sample->add_option("--width", cfg.width, "Hidden width")->default_str("256");
  sample->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sample->add_option("--resolution", cfg.resolution, "Surface samples per axis")->capture_default_str();
  sample->add_flag("--arclength", cfg.arclength, "Integrate (cos f, sin f) instead of using f as coordinates");
  sample->add_flag("--gp", cfg.gp, "Cholesky samples of the limiting GP instead of networks (curves only)");

  auto* bench = app.add_subcommand("benchmark", "Fit every shape x configuration cell and tabulate Chamfer");
  bench->add_option("--out", cfg.out, "Results table CSV")->required();
  bench->add_option("--metrics", cfg.metrics, "Per-cell metrics CSV (default <out>.metrics.csv)");
  bench->add_option("--shapes", cfg.shapes, "Procedural shapes (sphere torus plane ring spiral)");
  bench->add_option("--shapes-dir", cfg.shapes_dir, "Directory of .obj ground truths instead of procedural shapes");
  bench->add_option("--configs", cfg.configs, "Configurations (default S1 S1R S8 S8R C1 C1R C8 C8R Implicit Conv8R)");
  bench->add_option("--iters", cfg.iters, "Adam iterations per cell")->capture_default_str();
  bench->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  bench->add_option("--noise", cfg.noise, "Noise sigma (default 2e-3)");
  bench->add_option("--eval-samples", cfg.eval_samples, "Points sampled per shape and per reconstruction")
      ->capture_default_str();
  bench->add_option("--points-per-chart", cfg.points_per_chart, "Samples per chart (0 = default)")->capture_default_str();
  bench->add_option("--resolution", cfg.resolution, "Reconstruction samples per axis")->capture_default_str();
  bench->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  bench->add_flag("!--no-timing", cfg.timing, "Write 0 for seconds so the output is reproducible");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.kind = parse_prior_kind(kind);
    if (verify->parsed()) {
      cfg.command = "gp-verify";
      if (verify->count("--depth") == 0) cfg.depths = {3};
      return cmd_gp_verify(cfg, log);
    }
    if (sample->parsed()) {
      cfg.command = "sample-prior";
      if (sample->count("--width") == 0) cfg.width = 256;
      return cmd_sample_prior(cfg, log);
    }
    if (denoise->parsed()) {
      cfg.command = "denoise";
      return cmd_denoise(cfg, log);
    }
    if (interp->parsed()) {
      cfg.command = "interpolate";
      return cmd_interpolate(cfg, log);
    }
    cfg.command = "benchmark";
    return cmd_benchmark(cfg, log);
  } catch (const UsageError& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& log = std::cerr) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("dmp");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), log);
}

}  // namespace dmp::cli
