#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "dmp/cli.hpp"

using namespace dmp;
using namespace dmp::cli;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory per test, removed afterwards.
class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("dmp_cli_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& f) const { return path_ / f; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_sphere_xyz(const fs::path& path, std::size_t n, double noise, std::uint64_t seed) {
  auto cloud = geometry::sample_mesh(geometry::procedural_shape("sphere"), n, seed);
  cloud = geometry::perturb(cloud, noise, seed + 1);
  geometry::write_xyz(path, cloud);
}

struct Run {
  int code;
  std::string log;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream log;
  testing::internal::CaptureStdout();
  const int code = run_cli(args, log);
  testing::internal::GetCapturedStdout();
  return {code, log.str()};
}

bool no_temp_files(const fs::path& dir) {
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".tmp") return false;
  return true;
}

}  // namespace

// ---- configuration ----

TEST(ConfigName, RoundTripsDefaults) {
  for (const auto& name : default_benchmark_configs()) {
    const auto s = parse_config_name(name);
    EXPECT_EQ(config_name(s.kind, s.dim, s.charts, s.lambda), name);
  }
  const auto s8r = parse_config_name("S8R");
  EXPECT_EQ(s8r.kind, PriorKind::mlp);
  EXPECT_EQ(s8r.dim, 2);
  EXPECT_EQ(s8r.charts, 8u);
  EXPECT_EQ(s8r.lambda, 1.0);
  const auto c1 = parse_config_name("C1");
  EXPECT_EQ(c1.dim, 1);
  EXPECT_EQ(c1.lambda, 0.0);
  EXPECT_EQ(parse_config_name("Conv8R").kind, PriorKind::conv);
  EXPECT_EQ(parse_config_name("Implicit").kind, PriorKind::levelset);
}

TEST(ConfigName, RejectsUnknown) {
  for (const char* bad : {"", "X1", "S", "SR", "S8RR", "Conv", "S-1", "implicit"}) {
    EXPECT_THROW(parse_config_name(bad), UsageError) << bad;
  }
  EXPECT_THROW(parse_prior_kind("cnn"), UsageError);
}

TEST(RunConfig, Validate) {
  RunConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), UsageError);
  };
  bad([](RunConfig& c) { c.charts = 0; });
  bad([](RunConfig& c) { c.dim = 3; });
  bad([](RunConfig& c) { c.lambda = -1; });
  bad([](RunConfig& c) { c.lambda = std::nan(""); });
  bad([](RunConfig& c) { c.iters = 0; });
  bad([](RunConfig& c) { c.noise = -1e-3; });
  bad([](RunConfig& c) { c.eval_samples = 0; });
  bad([](RunConfig& c) { c.subsample = 0; });
  bad([](RunConfig& c) { c.resolution = 1; });
  bad([](RunConfig& c) { c.depths = {}; });
  bad([](RunConfig& c) { c.depths = {1, 0}; });
  bad([](RunConfig& c) { c.draws = 0; });
  bad([](RunConfig& c) { c.kind = PriorKind::conv, c.dim = 1; });
}

TEST(RunConfig, MetricsPathDefaultsNextToOutput) {
  RunConfig c;
  c.out = "dir/mesh.obj";
  EXPECT_EQ(c.metrics_path(), fs::path("dir/mesh.obj.metrics.csv"));
  c.metrics = "m.csv";
  EXPECT_EQ(c.metrics_path(), fs::path("m.csv"));
}

TEST(StableHash, Fnv1aVectors) {
  EXPECT_EQ(stable_hash(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(stable_hash("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(stable_hash("foobar"), 0x85944171f73967e8ULL);
}

TEST(Metrics, Format) {
  MetricsRow r;
  r.shape = "sphere";
  r.config = "S8R";
  r.lambda = 1.0;
  r.charts = 8;
  r.iters = 10;
  r.seed = 3;
  r.chamfer_eval = 0.5;
  r.seconds = 0.0;
  EXPECT_EQ(format_metrics({r}),
            "shape,config,lambda,charts,iters,seed,chamfer_eval,chamfer_noisy_baseline,overlap,seconds\n"
            "sphere,S8R,1,8,10,3,0.5,nan,nan,0\n");
}

TEST(BenchmarkTable, HeaderAndAverageSkipNan) {
  std::vector<MetricsRow> cells(4);
  cells[0].chamfer_eval = 1.0;
  cells[1].chamfer_eval = 2.0;
  cells[2].chamfer_eval = 3.0;
  const auto t = format_benchmark_table({"a", "b"}, {"S1", "S8R"}, cells);
  EXPECT_EQ(t, "shape,S1,S8R\na,1,2\nb,3,nan\navg,2,2\n");
}

TEST(VerificationPairs, PositiveQuadrant) {
  const auto pairs = verification_pairs();
  ASSERT_EQ(pairs.size(), 25u);
  for (const auto& [x, y] : pairs) {
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_GE(y.minCoeff(), 0.0);
    EXPECT_GE(x.dot(y) / (x.norm() * y.norm()), std::cos(std::numbers::pi / 4) - 1e-12);
  }
}

// ---- exit codes and messages ----

TEST(Cli, MissingInputIsUsageErrorNamingPath) {
  TempDir dir("missing");
  const auto r = run({"denoise", "--input", (dir / "nope.xyz").string(), "--out", (dir / "o.obj").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.log.find("nope.xyz"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "o.obj"));
}

TEST(Cli, ParseErrorsAreUsageErrors) {
  testing::internal::CaptureStderr();
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"denoise", "--out", "x.obj"}).code, kExitUsage);
  EXPECT_EQ(run({"gp-verify", "--draws", "many"}).code, kExitUsage);
  testing::internal::GetCapturedStderr();
  EXPECT_EQ(run({"gp-verify", "--depth", "0"}).code, kExitUsage);
  EXPECT_EQ(run({"denoise", "--input", "a.xyz", "--out", "b.obj", "--kind", "cnn"}).code, kExitUsage);
  EXPECT_EQ(run({"denoise", "--input", "a.xyz", "--out", "b.obj", "--dim", "3"}).code, kExitUsage);
  EXPECT_EQ(run({"benchmark", "--out", "b.csv", "--configs", "Q9"}).code, kExitUsage);
  EXPECT_EQ(run({"benchmark", "--out", "b.csv", "--shapes", "teapot"}).code, kExitUsage);
}

TEST(Cli, HelpExitsZero) {
  testing::internal::CaptureStdout();
  std::ostringstream log;
  EXPECT_EQ(run_cli(std::vector<std::string>{"--help"}, log), kExitOk);
  const std::string out = testing::internal::GetCapturedStdout();
  EXPECT_NE(out.find("benchmark"), std::string::npos);
}

TEST(Cli, GpVerifyUnderSampledClaimsNoPass) {
  TempDir dir("undersampled");
  const auto r = run({"gp-verify", "--draws", "10", "--out", (dir / "r.csv").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.log.find("under-sampled"), std::string::npos);
  EXPECT_EQ(r.log.find("passed"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "r.csv"));
}

TEST(Cli, GpVerifyReportLayout) {
  TempDir dir("verify");
  const auto r = run({"gp-verify", "--draws", "1000", "--width", "64", "--depth", "1", "--out", (dir / "r.csv").string()});
  EXPECT_TRUE(r.code == kExitOk || r.code == kExitFailure);
  const std::string csv = read_file(dir / "r.csv");
  EXPECT_EQ(csv.rfind("check,depth,entry,expected,observed,se,pass\n", 0), 0u);
  // 25 covariances, 10 distinct-input means, 6 + 6 cos psi rows, 1 KS row.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 25 + 10 + 12 + 1);
  EXPECT_NE(csv.find("cos_psi_decay_erf,6,"), std::string::npos);
  EXPECT_NE(csv.find("curvature_ks,1,"), std::string::npos);
}

// ---- denoise / interpolate ----

TEST(Cli, DenoiseWritesMeshAndMetricsReproducibly) {
  TempDir dir("denoise");
  write_sphere_xyz(dir / "noisy.xyz", 2048, 2e-3, 1);
  write_sphere_xyz(dir / "gt.xyz", 2048, 0.0, 2);
  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"denoise", "--input", (dir / "noisy.xyz").string(), "--ground-truth",
                                    (dir / "gt.xyz").string(), "--out", (dir / out).string(), "--charts", "2",
                                    "--iters", "5", "--points-per-chart", "64", "--eval-samples", "1024",
                                    "--resolution", "8", "--seed", "7", "--no-timing"};
  };
  ASSERT_EQ(run(args("a.obj")).code, kExitOk);
  ASSERT_EQ(run(args("b.obj")).code, kExitOk);
  EXPECT_EQ(read_file(dir / "a.obj"), read_file(dir / "b.obj"));
  const std::string m = read_file(dir / "a.obj.metrics.csv");
  EXPECT_EQ(m, read_file(dir / "b.obj.metrics.csv"));
  EXPECT_EQ(m.rfind(std::string(kMetricsHeader) + "\nnoisy,S2R,1,2,5,7,", 0), 0u);
  EXPECT_EQ(m.substr(m.size() - 3), ",0\n");

  const auto mesh = geometry::read_obj(dir / "a.obj");
  EXPECT_EQ(mesh.vertices.size(), 2u * 8 * 8);
  EXPECT_FALSE(mesh.faces.empty());
  EXPECT_TRUE(no_temp_files(dir.path()));
}

TEST(Cli, DenoiseOutputInInputFrame) {
  // A cloud far from the unit cube: the mesh is mapped back next to it.
  TempDir dir("frame");
  auto cloud = geometry::sample_mesh(geometry::procedural_shape("sphere"), 1024, 3);
  for (auto& p : cloud.points) p = p * 10.0 + geometry::Vec3(100, -50, 7);
  geometry::write_xyz(dir / "far.xyz", cloud);
  ASSERT_EQ(run({"denoise", "--input", (dir / "far.xyz").string(), "--out", (dir / "o.obj").string(), "--charts",
                 "1", "--iters", "2", "--points-per-chart", "64", "--eval-samples", "256", "--resolution", "4"})
                .code,
            kExitOk);
  const auto mesh = geometry::read_obj(dir / "o.obj");
  geometry::Vec3 mean = geometry::Vec3::Zero();
  for (const auto& v : mesh.vertices) mean += v;
  mean /= static_cast<double>(mesh.vertices.size());
  EXPECT_LT((mean - geometry::Vec3(100, -50, 7)).norm(), 10.0);
}

TEST(Cli, FailureLeavesNoOutput) {
  TempDir dir("fail");
  // Collinear input: the level set refuses degenerate normals after loading.
  geometry::PointCloud line;
  for (int i = 0; i < 64; ++i) line.points.emplace_back(0.01 * i, 0.0, 0.0);
  geometry::write_xyz(dir / "line.xyz", line);
  const auto r = run({"denoise", "--input", (dir / "line.xyz").string(), "--out", (dir / "o.obj").string(),
                      "--kind", "levelset", "--iters", "2"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.log.find("degenerate"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "o.obj"));
  EXPECT_FALSE(fs::exists(dir / "o.obj.metrics.csv"));
}

TEST(Cli, InterpolateSubsample) {
  TempDir dir("interp");
  write_sphere_xyz(dir / "p.xyz", 2048, 0.0, 4);
  auto args = [&](const std::string& out, const std::string& n) {
    return std::vector<std::string>{"interpolate", "--input", (dir / "p.xyz").string(), "--out", (dir / out).string(),
                                    "--subsample", n, "--iters", "3", "--points-per-chart", "64",
                                    "--eval-samples", "256", "--resolution", "8", "--seed", "5"};
  };
  ASSERT_EQ(run(args("a.obj", "1024")).code, kExitOk);
  ASSERT_EQ(run(args("b.obj", "1024")).code, kExitOk);
  EXPECT_EQ(read_file(dir / "a.obj"), read_file(dir / "b.obj"));
  // Single chart: one 8 x 8 grid.
  EXPECT_EQ(geometry::read_obj(dir / "a.obj").vertices.size(), 64u);
  const std::string m = read_file(dir / "a.obj.metrics.csv");
  EXPECT_NE(m.find(",S1R,1,1,3,5,"), std::string::npos);

  const auto too_many = run(args("c.obj", "4096"));
  EXPECT_EQ(too_many.code, kExitUsage);
  EXPECT_NE(too_many.log.find("--subsample"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "c.obj"));
}

// ---- sample-prior ----

TEST(Cli, SamplePriorFilesAndReproducibility) {
  TempDir dir("sample");
  auto args = [&](const std::string& sub) {
    return std::vector<std::string>{"sample-prior", "--out", (dir / sub).string(), "--depth", "1", "3",
                                    "--resolution", "8", "--seed", "2"};
  };
  ASSERT_EQ(run(args("a")).code, kExitOk);
  ASSERT_EQ(run(args("b")).code, kExitOk);
  for (const char* f : {"curve_depth1.obj", "curve_depth3.obj", "surface_depth1.obj", "surface_depth3.obj", "cos_psi.csv"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  }
  const auto curve = geometry::read_obj(dir / "a" / "curve_depth1.obj");
  EXPECT_EQ(curve.vertices.size(), 512u);
  EXPECT_EQ(curve.edges.size(), 511u);
  EXPECT_EQ(geometry::read_obj(dir / "a" / "surface_depth3.obj").vertices.size(), 64u);
  const std::string csv = read_file(dir / "a" / "cos_psi.csv");
  EXPECT_EQ(csv.rfind("input,depth,value\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 41);

  ASSERT_EQ(run({"sample-prior", "--out", (dir / "g").string(), "--depth", "2", "--gp", "--arclength"}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir / "g" / "curve_depth2.obj"));
  EXPECT_FALSE(fs::exists(dir / "g" / "surface_depth2.obj"));
}

// ---- benchmark ----

TEST(Cli, BenchmarkDeterministicAcrossThreadCounts) {
  TempDir dir("bench");
  auto args = [&](const std::string& out, const std::string& threads) {
    return std::vector<std::string>{"benchmark", "--out", (dir / out).string(), "--shapes", "sphere", "ring",
                                    "--configs", "S1", "C2R", "--iters", "3", "--points-per-chart", "64",
                                    "--eval-samples", "512", "--resolution", "8", "--threads", threads, "--no-timing"};
  };
  ASSERT_EQ(run(args("a.csv", "1")).code, kExitOk);
  ASSERT_EQ(run(args("b.csv", "3")).code, kExitOk);
  const std::string table = read_file(dir / "a.csv");
  EXPECT_EQ(table, read_file(dir / "b.csv"));
  EXPECT_EQ(read_file(dir / "a.csv.metrics.csv"), read_file(dir / "b.csv.metrics.csv"));
  EXPECT_EQ(table.rfind("shape,S1,C2R\nsphere,", 0), 0u);
  EXPECT_NE(table.find("\navg,"), std::string::npos);
  const std::string cells = read_file(dir / "a.csv.metrics.csv");
  EXPECT_EQ(std::count(cells.begin(), cells.end(), '\n'), 5);
  EXPECT_EQ(cells.find("nan,nan,nan"), std::string::npos);
}

TEST(Cli, BenchmarkRecordsFailedCellsAndContinues) {
  TempDir dir("benchfail");
  fs::create_directories(dir / "shapes");
  // A straight segment: every normal is degenerate, so Implicit fails.
  geometry::TriangleMesh line;
  for (int i = 0; i < 4; ++i) line.vertices.emplace_back(0.1 * i, 0.0, 0.0);
  line.edges = {{0, 1}, {1, 2}, {2, 3}};
  geometry::write_obj(dir / "shapes" / "line.obj", line);
  const auto r = run({"benchmark", "--out", (dir / "t.csv").string(), "--shapes-dir", (dir / "shapes").string(),
                      "--configs", "Implicit", "C1", "--noise", "0", "--iters", "2", "--points-per-chart", "64", "--eval-samples", "256",
                      "--resolution", "8", "--threads", "1"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.log.find("degenerate"), std::string::npos);
  const std::string table = read_file(dir / "t.csv");
  EXPECT_EQ(table.rfind("shape,Implicit,C1\nline,nan,", 0), 0u);
  EXPECT_EQ(table.find("line,nan,nan"), std::string::npos);
}

// ---- prior samples ----

TEST(PriorSamples, ArclengthCurvesHaveUniformSpeed) {
  gp::PriorSampleSpec spec;
  spec.arclength = true;
  spec.depth = 2;
  for (bool use_gp : {false, true}) {
    const auto pts = use_gp ? gp::gp_curve(spec, 3) : gp::random_network_curve(spec, 3);
    const double h = 2.0 * spec.t_range / static_cast<double>(spec.points - 1);
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double len = (pts[i] - pts[i - 1]).norm();
      lo = std::min(lo, len);
      hi = std::max(hi, len);
    }
    // Each trapezoid chord is h cos(df / 2) <= h, so only curvature shortens it.
    EXPECT_LE(hi, h * (1 + 1e-12)) << use_gp;
    EXPECT_GT(lo, 0.5 * h) << use_gp;
  }
}

TEST(PriorSamples, NetworkCurveIsDeterministicAndDepthSensitive) {
  gp::PriorSampleSpec a;
  a.depth = 1;
  gp::PriorSampleSpec b = a;
  b.depth = 4;
  EXPECT_EQ(gp::random_network_curve(a, 9), gp::random_network_curve(a, 9));
  EXPECT_NE(gp::random_network_curve(a, 9), gp::random_network_curve(b, 9));
  gp::PriorSampleSpec bad;
  bad.depth = 0;
  EXPECT_THROW(gp::random_network_curve(bad, 1), InvalidArgument);
}

TEST(PriorSamples, CurvatureChi2KsAcceptsWideNetworks) {
  const auto r = gp::curvature_chi2_check(1024, 2000, 0.5, 3);
  EXPECT_NEAR(r.scale, 0.43673838267077325, 1e-10);
  EXPECT_EQ(r.kappa2.size(), 2000u);
  EXPECT_GT(r.ks.p_value, 0.01);
}
