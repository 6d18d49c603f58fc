#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "far/cli.hpp"
#include "far/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace far;
using namespace far::testing;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("far_" + std::to_string(::getpid()) + "_" + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  f << content;
}

/// Observations drawn from a simulated density panel.
void write_panel_csv(const fs::path& p, std::size_t periods, std::size_t per_period, std::uint64_t seed) {
  SyntheticDesign d = forex_like_design();
  d.grid_points = 128;
  const DensityPanel panel = simulate_far(make_synthetic_generator(d), periods - 1, seed);
  std::ostringstream s;
  s << "period,value\n";
  for (std::size_t t = 0; t < panel.size(); ++t)
    for (double x : acceptance_sample(panel.densities[t], per_period, seed * 1000 + t))
      s << "m" << (t + 1) << "," << format_double(x) << "\n";
  write_file(p, s.str());
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "far");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string first_line(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line;
}

FarModel sample_model(std::uint64_t seed) {
  SyntheticDesign d = forex_like_design();
  d.grid_points = 48;
  const DensityPanel panel = simulate_far(make_synthetic_generator(d), 29, seed);
  return fit(panel, 3);
}

void expect_same_model(const FarModel& a, const FarModel& b) {
  EXPECT_EQ(a.grid->a(), b.grid->a());
  EXPECT_EQ(a.grid->b(), b.grid->b());
  EXPECT_EQ(a.K, b.K);
  EXPECT_EQ(a.sample_size, b.sample_size);
  EXPECT_EQ(a.mean_density.values(), b.mean_density.values());
  EXPECT_EQ(a.eigen.eigenvalues(), b.eigen.eigenvalues());
  EXPECT_EQ(a.eigen.eigenfunctions(), b.eigen.eigenfunctions());
  EXPECT_EQ(a.A_hat.kernel(), b.A_hat.kernel());
  EXPECT_EQ(a.Sigma_hat.kernel(), b.Sigma_hat.kernel());
  EXPECT_EQ(a.Q_hat.kernel(), b.Q_hat.kernel());
  EXPECT_EQ(a.P_hat.kernel(), b.P_hat.kernel());
  ASSERT_EQ(a.residuals.size(), b.residuals.size());
  for (std::size_t t = 0; t < a.residuals.size(); ++t) EXPECT_EQ(a.residuals[t].values(), b.residuals[t].values());
  EXPECT_EQ(a.first_state.values(), b.first_state.values());
  EXPECT_EQ(a.last_state.values(), b.last_state.values());
}

}  // namespace

TEST(ReadObservations, MinimalFile) {
  std::istringstream in("period,value\n1,0.5\n");
  const RawPanel p = parse_observations(in);
  ASSERT_EQ(p.periods(), 1u);
  EXPECT_EQ(p.blocks()[0].label, "1");
  EXPECT_EQ(p.blocks()[0].observations, std::vector<double>{0.5});
}

TEST(ReadObservations, InterleavedRowsBomAndBlankLines) {
  std::istringstream in("\xEF\xBB\xBFperiod,value\r\n2,1.0\n1,2.0\n\n2,3.0\n1,4.0\n");
  const RawPanel p = parse_observations(in);
  ASSERT_EQ(p.periods(), 2u);
  EXPECT_EQ(p.blocks()[0].label, "1");
  EXPECT_EQ(p.blocks()[0].observations, (std::vector<double>{2.0, 4.0}));
  EXPECT_EQ(p.blocks()[1].observations, (std::vector<double>{1.0, 3.0}));
}

TEST(ReadObservations, ParseErrorsCarryPositions) {
  auto parse_error = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_observations(in);
    } catch (const ParseError& e) {
      return std::make_pair(e.line(), e.column());
    }
    ADD_FAILURE() << "expected ParseError for: " << text;
    return std::make_pair(std::size_t{0}, std::size_t{0});
  };
  EXPECT_EQ(parse_error("1,0.5\n2,0.7\n").first, 1u);
  EXPECT_EQ(parse_error("time,value\n1,0.5\n").first, 1u);
  EXPECT_EQ(parse_error("period,value\n1,0.5\n2,abc\n"), std::make_pair(std::size_t{3}, std::size_t{3}));
  EXPECT_EQ(parse_error("period,value\n1,0.5,9\n").first, 2u);
  EXPECT_EQ(parse_error("period,value\n,0.5\n").first, 2u);
  EXPECT_EQ(parse_error("period,value\n1,nan\n").first, 2u);

  std::istringstream empty("");
  EXPECT_EQ(code_of([&] { parse_observations(empty); }), ErrorCode::EmptyFile);
  std::istringstream header_only("period,value\n");
  EXPECT_EQ(code_of([&] { parse_observations(header_only); }), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of([] { read_observations("/nonexistent/far/panel.csv"); }), ErrorCode::IoError);
}

TEST(ReadObservations, ForexShapedFile) {
  TempDir dir;
  std::ostringstream s;
  s << "period,value\n";
  Rng rng = make_stream(121);
  for (int t = 1; t <= 212; ++t)
    for (int i = 0; i < 1880; ++i) s << t << "," << format_double(0.001 * standard_normal(rng)) << "\n";
  write_file(dir / "panel.csv", s.str());
  const RawPanel p = read_observations(dir / "panel.csv");
  EXPECT_EQ(p.periods(), 212u);
  EXPECT_EQ(p.total_observations(), 212u * 1880u);
  EXPECT_EQ(p.blocks()[9].label, "10");
}

TEST(ModelFiles, BinaryRoundTripIsBitExact) {
  TempDir dir;
  const FarModel m = sample_model(122);
  save_model(m, dir / "model.bin");
  expect_same_model(m, load_model(dir / "model.bin"));
  expect_same_model(m, decode_model_binary(encode_model_binary(m)));
  EXPECT_EQ(model_format_for("x.json"), ModelFormat::Json);
  EXPECT_EQ(model_format_for("x.far"), ModelFormat::Binary);
}

TEST(ModelFiles, JsonRoundTrip) {
  TempDir dir;
  const FarModel m = sample_model(123);
  save_model(m, dir / "model.json");
  EXPECT_EQ(read_text(dir / "model.json").front(), '{');
  const FarModel back = load_model(dir / "model.json");
  EXPECT_LE(max_abs(back.A_hat.kernel() - m.A_hat.kernel()), 1e-15 * max_abs(m.A_hat.kernel()));
  EXPECT_LE(max_abs(back.Sigma_hat.kernel() - m.Sigma_hat.kernel()), 1e-15 * max_abs(m.Sigma_hat.kernel()));
  // Binary content can also be forced into a .json path and still load.
  save_model(m, dir / "forced.json", ModelFormat::Binary);
  expect_same_model(m, load_model(dir / "forced.json"));
}

TEST(ModelFiles, CorruptBinaryReportsOffset) {
  const FarModel m = sample_model(124);
  const std::string bytes = encode_model_binary(m);
  for (std::size_t cut : {std::size_t{2}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    try {
      decode_model_binary(bytes.substr(0, cut));
      ADD_FAILURE() << "truncation at " << cut << " not detected";
    } catch (const FormatError& e) {
      EXPECT_LE(e.offset(), cut);
    }
  }
  EXPECT_EQ(code_of([&] { decode_model_binary(bytes + "x"); }), ErrorCode::FormatError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of([&] { decode_model_binary(bad_magic); }), ErrorCode::FormatError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_EQ(code_of([&] { decode_model_binary(bad_version); }), ErrorCode::FormatError);
  EXPECT_EQ(code_of([] { decode_model_json("{\"format\": \"far-model\"}"); }), ErrorCode::FormatError);
}

TEST(TextOutput, FormatDoubleRoundTrips) {
  Rng rng = make_stream(125);
  for (int i = 0; i < 1000; ++i) {
    const double x = standard_normal(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(TextOutput, AtomicWriteAndCsv) {
  TempDir dir;
  CsvTable t{{"a", "b"}, {}};
  t.add_row({"1", "2"});
  EXPECT_EQ(t.to_string(), "a,b\n1,2\n");
  write_csv(dir / "t.csv", t);
  EXPECT_EQ(read_text(dir / "t.csv"), "a,b\n1,2\n");
  write_text_atomic(dir / "t.csv", "replaced\n");
  EXPECT_EQ(read_text(dir / "t.csv"), "replaced\n");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir.path())) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1u);
  write_text_atomic(dir / "nested" / "x.csv", "x");
  EXPECT_EQ(read_text(dir / "nested" / "x.csv"), "x");
  EXPECT_EQ(code_of([&] { write_text_atomic(dir / "t.csv" / "x.csv", "x"); }), ErrorCode::IoError);
}

TEST(TextOutput, DensityCsvRoundTrip) {
  TempDir dir;
  const Grid g = make_grid(-1.5, 2.5, 77);
  const GridFunction f = truncated_normal_density(g, 0.3, 0.7);
  write_density_csv(dir / "f.csv", f);
  EXPECT_EQ(first_line(dir / "f.csv"), "x,density");
  const GridFunction back = read_density_csv(dir / "f.csv");
  EXPECT_EQ(back.values(), f.values());
  EXPECT_EQ(back.grid()->a(), -1.5);
  EXPECT_EQ(back.grid()->b(), 2.5);
  write_file(dir / "bad.csv", "x,density\n0,1\n0.1,1\n0.5,1\n");
  EXPECT_NE(code_of([&] { read_density_csv(dir / "bad.csv"); }), ErrorCode::IoError);
}

TEST(Functionals, Descriptors) {
  const Grid g = make_grid(-2, 2, 128);
  const GridFunction f_bar = truncated_normal_density(g, 0.0, 0.5);
  EXPECT_EQ(parse_functional("moment:2", f_bar).values(), moment_functional(2, g).values());
  const double q05 = quantile(f_bar, 0.05);
  EXPECT_EQ(parse_functional("left", f_bar).values(), tail_indicator(g, TailRegion::left(q05)).values());
  EXPECT_EQ(parse_functional("right:1.2", f_bar).values(), tail_indicator(g, TailRegion::right(1.2)).values());
  EXPECT_EQ(parse_functional("tails:-1:1", f_bar).values(), tail_indicator(g, TailRegion::two_sided(-1, 1)).values());
  EXPECT_NEAR(inner(parse_functional("left", f_bar), f_bar), 0.05, 1e-3);
  EXPECT_EQ(code_of([&] { parse_functional("moment:0", f_bar); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { parse_functional("median", f_bar); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { parse_functional("left:5", f_bar); }), ErrorCode::ThresholdOutOfSupport);
}

TEST(Functionals, CountLists) {
  EXPECT_EQ(parse_count_list("1..8"), (std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(parse_count_list("1,2,4"), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(parse_count_list("1..3,6"), (std::vector<std::size_t>{1, 2, 3, 6}));
  EXPECT_EQ(code_of([] { parse_count_list("3..1"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_count_list("a"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_count_list(""); }), ErrorCode::InvalidArgument);
}

TEST(Config, Pipeline) {
  TempDir dir;
  fs::create_directories(dir / "data");
  write_file(dir / "data" / "panel.csv", "period,value\n1,0.5\n");
  const PipelineConfig c = parse_pipeline_config(R"({
    "input": "data/panel.csv",
    "grid": {"n": 128, "coverage": 0.99},
    "kernel": "normal",
    "K_candidates": "1..4",
    "analysis": {"features": 2, "irf": ["moment:2"], "kmax": 6},
    "bootstrap": {"B": 200, "alpha": 0.1, "seed": 3},
    "n_test": 10,
    "output_dir": "out"
  })",
                                                 dir.path());
  EXPECT_EQ(c.input, dir / "data/panel.csv");
  EXPECT_EQ(c.output_dir, dir / "out");
  EXPECT_EQ(c.grid.n, 128u);
  EXPECT_FALSE(c.grid.a.has_value());
  EXPECT_EQ(c.kernel, Kernel::Normal);
  EXPECT_EQ(c.K_candidates, (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(c.analysis.irf, std::vector<std::string>{"moment:2"});
  EXPECT_EQ(c.bootstrap.B, 200u);
  EXPECT_EQ(c.n_test, 10u);

  const fs::path base = dir.path();
  EXPECT_EQ(code_of([&] { parse_pipeline_config(R"({"input": "data/panel.csv", "grdi": {}})", base); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { parse_pipeline_config(R"({"grid": {}})", base); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { parse_pipeline_config(R"({"input": "data/panel.csv", "grid": {"n": -3}})", base); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { parse_pipeline_config(R"({"input": "missing.csv"})", base); }), ErrorCode::IoError);
  try {
    parse_pipeline_config("{\n  \"input\": \"x\",\n  oops\n}", base);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Config, Study) {
  const StudyConfig c = parse_study_config(R"({
    "T_values": [50, 100], "N_values": [100], "iterations": 3, "seed": 9, "burn_in": 100,
    "K": 4, "kernel": "normal",
    "generator": {"type": "synthetic", "grid_points": 64, "operator_coefficients": [0.5]}
  })",
                                           "/");
  EXPECT_EQ(c.T_values, (std::vector<std::size_t>{50, 100}));
  EXPECT_EQ(c.iterations, 3u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.burn_in, std::optional<std::size_t>(100));
  EXPECT_EQ(c.K, std::optional<std::size_t>(4));
  EXPECT_EQ(c.generator.grid->size(), 64u);
  EXPECT_FALSE(c.generator.residual_pool.size());
  EXPECT_TRUE(c.generator.noise_covariance.has_value());
  EXPECT_EQ(code_of([] { parse_study_config(R"({"T_values": [50]})", "/"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_study_config(R"({"generator": {"type": "magic"}})", "/"); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_study_config(R"({"generator": {"type": "model"}})", "/"); }),
            ErrorCode::InvalidArgument);
}

TEST(Config, StudyFromModelFile) {
  TempDir dir;
  const FarModel m = sample_model(126);
  save_model(m, dir / "gen.bin");
  write_file(dir / "study.json",
             R"({"T_values": [20], "N_values": [50], "generator": {"type": "model", "path": "gen.bin"}})");
  const StudyConfig c = load_study_config(dir / "study.json");
  EXPECT_EQ(c.generator.residual_pool.size(), m.residuals.size());
  EXPECT_EQ(c.generator.A.kernel(), m.A_hat.kernel());
}

TEST(Cli, UsageErrors) {
  const CliResult unknown = cli({"estimate", "--bogus"});
  EXPECT_EQ(unknown.code, kExitValidation);
  EXPECT_NE(unknown.err.find("estimate"), std::string::npos);
  EXPECT_NE(unknown.err.find("--input"), std::string::npos);
  EXPECT_EQ(cli({}).code, kExitValidation);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitValidation);
  EXPECT_EQ(cli({"estimate", "--input", "/nonexistent.csv", "--out", "m.bin"}).code, kExitValidation);
  const CliResult help = cli({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("backtest"), std::string::npos);
}

TEST(Cli, EstimateForecastAnalyze) {
  TempDir dir;
  write_panel_csv(dir / "panel.csv", 40, 400, 127);
  const std::string panel = (dir / "panel.csv").string();
  const std::string model = (dir / "model.bin").string();

  CliResult r = cli({"estimate", "--input", panel, "--grid-n", "128", "--K", "3", "--out", model});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(model));
  EXPECT_EQ(first_line(dir / "model_scree.csv"), "k,eigenvalue,share,cumulative_share");
  EXPECT_TRUE(fs::exists(dir / "model_scree.meta.json"));
  EXPECT_EQ(load_model(model).K, 3u);

  r = cli({"estimate", "--input", panel, "--grid-n", "96", "--a", "-5", "--b", "5", "--K-candidates", "1..4",
           "--out", (dir / "cv.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(load_model(dir / "cv.json").grid->a(), -5.0);

  r = cli({"forecast", "--model", model, "--functional", "moment:1", "--functional", "left", "--out",
           (dir / "fc.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(first_line(dir / "fc.csv"), "x,density");
  EXPECT_EQ(first_line(dir / "fc_intervals.csv"), "functional,center,lower,upper,level");
  r = cli({"forecast", "--model", model, "--input", panel, "--horizon", "3", "--out", (dir / "fc3.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(first_line(dir / "fc3.csv"), "x,step_1,step_2,step_3");

  r = cli({"analyze", "features", "--model", model, "--m", "2", "--out", (dir / "features.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(first_line(dir / "features.csv"), "x,progressive_1,progressive_2,regressive_1,regressive_2");
  r = cli({"analyze", "irf", "--model", model, "--functional", "moment:2", "--bootstrap", "100", "--seed", "4",
           "--out", (dir / "irf.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(first_line(dir / "irf.csv").find("_lower"), std::string::npos);
  r = cli({"analyze", "vardecomp", "--model", model, "--functional", "moment:2", "--kmax", "3", "--out",
           (dir / "vd.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = cli({"analyze", "tails", "--model", model, "--out", (dir / "tails.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = cli({"analyze", "vardecomp", "--model", model, "--functional", "moment:2", "--kmax", "11", "--out",
           (dir / "vd11.csv").string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_FALSE(fs::exists(dir / "vd11.csv"));
}

TEST(Cli, RuntimeFailureExitsTwo) {
  TempDir dir;
  write_panel_csv(dir / "panel.csv", 12, 300, 128);
  const CliResult r = cli({"estimate", "--input", (dir / "panel.csv").string(), "--grid-n", "64", "--K", "12",
                           "--out", (dir / "m.bin").string()});
  EXPECT_EQ(r.code, kExitRuntime) << r.err;
  EXPECT_NE(r.err.find("RankDeficient"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "m.bin"));
}

TEST(Cli, InvalidInputLeavesNoOutput) {
  TempDir dir;
  write_file(dir / "bad.csv", "period,value\n1,0.5\n1,zz\n");
  const CliResult r = cli({"estimate", "--input", (dir / "bad.csv").string(), "--out", (dir / "m.bin").string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "m.bin"));
  EXPECT_FALSE(fs::exists(dir / "m_scree.csv"));
}

TEST(Cli, SampleCommand) {
  TempDir dir;
  const Grid g = make_grid(0, 2, 129);
  write_density_csv(dir / "tri.csv", GridFunction::sample(g, [](double x) { return triangular_pdf(x, 0, 2); }));
  const CliResult r = cli({"sample", "--density", (dir / "tri.csv").string(), "--n", "5000", "--seed", "3", "--out",
                           (dir / "draws.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream f(dir / "draws.csv");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "value");
  std::vector<double> x;
  while (std::getline(f, line)) x.push_back(std::stod(line));
  EXPECT_EQ(x.size(), 5000u);
  EXPECT_LT(ks_statistic(x, [](double v) { return triangular_cdf(v, 0, 2); }), 0.03);
}

TEST(Cli, BacktestAndSimulateAreByteIdentical) {
  TempDir dir;
  write_panel_csv(dir / "panel.csv", 40, 300, 129);
  const std::string panel = (dir / "panel.csv").string();
  for (const char* name : {"a", "b"}) {
    const CliResult r = cli({"backtest", "--input", panel, "--grid-n", "64", "--n-test", "5", "--K-candidates",
                             "1..3", "--out", (dir / (std::string("bt_") + name + ".csv")).string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  EXPECT_EQ(first_line(dir / "bt_a.csv"), "predictor,measure,mean,median");
  EXPECT_EQ(read_text(dir / "bt_a.csv"), read_text(dir / "bt_b.csv"));
  EXPECT_EQ(read_text(dir / "bt_a_periods.csv"), read_text(dir / "bt_b_periods.csv"));

  write_file(dir / "study.json", R"({"T_values": [20], "N_values": [50, 100], "iterations": 3, "seed": 5,
    "burn_in": 50, "K_candidates": "1..3", "generator": {"grid_points": 48}})");
  for (const char* name : {"a", "b"}) {
    const CliResult r = cli({"simulate", "--config", (dir / "study.json").string(), "--out",
                             (dir / (std::string("sim_") + name + ".csv")).string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  EXPECT_EQ(read_text(dir / "sim_a.csv"), read_text(dir / "sim_b.csv"));
  EXPECT_EQ(read_text(dir / "sim_a.meta.json"), read_text(dir / "sim_b.meta.json"));
  EXPECT_EQ(first_line(dir / "sim_a.csv").substr(0, 24), "T,measure,N50_FAR_mean,N");
}

TEST(Cli, PipelineRun) {
  TempDir dir;
  write_panel_csv(dir / "panel.csv", 40, 300, 130);
  write_file(dir / "run.json", R"({"input": "panel.csv", "grid": {"n": 64}, "K": 2,
    "analysis": {"features": 2, "irf": ["moment:2"], "vardecomp": ["moment:2"], "kmax": 4, "tails": ["left"]},
    "n_test": 5, "K_candidates": "1..3", "output_dir": "out"})");
  fs::create_directories(dir / "out");
  const CliResult r = cli({"run", "--config", (dir / "run.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"model.bin", "scree.csv", "features.csv", "irf.csv", "vardecomp.csv", "tails.csv",
                        "backtest.csv", "backtest_periods.csv"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
}
