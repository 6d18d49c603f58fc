#include "far/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "far/bootstrap.hpp"
#include "far/dynamics_analysis.hpp"
#include "far/forecasting.hpp"
#include "far/io.hpp"
#include "far/simulation.hpp"

namespace far {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- shared helpers ---------------------------------------------------------

fs::path sidecar_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".meta.json");
  return p;
}

void write_sidecar(const fs::path& out, const json& meta) {
  write_text_atomic(sidecar_path(out), meta.dump(2) + "\n");
}

json grid_json(const Grid& grid) { return {{"a", grid->a()}, {"b", grid->b()}, {"n", grid->size()}}; }

json model_json(const FarModel& model) {
  return {{"K", model.K}, {"T", model.sample_size}, {"grid", grid_json(model.grid)}};
}

struct PanelOptions {
  std::string input;
  std::optional<double> a;
  std::optional<double> b;
  std::size_t n = GridSpec::kDefaultPoints;
  double coverage = 0.999;
  std::string kernel = "epanechnikov";
};

void add_panel_options(CLI::App* cmd, PanelOptions& o) {
  cmd->add_option("--input", o.input, "observations CSV (period,value)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--grid-n", o.n, "grid points (>= 16)")->capture_default_str();
  cmd->add_option("--a", o.a, "support lower end (default: chosen from data)");
  cmd->add_option("--b", o.b, "support upper end (default: chosen from data)");
  cmd->add_option("--coverage", o.coverage, "pooled coverage for automatic support")->capture_default_str();
  cmd->add_option("--kernel", o.kernel, "epanechnikov or normal")->capture_default_str();
}

DensityPanel build_panel(const RawPanel& raw, const GridSettings& settings, Kernel kernel) {
  require(settings.a.has_value() == settings.b.has_value(), ErrorCode::InvalidArgument,
          "give both --a and --b, or neither");
  const Support s = settings.a ? Support{*settings.a, *settings.b} : select_support(raw, settings.coverage, kernel);
  return estimate_panel(raw, make_grid(s.a, s.b, settings.n), kernel);
}

DensityPanel build_panel(const PanelOptions& o) {
  const Kernel kernel = parse_kernel(o.kernel);
  GridSettings settings{o.a, o.b, o.n, o.coverage};
  require(settings.n >= GridSpec::kMinPoints, ErrorCode::GridTooSmall, "--grid-n must be at least 16");
  require(o.coverage > 0.5 && o.coverage < 1.0, ErrorCode::InvalidArgument, "--coverage must lie in (0.5,1)");
  return build_panel(read_observations(o.input), settings, kernel);
}

std::size_t choose_K(const DensityPanel& panel, std::optional<std::size_t> K, const std::vector<std::size_t>& candidates,
                     std::size_t n_validation) {
  if (K) {
    require(*K >= 1, ErrorCode::InvalidArgument, "K must be at least 1");
    return *K;
  }
  return select_K_cv(panel, candidates, n_validation);
}

std::string curve_name(const std::string& descriptor) {
  std::string s = descriptor;
  for (char& c : s)
    if (c == ':' || c == '.' || c == '-') c = '_';
  return s;
}

// --- estimate ---------------------------------------------------------------

CsvTable scree_table(const FarModel& model) {
  CsvTable t{{"k", "eigenvalue", "share", "cumulative_share"}, {}};
  const Eigen::VectorXd& lambda = model.eigen.eigenvalues();
  const double total = lambda.sum();
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    cumulative += lambda[k];
    t.add_row({std::to_string(k + 1), format_double(lambda[k]), format_double(total > 0 ? lambda[k] / total : 0.0),
               format_double(total > 0 ? cumulative / total : 0.0)});
  }
  return t;
}

void write_estimate(const FarModel& model, const DensityPanel& panel, const fs::path& out, const fs::path& scree,
                    const std::string& kernel) {
  save_model(model, out);
  write_csv(scree, scree_table(model));
  json meta = model_json(model);
  meta["kernel"] = kernel;
  meta["periods"] = panel.labels;
  meta["model_file"] = out.filename().string();
  meta["model_format"] = model_format_for(out) == ModelFormat::Json ? "json" : "binary";
  write_sidecar(scree, meta);
}

// --- analyze ----------------------------------------------------------------

struct BootstrapOptions {
  std::size_t B = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

void add_bootstrap_options(CLI::App* cmd, BootstrapOptions& o) {
  cmd->add_option("--bootstrap", o.B, "residual bootstrap replications (>= 100; 0 = off)");
  cmd->add_option("--alpha", o.alpha, "band level")->capture_default_str();
  cmd->add_option("--seed", o.seed, "bootstrap seed")->capture_default_str();
}

json band_json(const BandResult& band) {
  return {{"statistic", band.statistic}, {"B", band.replications}, {"alpha", band.alpha},
          {"seed", band.seed},           {"dropped", band.dropped}};
}

// Appends point (and band) columns for one curve statistic.
void add_curve_columns(CsvTable& table, const std::string& name, const Eigen::VectorXd& point,
                       const std::optional<BandResult>& band) {
  table.header.push_back(band ? name + "_point" : name);
  if (band) {
    table.header.push_back(name + "_lower");
    table.header.push_back(name + "_upper");
  }
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    auto& row = table.rows[static_cast<std::size_t>(i)];
    row.push_back(format_double(point[i]));
    if (band) {
      row.push_back(format_double(band->lower[i]));
      row.push_back(format_double(band->upper[i]));
    }
  }
}

CsvTable abscissa_table(const Grid& grid) {
  CsvTable t{{"x"}, {}};
  for (Eigen::Index i = 0; i < grid->points().size(); ++i) t.add_row({format_double(grid->points()[i])});
  return t;
}

std::optional<BandResult> maybe_band(const FarModel& model, const Statistic& stat, const BootstrapOptions& b) {
  if (b.B == 0) return std::nullopt;
  return residual_bootstrap(model, stat, b.B, b.alpha, b.seed);
}

void analyze_features(const FarModel& model, std::size_t m, const fs::path& out) {
  const FeatureSet f = leading_features(model.A_hat, m);
  CsvTable t = abscissa_table(model.grid);
  for (std::size_t k = 0; k < f.progressive.size(); ++k)
    add_curve_columns(t, "progressive_" + std::to_string(k + 1), f.progressive[k].values(), std::nullopt);
  for (std::size_t k = 0; k < f.regressive.size(); ++k)
    add_curve_columns(t, "regressive_" + std::to_string(k + 1), f.regressive[k].values(), std::nullopt);
  write_csv(out, t);
  json meta = model_json(model);
  meta["features"] = m;
  meta["strengths"] = std::vector<double>(f.strengths.data(), f.strengths.data() + f.strengths.size());
  write_sidecar(out, meta);
}

void analyze_irf(const FarModel& model, const std::vector<std::string>& functionals, const BootstrapOptions& b,
                 const fs::path& out) {
  CsvTable t = abscissa_table(model.grid);
  json meta = model_json(model);
  meta["functionals"] = functionals;
  json bands = json::array();
  for (const auto& d : functionals) {
    const GridFunction v = parse_functional(d, model.mean_density);
    const auto band = maybe_band(model, statistics::impulse_response(v, "irf:" + d), b);
    add_curve_columns(t, curve_name(d), impulse_response(model.A_hat, v).values(), band);
    if (band) bands.push_back(band_json(*band));
  }
  if (!bands.empty()) meta["bootstrap"] = bands;
  write_csv(out, t);
  write_sidecar(out, meta);
}

void analyze_vardecomp(const FarModel& model, const std::vector<std::string>& functionals, std::size_t kmax,
                       const BootstrapOptions& b, const fs::path& out) {
  const MomentBasis basis = moment_basis(model.Q_hat, model.grid, kmax);
  CsvTable t{{"k"}, {}};
  for (std::size_t k = 1; k <= kmax; ++k) t.add_row({std::to_string(k)});
  json meta = model_json(model);
  meta["kmax"] = kmax;
  meta["functionals"] = json::array();
  for (const auto& d : functionals) {
    const GridFunction v = parse_functional(d, model.mean_density);
    const DecompositionReport rep = variance_decomposition(v, model.A_hat, model.Q_hat, basis, model.Sigma_hat);
    const auto band = maybe_band(model, statistics::variance_decomposition(v, kmax, "vardecomp:" + d), b);
    add_curve_columns(t, curve_name(d), rep.pi, band);
    json entry = {{"functional", d},
                  {"pi_sum", rep.pi.sum()},
                  {"r_squared", rep.r2->value},
                  {"r_squared_raw", rep.r2->raw}};
    if (band) entry["bootstrap"] = band_json(*band);
    meta["functionals"].push_back(entry);
  }
  write_csv(out, t);
  write_sidecar(out, meta);
}

void analyze_tails(const FarModel& model, std::vector<std::string> regions, const BootstrapOptions& b,
                   const fs::path& out) {
  if (regions.empty()) regions = {"left", "right"};
  CsvTable t = abscissa_table(model.grid);
  json meta = model_json(model);
  meta["regions"] = json::array();
  for (const auto& d : regions) {
    const GridFunction v = parse_functional(d, model.mean_density);
    require(d.rfind("moment", 0) != 0, ErrorCode::InvalidArgument, "tails expects left, right or tails regions");
    const auto band = maybe_band(model, statistics::impulse_response(v, "tail_irf:" + d), b);
    add_curve_columns(t, curve_name(d), impulse_response(model.A_hat, v).values(), band);
    const RSquared r2 = r_squared(v, model.Q_hat, model.Sigma_hat);
    json entry = {{"region", d},
                  {"probability_under_mean", inner(v, model.mean_density)},
                  {"r_squared", r2.value},
                  {"r_squared_raw", r2.raw}};
    if (band) entry["bootstrap"] = band_json(*band);
    meta["regions"].push_back(entry);
  }
  write_csv(out, t);
  write_sidecar(out, meta);
}

// --- backtest / simulate ----------------------------------------------------

// Power of ten that brings the largest mean of a measure into [1,10).
int display_exponent(const ErrorSummary& s, std::size_t m) {
  double largest = 0.0;
  for (std::size_t p = 0; p < 3; ++p) largest = std::max(largest, std::abs(s.table[p][m].mean));
  return largest > 0.0 && std::isfinite(largest) ? static_cast<int>(std::floor(std::log10(largest))) : 0;
}

void write_backtest(const BacktestReport& report, const DensityPanel& panel, std::size_t n_test,
                    const std::vector<std::size_t>& candidates, std::size_t n_validation, const fs::path& out,
                    const fs::path& periods_out) {
  CsvTable summary{{"predictor", "measure", "mean", "median"}, {}};
  for (Predictor p : kPredictors)
    for (std::size_t m = 0; m < ErrorReport::kCount; ++m) {
      const MeasureSummary& s = report.summary.at(p, m);
      summary.add_row({to_string(p), ErrorReport::names()[m], format_double(s.mean), format_double(s.median)});
    }

  CsvTable periods{{"period", "K"}, {}};
  for (Predictor p : kPredictors)
    for (const char* name : ErrorReport::names()) periods.header.push_back(std::string(to_string(p)) + "_" + name);
  for (const auto& period : report.periods) {
    std::vector<std::string> row{period.label, std::to_string(period.selected_K)};
    for (std::size_t p = 0; p < 3; ++p)
      for (double v : period.errors[p].values()) row.push_back(format_double(v));
    periods.add_row(std::move(row));
  }

  json scale = json::object();
  for (std::size_t m = 0; m < ErrorReport::kCount; ++m)
    scale[ErrorReport::names()[m]] = display_exponent(report.summary, m);
  const json meta = {{"n_test", n_test},
                     {"n_validation", n_validation},
                     {"K_candidates", candidates},
                     {"T", panel.size()},
                     {"grid", grid_json(panel.grid)},
                     {"units", "raw values; display_exponent e suggests showing value / 10^e"},
                     {"display_exponent", scale},
                     {"periods_file", periods_out.filename().string()}};
  write_csv(out, summary);
  write_csv(periods_out, periods);
  write_sidecar(out, meta);
}

// Rows T x measure; per N and predictor a mean column paired with a median column.
CsvTable study_table(const StudyConfig& config, const StudyResult& result) {
  CsvTable t{{"T", "measure"}, {}};
  for (std::size_t N : config.N_values)
    for (Predictor p : kPredictors) {
      const std::string base = "N" + std::to_string(N) + "_" + to_string(p);
      t.header.push_back(base + "_mean");
      t.header.push_back(base + "_median");
    }
  for (std::size_t T : config.T_values)
    for (std::size_t m = 0; m < ErrorReport::kCount; ++m) {
      std::vector<std::string> row{std::to_string(T), ErrorReport::names()[m]};
      for (std::size_t N : config.N_values) {
        const StudyCell& cell = result.cell(T, N);
        for (Predictor p : kPredictors) {
          row.push_back(format_double(cell.summary.at(p, m).mean));
          row.push_back(format_double(cell.summary.at(p, m).median));
        }
      }
      t.add_row(std::move(row));
    }
  return t;
}

json study_meta(const StudyConfig& config, const StudyResult& result) {
  json cells = json::array();
  for (const auto& c : result.cells) {
    json se = json::object();
    for (Predictor p : kPredictors) {
      json per = json::object();
      for (std::size_t m = 0; m < ErrorReport::kCount; ++m)
        per[ErrorReport::names()[m]] = c.std_error[static_cast<std::size_t>(p)][m];
      se[to_string(p)] = per;
    }
    cells.push_back({{"T", c.T}, {"N", c.N}, {"iterations", c.iterations}, {"dropped", c.dropped}, {"std_error", se}});
  }
  json meta = {{"seed", config.seed},
               {"iterations", config.iterations},
               {"kernel", to_string(config.kernel)},
               {"grid", grid_json(config.generator.grid)},
               {"cells", cells}};
  if (config.K)
    meta["K"] = *config.K;
  else
    meta["K_candidates"] = config.K_candidates;
  if (config.burn_in) meta["burn_in"] = *config.burn_in;
  return meta;
}

// --- pipeline ---------------------------------------------------------------

void run_pipeline(const PipelineConfig& c, std::ostream& out) {
  const RawPanel raw = read_observations(c.input);
  const DensityPanel panel = build_panel(raw, c.grid, c.kernel);
  const std::size_t K = choose_K(panel, c.K, c.K_candidates, c.n_validation);
  const FarModel model = fit(panel, K);
  const fs::path dir = c.output_dir;
  write_estimate(model, panel, dir / "model.bin", dir / "scree.csv", to_string(c.kernel));

  const BootstrapOptions b{c.bootstrap.B, c.bootstrap.alpha, c.bootstrap.seed};
  if (c.analysis.features > 0) analyze_features(model, c.analysis.features, dir / "features.csv");
  if (!c.analysis.irf.empty()) analyze_irf(model, c.analysis.irf, b, dir / "irf.csv");
  if (!c.analysis.vardecomp.empty())
    analyze_vardecomp(model, c.analysis.vardecomp, c.analysis.kmax, b, dir / "vardecomp.csv");
  if (!c.analysis.tails.empty()) analyze_tails(model, c.analysis.tails, b, dir / "tails.csv");
  if (c.n_test > 0) {
    const BacktestReport report = rolling_backtest(panel, c.n_test, c.K_candidates, c.n_validation);
    write_backtest(report, panel, c.n_test, c.K_candidates, c.n_validation, dir / "backtest.csv",
                   dir / "backtest_periods.csv");
  }
  out << "K = " << K << ", T = " << panel.size() << "; outputs in " << dir.string() << "\n";
}

// --- dispatch ---------------------------------------------------------------

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int run(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Functional autoregression of density time series", "far"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every command");

  // estimate
  PanelOptions est_panel;
  std::optional<std::size_t> est_K;
  std::string est_candidates = "1..8";
  std::size_t est_nval = 5;
  std::string est_out;
  std::string est_scree;
  auto* estimate = app.add_subcommand("estimate", "estimate a model from an observation panel");
  add_panel_options(estimate, est_panel);
  estimate->add_option("--K", est_K, "truncation (default: cross-validated)");
  estimate->add_option("--K-candidates", est_candidates, "candidates for cross-validation, e.g. 1..8")
      ->capture_default_str();
  estimate->add_option("--n-validation", est_nval, "validation periods for K selection")->capture_default_str();
  estimate->add_option("--out", est_out, "model file (.json for text, anything else binary)")->required();
  estimate->add_option("--scree", est_scree, "scree CSV (default: next to the model)");

  // forecast
  std::string fc_model;
  std::string fc_input;
  std::string fc_kernel = "epanechnikov";
  std::size_t fc_h = 1;
  std::vector<std::string> fc_functionals = {"moment:1", "moment:2"};
  double fc_alpha = 0.05;
  std::string fc_out;
  std::string fc_intervals;
  auto* forecast = app.add_subcommand("forecast", "density forecast and feature intervals");
  forecast->add_option("--model", fc_model, "model file")->required()->check(CLI::ExistingFile);
  forecast->add_option("--input", fc_input, "observations whose last period is the forecast origin")
      ->check(CLI::ExistingFile);
  forecast->add_option("--kernel", fc_kernel, "kernel used for --input")->capture_default_str();
  forecast->add_option("--horizon", fc_h, "forecast steps")->capture_default_str();
  forecast->add_option("--functional", fc_functionals, "functionals for intervals")->capture_default_str();
  forecast->add_option("--alpha", fc_alpha, "interval level")->capture_default_str();
  forecast->add_option("--out", fc_out, "density forecast CSV")->required();
  forecast->add_option("--intervals", fc_intervals, "interval CSV (default: next to --out)");

  // analyze
  std::string an_model;
  std::string an_out;
  std::size_t an_m = 3;
  std::size_t an_kmax = kDefaultMomentCount;
  std::vector<std::string> an_functionals;
  BootstrapOptions an_boot;
  auto* analyze = app.add_subcommand("analyze", "dynamics analysis of a fitted model");
  analyze->require_subcommand(1);
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--model", an_model, "model file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", an_out, "output CSV")->required();
  };
  auto* features = analyze->add_subcommand("features", "leading progressive and regressive features");
  add_common(features);
  features->add_option("--m", an_m, "number of features")->capture_default_str();
  auto* irf = analyze->add_subcommand("irf", "impulse responses of functionals");
  add_common(irf);
  irf->add_option("--functional", an_functionals, "moment:p, left[:tau], right[:tau], tails[:lo:hi]")->required();
  add_bootstrap_options(irf, an_boot);
  auto* vardecomp = analyze->add_subcommand("vardecomp", "variance decomposition over lagged moments");
  add_common(vardecomp);
  vardecomp->add_option("--functional", an_functionals, "functionals to decompose")->required();
  vardecomp->add_option("--kmax", an_kmax, "number of moments (<= 10)")->capture_default_str();
  add_bootstrap_options(vardecomp, an_boot);
  auto* tails = analyze->add_subcommand("tails", "tail-probability impulse responses");
  add_common(tails);
  tails->add_option("--region", an_functionals, "left[:tau], right[:tau], tails[:lo:hi] (default: left right)");
  add_bootstrap_options(tails, an_boot);

  // backtest
  PanelOptions bt_panel;
  std::size_t bt_ntest = 0;
  std::string bt_candidates = "1..8";
  std::size_t bt_nval = 5;
  std::string bt_out;
  std::string bt_periods;
  auto* backtest = app.add_subcommand("backtest", "rolling out-of-sample comparison of FAR, AVE and LAST");
  add_panel_options(backtest, bt_panel);
  backtest->add_option("--n-test", bt_ntest, "test periods at the end of the panel")->required();
  backtest->add_option("--K-candidates", bt_candidates, "candidates, e.g. 1..8")->capture_default_str();
  backtest->add_option("--n-validation", bt_nval, "validation periods for K selection")->capture_default_str();
  backtest->add_option("--out", bt_out, "summary CSV")->required();
  backtest->add_option("--periods-out", bt_periods, "per-period CSV (default: next to --out)");

  // simulate
  std::string sim_config;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_iterations;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo forecasting study");
  simulate->add_option("--config", sim_config, "study config (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim_seed, "override the config seed");
  simulate->add_option("--iterations", sim_iterations, "override the config iteration count");
  simulate->add_option("--out", sim_out, "result table CSV")->required();

  // sample
  std::string smp_density;
  std::size_t smp_n = 0;
  std::uint64_t smp_seed = 0;
  std::string smp_out;
  auto* sample = app.add_subcommand("sample", "draw observations from a density on a grid");
  sample->add_option("--density", smp_density, "density CSV (x,density)")->required()->check(CLI::ExistingFile);
  sample->add_option("--n", smp_n, "number of draws")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", smp_seed, "random seed")->required();
  sample->add_option("--out", smp_out, "draws CSV")->required();

  // run
  std::string run_config;
  auto* pipeline = app.add_subcommand("run", "end-to-end pipeline from a config file");
  pipeline->add_option("--config", run_config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what() + std::string("\n\n") + app.help("", CLI::AppFormatMode::All));
  }

  if (estimate->parsed()) {
    const DensityPanel panel = build_panel(est_panel);
    const std::size_t K = choose_K(panel, est_K, parse_count_list(est_candidates), est_nval);
    const FarModel model = fit(panel, K);
    fs::path scree = est_scree;
    if (scree.empty()) scree = fs::path(est_out).replace_extension("").string() + "_scree.csv";
    write_estimate(model, panel, est_out, scree, est_panel.kernel);
    out << "estimated K = " << K << " on T = " << panel.size() << " periods\n";
  } else if (forecast->parsed()) {
    const FarModel model = load_model(fc_model);
    GridFunction w_T = model.last_state;
    if (!fc_input.empty()) {
      const RawPanel raw = read_observations(fc_input);
      const DensityPanel panel = estimate_panel(raw, model.grid, parse_kernel(fc_kernel));
      w_T = project_zero_integral(panel.densities.back() - model.mean_density);
    }
    const std::vector<GridFunction> path = forecast_h_steps(model, w_T, fc_h);
    CsvTable dens = abscissa_table(model.grid);
    for (std::size_t s = 0; s < path.size(); ++s)
      add_curve_columns(dens, fc_h == 1 ? "density" : "step_" + std::to_string(s + 1),
                        to_density(path[s], model.mean_density).values(), std::nullopt);
    CsvTable iv{{"functional", "center", "lower", "upper", "level"}, {}};
    for (const auto& d : fc_functionals) {
      const GridFunction v = parse_functional(d, model.mean_density);
      const FeatureInterval fi = feature_interval(model, v, path.front(), fc_alpha);
      iv.add_row({d, format_double(fi.center), format_double(fi.lower()), format_double(fi.upper()),
                  format_double(inner(v, model.mean_density) + fi.center)});
    }
    fs::path intervals = fc_intervals;
    if (intervals.empty()) intervals = fs::path(fc_out).replace_extension("").string() + "_intervals.csv";
    write_csv(fc_out, dens);
    write_csv(intervals, iv);
    json meta = model_json(model);
    meta["horizon"] = fc_h;
    meta["alpha"] = fc_alpha;
    meta["origin"] = fc_input.empty() ? "model" : "input";
    meta["intervals_file"] = intervals.filename().string();
    write_sidecar(fc_out, meta);
  } else if (analyze->parsed()) {
    require(an_boot.B == 0 || an_boot.B >= 100, ErrorCode::InvalidArgument, "--bootstrap needs at least 100");
    require(an_boot.alpha > 0.0 && an_boot.alpha < 1.0, ErrorCode::InvalidArgument, "--alpha must lie in (0,1)");
    require(an_kmax >= 1 && an_kmax <= kDefaultMomentCount, ErrorCode::InvalidArgument, "--kmax must lie in 1..10");
    const FarModel model = load_model(an_model);
    if (features->parsed()) analyze_features(model, an_m, an_out);
    if (irf->parsed()) analyze_irf(model, an_functionals, an_boot, an_out);
    if (vardecomp->parsed()) analyze_vardecomp(model, an_functionals, an_kmax, an_boot, an_out);
    if (tails->parsed()) analyze_tails(model, an_functionals, an_boot, an_out);
  } else if (backtest->parsed()) {
    const std::vector<std::size_t> candidates = parse_count_list(bt_candidates);
    const DensityPanel panel = build_panel(bt_panel);
    const BacktestReport report = rolling_backtest(panel, bt_ntest, candidates, bt_nval);
    fs::path periods = bt_periods;
    if (periods.empty()) periods = fs::path(bt_out).replace_extension("").string() + "_periods.csv";
    write_backtest(report, panel, bt_ntest, candidates, bt_nval, bt_out, periods);
  } else if (simulate->parsed()) {
    StudyConfig config = load_study_config(sim_config);
    if (sim_seed) config.seed = *sim_seed;
    if (sim_iterations) config.iterations = *sim_iterations;
    const StudyResult result = run_study(config);
    write_csv(sim_out, study_table(config, result));
    write_sidecar(sim_out, study_meta(config, result));
  } else if (sample->parsed()) {
    const std::vector<double> draws = acceptance_sample(read_density_csv(smp_density), smp_n, smp_seed);
    CsvTable t{{"value"}, {}};
    for (double x : draws) t.add_row({format_double(x)});
    write_csv(smp_out, t);
  } else if (pipeline->parsed()) {
    run_pipeline(load_pipeline_config(run_config), out);
  }
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(args, out);
  } catch (const UsageError& e) {
    err << e.what();
    return kExitValidation;
  } catch (const Error& e) {
    err << "far: " << e.what() << "\n";
    if (is_validation_error(e.code())) {
      err << "run 'far --help-all' for the command and file schemas\n";
      return kExitValidation;
    }
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "far: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cli_dispatch(int argc, const char* const* argv) {
  return cli_dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace far
