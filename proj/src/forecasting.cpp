#include "far/forecasting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "far/parallel.hpp"

namespace far {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  if (n == 0) return kNaN;
  std::sort(values.begin(), values.end());
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void check_density(const GridFunction& f, const char* what) {
  require(f.values().minCoeff() >= -1e-12, ErrorCode::NegativeDensity,
          std::string(what) + " has negative values");
}

}  // namespace

GridFunction forecast_one_step(const FarModel& model, const GridFunction& w_T) {
  return project_zero_integral(apply_operator(model.A_hat, w_T));
}

std::vector<GridFunction> forecast_h_steps(const FarModel& model, const GridFunction& w_T, std::size_t h) {
  require(h >= 1, ErrorCode::InvalidArgument, "forecast horizon must be at least 1");
  std::vector<GridFunction> path;
  path.reserve(h);
  path.push_back(forecast_one_step(model, w_T));
  for (std::size_t step = 1; step < h; ++step) path.push_back(forecast_one_step(model, path.back()));
  return path;
}

GridFunction to_density(const GridFunction& w_forecast, const GridFunction& f_bar) {
  check_same_grid(w_forecast.grid(), f_bar.grid());
  Eigen::VectorXd clipped = (f_bar.values() + w_forecast.values()).cwiseMax(0.0);
  const double mass = f_bar.grid()->weights().dot(clipped);
  require(mass > 1e-12, ErrorCode::DegenerateForecast, "forecast has no positive mass after clipping");
  return GridFunction(f_bar.grid(), clipped / mass);
}

double normal_critical_value(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - 0.5 * alpha);
}

FeatureInterval feature_interval(const FarModel& model, const GridFunction& v, const GridFunction& w_forecast,
                                 double alpha) {
  const double z = normal_critical_value(alpha);
  double var = quadratic_form(v, model.Sigma_hat, v);
  if (var < 0.0) {
    require(var >= -1e-12 * std::abs(trace(model.Sigma_hat)) * inner(v, v), ErrorCode::ZeroVariance,
            "noise covariance gives a negative variance for this functional");
    var = 0.0;
  }
  const double inflation = 1.0 + static_cast<double>(model.K) / static_cast<double>(model.sample_size);
  return FeatureInterval{inner(v, w_forecast), z * std::sqrt(inflation * var)};
}

const std::array<const char*, ErrorReport::kCount>& ErrorReport::names() {
  static const std::array<const char*, kCount> kNames = {"D2", "D1", "Dks", "Dcm", "Dm", "Dv"};
  return kNames;
}

double density_mean(const GridFunction& f) {
  return f.grid()->weights().dot(f.grid()->points().cwiseProduct(f.values()));
}

double density_variance(const GridFunction& f) {
  const double mean = density_mean(f);
  const Eigen::ArrayXd centered = f.grid()->points().array() - mean;
  return (f.grid()->weights().array() * centered.square() * f.values().array()).sum();
}

ErrorReport error_metrics(const GridFunction& f_hat, const GridFunction& f_true) {
  check_same_grid(f_hat.grid(), f_true.grid());
  check_density(f_hat, "forecast density");
  check_density(f_true, "realized density");
  const Eigen::VectorXd& w = f_hat.grid()->weights();
  const Eigen::ArrayXd diff = f_hat.values().array() - f_true.values().array();

  const Eigen::ArrayXd cdf_gap =
      cdf_from_density(f_hat).values().array() - cdf_from_density(f_true).values().array();

  ErrorReport r;
  r.d2 = std::sqrt((w.array() * diff.square()).sum());
  r.d1 = (w.array() * diff.abs()).sum();
  r.dks = cdf_gap.abs().maxCoeff();
  r.dcm = (w.array() * cdf_gap.square() * f_true.values().array()).sum();
  r.dm = std::abs(density_mean(f_hat) - density_mean(f_true));
  r.dv = std::abs(density_variance(f_hat) - density_variance(f_true));
  return r;
}

GridFunction predictor_ave(const DensityPanel& panel) { return mean_density(panel); }

GridFunction predictor_last(const DensityPanel& panel) {
  require(!panel.densities.empty(), ErrorCode::EmptyPanel, "LAST predictor needs at least one period");
  return panel.densities.back();
}

std::vector<double> cv_scores(const DensityPanel& panel, const std::vector<std::size_t>& candidates,
                              std::size_t n_validation) {
  const std::size_t T = panel.size();
  require(!candidates.empty(), ErrorCode::InvalidArgument, "no K candidates given");
  for (std::size_t K : candidates) require(K >= 1, ErrorCode::InvalidArgument, "K candidates must be >= 1");
  require(n_validation >= 1, ErrorCode::InvalidArgument, "need at least one validation period");
  require(T > n_validation + 5, ErrorCode::TooFewPeriods,
          "cross-validation needs more than " + std::to_string(n_validation + 5) + " periods, got " +
              std::to_string(T));

  // scores[v][c]: D2 of candidate c on validation period v (NaN if infeasible).
  std::vector<std::vector<double>> scores(n_validation, std::vector<double>(candidates.size(), kNaN));
  parallel_for(n_validation, [&](std::size_t v) {
    const std::size_t s = T - n_validation + v;
    const std::vector<GridFunction> train(panel.densities.begin(),
                                          panel.densities.begin() + static_cast<std::ptrdiff_t>(s));
    const PanelDecomposition dec(train);
    const GridFunction last = dec.state(s - 1);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (candidates[c] > dec.usable_rank()) continue;
      try {
        const GridFunction w_next = project_zero_integral(dec.apply_autoregressive(candidates[c], last));
        scores[v][c] = error_metrics(to_density(w_next, dec.mean()), panel.densities[s]).d2;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateForecast && e.code() != ErrorCode::RankDeficient) throw;
      }
    }
  });

  std::vector<double> mean_score(candidates.size(), 0.0);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (std::size_t v = 0; v < n_validation; ++v) mean_score[c] += scores[v][c];
    mean_score[c] /= static_cast<double>(n_validation);  // NaN propagates
  }
  return mean_score;
}

std::size_t select_K_cv(const DensityPanel& panel, const std::vector<std::size_t>& candidates,
                        std::size_t n_validation) {
  const std::vector<double> scores = cv_scores(panel, candidates, n_validation);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return candidates[l] < candidates[r]; });
  std::size_t best = candidates.size();
  for (std::size_t c : order) {
    if (std::isnan(scores[c])) continue;
    if (best == candidates.size() || scores[c] < scores[best]) best = c;
  }
  require(best < candidates.size(), ErrorCode::NoFeasibleK, "every K candidate is infeasible for this panel");
  return candidates[best];
}

const char* to_string(Predictor p) {
  switch (p) {
    case Predictor::Far: return "FAR";
    case Predictor::Ave: return "AVE";
    case Predictor::Last: return "LAST";
  }
  return "?";
}

ErrorSummary summarize(const std::vector<std::array<ErrorReport, 3>>& rows) {
  ErrorSummary summary;
  summary.count = rows.size();
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t m = 0; m < ErrorReport::kCount; ++m) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (const auto& row : rows) values.push_back(row[p].values()[m]);
      const double mean = values.empty() ? kNaN
                                         : std::accumulate(values.begin(), values.end(), 0.0) /
                                               static_cast<double>(values.size());
      summary.table[p][m] = MeasureSummary{mean, median_of(std::move(values))};
    }
  }
  return summary;
}

BacktestReport rolling_backtest(const DensityPanel& panel, std::size_t n_test,
                                const std::vector<std::size_t>& K_candidates, std::size_t n_validation) {
  const std::size_t T = panel.size();
  require(n_test >= 1, ErrorCode::InvalidArgument, "backtest needs at least one test period");
  require(T > n_test + n_validation + 10, ErrorCode::TooFewPeriods,
          "backtest needs more than " + std::to_string(n_test + n_validation + 10) + " periods, got " +
              std::to_string(T));

  std::vector<std::optional<BacktestPeriod>> slots(n_test);
  parallel_for(n_test, [&](std::size_t i) {
    const std::size_t s = T - n_test + i;
    const DensityPanel train = panel.prefix(s);
    const std::size_t K = select_K_cv(train, K_candidates, n_validation);
    const FarModel model = fit(train, K);
    const GridFunction far_forecast = to_density(forecast_one_step(model, model.last_state), model.mean_density);
    const GridFunction& truth = panel.densities[s];
    BacktestPeriod period{panel.labels.empty() ? std::to_string(s) : panel.labels[s], K, {}};
    period.errors[static_cast<std::size_t>(Predictor::Far)] = error_metrics(far_forecast, truth);
    period.errors[static_cast<std::size_t>(Predictor::Ave)] = error_metrics(predictor_ave(train), truth);
    period.errors[static_cast<std::size_t>(Predictor::Last)] = error_metrics(predictor_last(train), truth);
    slots[i] = std::move(period);
  });

  BacktestReport report;
  std::vector<std::array<ErrorReport, 3>> rows;
  for (auto& slot : slots) {
    rows.push_back(slot->errors);
    report.periods.push_back(std::move(*slot));
  }
  report.summary = summarize(rows);
  return report;
}

}  // namespace far
