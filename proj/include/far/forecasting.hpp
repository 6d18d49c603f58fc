#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "far/density_estimation.hpp"
#include "far/far_estimation.hpp"

namespace far {

/// One-step forecast A_hat w_T, projected onto the zero-integral subspace.
GridFunction forecast_one_step(const FarModel& model, const GridFunction& w_T);

/// h recursive applications of A_hat; no clipping between steps.
std::vector<GridFunction> forecast_h_steps(const FarModel& model, const GridFunction& w_T, std::size_t h);

/// max(f_bar + w, 0) rescaled to unit mass. Throws DegenerateForecast when the
/// clipped curve has (numerically) no mass.
GridFunction to_density(const GridFunction& w_forecast, const GridFunction& f_bar);

struct FeatureInterval {
  double center;
  double half_width;
  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
};

/// Two-sided standard normal critical value Phi^{-1}(1 - alpha/2).
double normal_critical_value(double alpha);

/// <v, w_hat_{T+1}> +- z_{alpha/2} sqrt((1 + K/T) <v, Sigma_hat v>).
FeatureInterval feature_interval(const FarModel& model, const GridFunction& v, const GridFunction& w_forecast,
                                 double alpha);

/// Table of deviation measures between a forecast and a realized density.
struct ErrorReport {
  double d2 = 0.0;   // L2 distance of densities
  double d1 = 0.0;   // L1 distance of densities
  double dks = 0.0;  // Kolmogorov-Smirnov distance of CDFs
  double dcm = 0.0;  // Cramer-von Mises distance, integrated against the realized law
  double dm = 0.0;   // absolute difference of means
  double dv = 0.0;   // absolute difference of variances

  static constexpr std::size_t kCount = 6;
  static const std::array<const char*, kCount>& names();
  std::array<double, kCount> values() const { return {d2, d1, dks, dcm, dm, dv}; }
};

ErrorReport error_metrics(const GridFunction& f_hat, const GridFunction& f_true);

/// Density mean and variance under quadrature.
double density_mean(const GridFunction& f);
double density_variance(const GridFunction& f);

GridFunction predictor_ave(const DensityPanel& panel);
GridFunction predictor_last(const DensityPanel& panel);

/// Rolling one-step cross-validation over the last n_validation periods;
/// score is mean D2. Infeasible candidates (rank or degenerate forecast) are
/// skipped; ties go to the smaller K.
std::size_t select_K_cv(const DensityPanel& panel, const std::vector<std::size_t>& candidates,
                        std::size_t n_validation);

/// CV scores per candidate; NaN marks an infeasible candidate.
std::vector<double> cv_scores(const DensityPanel& panel, const std::vector<std::size_t>& candidates,
                              std::size_t n_validation);

enum class Predictor { Far, Ave, Last };
inline constexpr std::array<Predictor, 3> kPredictors = {Predictor::Far, Predictor::Ave, Predictor::Last};
const char* to_string(Predictor p);

struct MeasureSummary {
  double mean;
  double median;
};

/// Mean and median of each measure per predictor, over a set of forecasts.
struct ErrorSummary {
  // [predictor][measure]
  std::array<std::array<MeasureSummary, ErrorReport::kCount>, 3> table;
  std::size_t count = 0;

  const MeasureSummary& at(Predictor p, std::size_t measure) const {
    return table[static_cast<std::size_t>(p)][measure];
  }
};

ErrorSummary summarize(const std::vector<std::array<ErrorReport, 3>>& rows);

struct BacktestPeriod {
  std::string label;
  std::size_t selected_K;
  std::array<ErrorReport, 3> errors;  // indexed by Predictor
};

struct BacktestReport {
  std::vector<BacktestPeriod> periods;
  ErrorSummary summary;
};

/// Rolling out-of-sample one-step forecasts of the last n_test periods; K is
/// re-selected by cross-validation on the data preceding each period.
BacktestReport rolling_backtest(const DensityPanel& panel, std::size_t n_test,
                                const std::vector<std::size_t>& K_candidates, std::size_t n_validation);

}  // namespace far
