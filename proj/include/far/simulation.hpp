#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "far/density_estimation.hpp"
#include "far/far_estimation.hpp"
#include "far/forecasting.hpp"
#include "far/random.hpp"

namespace far {

/// Data-generating FAR(1) process for density panels. Noise is resampled from
/// residual_pool (centered first) when it is nonempty, otherwise drawn as a
/// Gaussian element with covariance noise_covariance.
struct Generator {
  Grid grid;
  GridFunction mean_density;
  OperatorRep A;
  std::vector<GridFunction> residual_pool;
  std::optional<OperatorRep> noise_covariance;
};

/// A fitted model as generator: A = A_hat, noise from its residuals.
Generator generator_from_model(const FarModel& model);

/// Synthetic generator on a bell-shaped mean density. The operator is
/// diagonal in an orthonormal system of zero-integral Hermite functions:
/// A = sum_k operator_coefficients[k] e_k ⊗ e_k, and the noise has standard
/// deviation noise_sd[k] along e_k (Gaussian).
struct SyntheticDesign {
  double a = -5.0;
  double b = 5.0;
  std::size_t grid_points = 256;
  double mean_sd = 1.0;
  /// Width of the Hermite functions relative to mean_sd; < 1 keeps them
  /// inside the mean density's tails.
  double feature_scale = 0.7;
  std::vector<double> operator_coefficients = {0.2, 0.8, 0.4, 0.6};
  std::vector<double> noise_sd = {0.049, 0.03, 0.0458, 0.04, 0.01, 0.01};
};

/// Default design: rank-4 operator with spectral radius 0.8 whose most
/// persistent direction is even (a dispersion feature).
SyntheticDesign forex_like_design();

/// Orthonormal zero-integral Hermite-type functions used by SyntheticDesign.
std::vector<GridFunction> hermite_features(const Grid& grid, double scale, std::size_t count);

Generator make_synthetic_generator(const SyntheticDesign& design);

/// Rejection sampling with a uniform proposal on [a,b]; the target is the
/// linear interpolant of f and the envelope is max_i f(x_i).
std::vector<double> acceptance_sample(const GridFunction& f, std::size_t n, std::uint64_t seed);
std::vector<double> acceptance_sample(const GridFunction& f, std::size_t n, Rng& rng,
                                      std::size_t* proposals = nullptr);

inline constexpr std::size_t kDefaultSimulatedPeriods = 1000;

/// States w_t of the last T+1 periods after burn_in periods started from w_0 = 0.
/// Default burn_in is 1000 - (T+1) (zero when T+1 >= 1000).
std::vector<GridFunction> simulate_states(const Generator& generator, std::size_t T, std::uint64_t seed,
                                          std::optional<std::size_t> burn_in = std::nullopt);

/// simulate_states converted to densities with to_density(w_t, f_bar).
DensityPanel simulate_far(const Generator& generator, std::size_t T, std::uint64_t seed,
                          std::optional<std::size_t> burn_in = std::nullopt);

struct StudyConfig {
  std::vector<std::size_t> T_values;
  std::vector<std::size_t> N_values;
  std::size_t iterations = 1;
  Generator generator;
  std::uint64_t seed = 0;
  std::optional<std::size_t> burn_in;
  /// Fixed truncation; when absent K is chosen by cross-validation.
  std::optional<std::size_t> K;
  std::vector<std::size_t> K_candidates = {1, 2, 3, 4, 5, 6, 7, 8};
  std::size_t n_validation = 5;
  Kernel kernel = Kernel::Normal;
};

struct StudyCell {
  std::size_t T;
  std::size_t N;
  ErrorSummary summary;
  /// Monte Carlo standard error of each mean, [predictor][measure].
  std::array<std::array<double, ErrorReport::kCount>, 3> std_error;
  std::size_t iterations;
  std::size_t dropped;
};

struct StudyResult {
  std::vector<StudyCell> cells;  // T-major, then N
  const StudyCell& cell(std::size_t T, std::size_t N) const;
};

/// One forecasting experiment: simulate T+1 densities, sample N observations
/// per period, re-estimate by KDE, fit on the first T periods and score the
/// FAR/AVE/LAST forecasts of period T+1 against the true density.
std::array<ErrorReport, 3> run_iteration(const StudyConfig& config, std::size_t T, std::size_t N,
                                         std::size_t iteration);

StudyResult run_study(const StudyConfig& config);

}  // namespace far
