#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "far/dynamics_analysis.hpp"
#include "far/far_estimation.hpp"

namespace far {

/// A vector-valued quantity computed from a fitted model (a curve on the grid,
/// a decomposition over k, or a scalar as a length-1 vector).
struct Statistic {
  std::string name;
  std::function<Eigen::VectorXd(const FarModel&)> evaluate;
};

namespace statistics {
Statistic impulse_response(const GridFunction& v, std::string name = "irf");
Statistic variance_decomposition(const GridFunction& v, std::size_t kmax, std::string name = "vardecomp");
Statistic r_squared(const GridFunction& v, std::string name = "r_squared");
}  // namespace statistics

/// Pointwise percentile band of a statistic under the residual bootstrap.
struct BandResult {
  std::string statistic;
  Eigen::VectorXd point;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double alpha;
  std::size_t replications;
  std::size_t dropped;
  std::uint64_t seed;
};

/// Model-based residual bootstrap: regenerate w*_t = A_hat w*_{t-1} + eps*_t
/// from w*_1 = w_1 with eps* resampled from the centered residuals, refit with
/// the same K and evaluate the statistic. Replications whose refit fails are
/// dropped; more than 5% dropped raises TooManyFailures.
BandResult residual_bootstrap(const FarModel& model, const Statistic& statistic, std::size_t B, double alpha,
                              std::uint64_t seed);

/// Same replications, several levels at once: one band per alpha.
std::vector<BandResult> residual_bootstrap(const FarModel& model, const Statistic& statistic, std::size_t B,
                                           const std::vector<double>& alphas, std::uint64_t seed);

}  // namespace far
