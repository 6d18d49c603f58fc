#include "far/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "far/parallel.hpp"
#include "far/random.hpp"

namespace far {

namespace statistics {

Statistic impulse_response(const GridFunction& v, std::string name) {
  return {std::move(name), [v](const FarModel& m) { return far::impulse_response(m.A_hat, v).values(); }};
}

Statistic variance_decomposition(const GridFunction& v, std::size_t kmax, std::string name) {
  return {std::move(name), [v, kmax](const FarModel& m) {
            const MomentBasis basis = moment_basis(m.Q_hat, m.grid, kmax);
            return far::variance_decomposition(v, m.A_hat, m.Q_hat, basis).pi;
          }};
}

Statistic r_squared(const GridFunction& v, std::string name) {
  return {std::move(name), [v](const FarModel& m) {
            Eigen::VectorXd out(1);
            out[0] = far::r_squared(v, m.Q_hat, m.Sigma_hat).value;
            return out;
          }};
}

}  // namespace statistics

namespace {

// Linear-interpolation (type 7) percentile of a sorted sample.
double percentile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<BandResult> residual_bootstrap(const FarModel& model, const Statistic& statistic, std::size_t B,
                                           const std::vector<double>& alphas, std::uint64_t seed) {
  require(B >= 100, ErrorCode::InvalidArgument, "bootstrap needs B >= 100 replications");
  require(!alphas.empty(), ErrorCode::InvalidArgument, "no band levels requested");
  for (double a : alphas) require(a > 0.0 && a < 1.0, ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
  const std::size_t n_res = model.residuals.size();
  require(n_res >= 10, ErrorCode::TooFewResiduals,
          "bootstrap needs at least 10 residuals, model has " + std::to_string(n_res));

  const Grid& grid = model.grid;
  const auto n = static_cast<Eigen::Index>(grid->size());
  Eigen::MatrixXd pool(n, static_cast<Eigen::Index>(n_res));
  for (std::size_t t = 0; t < n_res; ++t) pool.col(static_cast<Eigen::Index>(t)) = model.residuals[t].values();
  const Eigen::VectorXd pool_mean = pool.rowwise().mean();
  pool.colwise() -= pool_mean;

  const Eigen::VectorXd point = statistic.evaluate(model);
  const Eigen::MatrixXd& a = model.A_hat.kernel();
  const Eigen::VectorXd& weights = grid->weights();

  std::vector<std::optional<Eigen::VectorXd>> draws(B);
  parallel_for(B, [&](std::size_t b) {
    Rng rng = make_stream(seed, {b});
    std::vector<GridFunction> curves;
    curves.reserve(model.sample_size);
    Eigen::VectorXd w = model.first_state.values();
    curves.emplace_back(grid, model.mean_density.values() + w);
    for (std::size_t t = 1; t < model.sample_size; ++t) {
      const auto pick = static_cast<Eigen::Index>(rng() % n_res);
      w = a * weights.cwiseProduct(w) + pool.col(pick);
      curves.emplace_back(grid, model.mean_density.values() + w);
    }
    try {
      const FarModel refit = fit_curves(curves, model.K);
      Eigen::VectorXd value = statistic.evaluate(refit);
      if (value.size() == point.size() && value.allFinite()) draws[b] = std::move(value);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient && e.code() != ErrorCode::DegenerateMetric &&
          e.code() != ErrorCode::ZeroVariance)
        throw;
    }
  });

  std::vector<Eigen::VectorXd> kept;
  for (auto& d : draws)
    if (d) kept.push_back(std::move(*d));
  const std::size_t dropped = B - kept.size();
  require(static_cast<double>(dropped) <= 0.05 * static_cast<double>(B), ErrorCode::TooManyFailures,
          std::to_string(dropped) + " of " + std::to_string(B) + " bootstrap replications failed");

  std::vector<BandResult> bands;
  for (double alpha : alphas) {
    bands.push_back(BandResult{statistic.name, point, Eigen::VectorXd(point.size()), Eigen::VectorXd(point.size()),
                               alpha, B, dropped, seed});
  }
  std::vector<double> column(kept.size());
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    for (std::size_t b = 0; b < kept.size(); ++b) column[b] = kept[b][i];
    std::sort(column.begin(), column.end());
    for (auto& band : bands) {
      band.lower[i] = percentile(column, 0.5 * band.alpha);
      band.upper[i] = percentile(column, 1.0 - 0.5 * band.alpha);
    }
  }
  return bands;
}

BandResult residual_bootstrap(const FarModel& model, const Statistic& statistic, std::size_t B, double alpha,
                              std::uint64_t seed) {
  return std::move(residual_bootstrap(model, statistic, B, std::vector<double>{alpha}, seed).front());
}

}  // namespace far
