#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "far/density_estimation.hpp"
#include "far/function_space.hpp"

namespace far {

/// A fitted FAR(1) model w_t = A w_{t-1} + eps_t on demeaned densities.
struct FarModel {
  Grid grid;
  GridFunction mean_density;
  /// Eigenpairs of Q_hat above the numerical floor (at most T of them).
  EigenSystem eigen;
  std::size_t K;
  OperatorRep A_hat;
  OperatorRep Q_hat;
  OperatorRep P_hat;
  OperatorRep Sigma_hat;
  /// eps_t for t = 2..T.
  std::vector<GridFunction> residuals;
  std::size_t sample_size;
  /// w_1 and w_T; the bootstrap restarts from the first, forecasts from the last.
  GridFunction first_state;
  GridFunction last_state;
};

/// Rank cutoff for the regularized inverse: lambda_K > kRankTolerance * lambda_1.
inline constexpr double kRankTolerance = 1e-10;

GridFunction mean_density(const DensityPanel& panel);
/// Pointwise average of arbitrary curves (same grid).
GridFunction mean_curve(const std::vector<GridFunction>& curves);

/// w_t = f_t - f_bar, projected onto the zero-integral subspace.
std::vector<GridFunction> demean(const std::vector<GridFunction>& curves, const GridFunction& f_bar);
std::vector<GridFunction> demean(const DensityPanel& panel, const GridFunction& f_bar);

/// (1/T) sum_t w_t ⊗ w_t.
OperatorRep covariance_operator(const std::vector<GridFunction>& w);
/// (1/T) sum_{t=2..T} w_t ⊗ w_{t-1}. The divisor is T, not T-1.
OperatorRep lag1_cross_covariance(const std::vector<GridFunction>& w);

EigenSystem principal_components(const OperatorRep& Q_hat);

/// sum_{k<=K} lambda_k^{-1} v_k ⊗ v_k. Throws RankDeficient when
/// lambda_K <= 1e-10 * lambda_1 or fewer than K eigenpairs exist.
OperatorRep regularized_inverse(const EigenSystem& eigen, std::size_t K);

/// A_hat = P_hat Q_K^+ (quadrature composition).
OperatorRep estimate_operator(const OperatorRep& P_hat, const OperatorRep& Q_K_plus);

/// eps_t = w_t - A_hat w_{t-1}, t = 2..T.
std::vector<GridFunction> residuals(const std::vector<GridFunction>& w, const OperatorRep& A_hat);

/// (1/divisor) sum eps_t ⊗ eps_t. The default divisor is residuals.size() + 1,
/// i.e. the number of periods the residuals were fitted on.
OperatorRep noise_covariance(const std::vector<GridFunction>& residuals,
                             std::optional<std::size_t> divisor = std::nullopt);

/// Mean, covariance structure and principal components of a curve panel.
/// Builds the eigensystem once so that any truncation K can be evaluated
/// cheaply (the cross-validation loops rely on this).
class PanelDecomposition {
 public:
  explicit PanelDecomposition(const std::vector<GridFunction>& curves);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t periods() const noexcept { return static_cast<std::size_t>(states_.cols()); }
  const GridFunction& mean() const noexcept { return mean_; }
  /// Column t is w_{t+1} (demeaned curve).
  const Eigen::MatrixXd& states() const noexcept { return states_; }
  GridFunction state(std::size_t t) const;
  const EigenSystem& eigen() const noexcept { return eigen_; }

  /// Largest K accepted by the rank cutoff.
  std::size_t usable_rank() const noexcept;
  void check_rank(std::size_t K) const;

  /// A_hat for truncation K as a dense kernel.
  OperatorRep autoregressive_operator(std::size_t K) const;
  /// A_hat w without materializing the kernel.
  GridFunction apply_autoregressive(std::size_t K, const GridFunction& w) const;

  OperatorRep covariance() const;
  OperatorRep cross_covariance() const;

 private:
  friend FarModel fit_curves(const std::vector<GridFunction>& curves, std::size_t K);

  // (T-1) x K matrix  X_prev^T W V_K Lambda_K^{-1} / T.
  Eigen::MatrixXd regression_coefficients(std::size_t K) const;

  Grid grid_;
  GridFunction mean_;
  Eigen::MatrixXd states_;
  EigenSystem eigen_;
};

/// Full estimation pipeline for truncation K. Requires T >= 5, K >= 1.
FarModel fit(const DensityPanel& panel, std::size_t K);
/// Same pipeline on arbitrary curves (no density checks); used when
/// refitting regenerated panels.
FarModel fit_curves(const std::vector<GridFunction>& curves, std::size_t K);

}  // namespace far
