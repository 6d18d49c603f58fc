#include "far/far_estimation.hpp"

#include <algorithm>
#include <string>

namespace far {

namespace {

// Eigenpairs below this fraction of the leading eigenvalue are rounding noise
// and are not kept in a PanelDecomposition.
constexpr double kEigenFloor = 1e-12;

Eigen::MatrixXd stack(const std::vector<GridFunction>& curves) {
  const auto n = static_cast<Eigen::Index>(curves.front().size());
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(curves.size()));
  for (std::size_t t = 0; t < curves.size(); ++t) {
    check_same_grid(curves.front().grid(), curves[t].grid());
    m.col(static_cast<Eigen::Index>(t)) = curves[t].values();
  }
  return m;
}

std::vector<GridFunction> unstack(const Grid& grid, const Eigen::MatrixXd& m) {
  std::vector<GridFunction> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index t = 0; t < m.cols(); ++t) out.emplace_back(grid, m.col(t));
  return out;
}

void require_periods(std::size_t T, std::size_t minimum, const char* what) {
  require(T >= minimum, ErrorCode::TooFewPeriods,
          std::string(what) + " needs at least " + std::to_string(minimum) + " periods, got " + std::to_string(T));
}

EigenSystem truncate(const EigenSystem& full) {
  const double top = full.size() == 0 ? 0.0 : full.eigenvalue(0);
  Eigen::Index keep = 0;
  while (keep < static_cast<Eigen::Index>(full.size()) && top > 0.0 &&
         full.eigenvalues()[keep] > kEigenFloor * top)
    ++keep;
  return EigenSystem(full.grid(), full.eigenvalues().head(keep), full.eigenfunctions().leftCols(keep));
}

}  // namespace

GridFunction mean_curve(const std::vector<GridFunction>& curves) {
  require(!curves.empty(), ErrorCode::EmptyPanel, "cannot average an empty panel");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(curves.front().size()));
  for (const auto& c : curves) {
    check_same_grid(curves.front().grid(), c.grid());
    sum += c.values();
  }
  return GridFunction(curves.front().grid(), sum / static_cast<double>(curves.size()));
}

GridFunction mean_density(const DensityPanel& panel) { return mean_curve(panel.densities); }

std::vector<GridFunction> demean(const std::vector<GridFunction>& curves, const GridFunction& f_bar) {
  std::vector<GridFunction> out;
  out.reserve(curves.size());
  for (const auto& f : curves) out.push_back(project_zero_integral(f - f_bar));
  return out;
}

std::vector<GridFunction> demean(const DensityPanel& panel, const GridFunction& f_bar) {
  return demean(panel.densities, f_bar);
}

OperatorRep covariance_operator(const std::vector<GridFunction>& w) {
  require_periods(w.size(), 2, "covariance operator");
  const Eigen::MatrixXd x = stack(w);
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(x.rows(), x.rows());
  kernel.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(w.size()));
  kernel = kernel.selfadjointView<Eigen::Lower>();
  return OperatorRep(w.front().grid(), std::move(kernel));
}

OperatorRep lag1_cross_covariance(const std::vector<GridFunction>& w) {
  require_periods(w.size(), 2, "lag-1 cross-covariance");
  const Eigen::MatrixXd x = stack(w);
  const Eigen::Index T = x.cols();
  Eigen::MatrixXd kernel = x.rightCols(T - 1) * x.leftCols(T - 1).transpose() / static_cast<double>(T);
  return OperatorRep(w.front().grid(), std::move(kernel));
}

EigenSystem principal_components(const OperatorRep& Q_hat) { return eigh_operator(Q_hat); }

OperatorRep regularized_inverse(const EigenSystem& eigen, std::size_t K) {
  require(K >= 1, ErrorCode::InvalidArgument, "truncation K must be at least 1");
  const double top = eigen.size() == 0 ? 0.0 : eigen.eigenvalue(0);
  require(K <= eigen.size() && top > 0.0 && eigen.eigenvalue(K - 1) > kRankTolerance * top,
          ErrorCode::RankDeficient,
          "K=" + std::to_string(K) + " exceeds the numerical rank of the covariance operator");
  const auto k = static_cast<Eigen::Index>(K);
  const Eigen::MatrixXd v = eigen.eigenfunctions().leftCols(k);
  Eigen::MatrixXd kernel = v * eigen.eigenvalues().head(k).cwiseInverse().asDiagonal() * v.transpose();
  return OperatorRep(eigen.grid(), std::move(kernel));
}

OperatorRep estimate_operator(const OperatorRep& P_hat, const OperatorRep& Q_K_plus) {
  return compose(P_hat, Q_K_plus);
}

std::vector<GridFunction> residuals(const std::vector<GridFunction>& w, const OperatorRep& A_hat) {
  require_periods(w.size(), 2, "residuals");
  std::vector<GridFunction> out;
  out.reserve(w.size() - 1);
  for (std::size_t t = 1; t < w.size(); ++t) out.push_back(w[t] - apply_operator(A_hat, w[t - 1]));
  return out;
}

OperatorRep noise_covariance(const std::vector<GridFunction>& eps, std::optional<std::size_t> divisor) {
  require(!eps.empty(), ErrorCode::EmptyResiduals, "noise covariance needs at least one residual");
  const std::size_t d = divisor.value_or(eps.size() + 1);
  require(d >= 1, ErrorCode::InvalidArgument, "divisor must be positive");
  const Eigen::MatrixXd x = stack(eps);
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(x.rows(), x.rows());
  kernel.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(d));
  kernel = kernel.selfadjointView<Eigen::Lower>();
  return OperatorRep(eps.front().grid(), std::move(kernel));
}

// --- PanelDecomposition -----------------------------------------------------

PanelDecomposition::PanelDecomposition(const std::vector<GridFunction>& curves)
    : grid_((require_periods(curves.size(), 2, "panel decomposition"), curves.front().grid())),
      mean_(mean_curve(curves)),
      states_(stack(demean(curves, mean_))),
      eigen_(grid_, Eigen::VectorXd(), Eigen::MatrixXd(static_cast<Eigen::Index>(grid_->size()), 0)) {
  const Eigen::Index n = states_.rows();
  const Eigen::Index T = states_.cols();
  if (T <= n) {
    // Q_hat has rank <= T: the thin SVD of W^{1/2} X / sqrt(T) gives its
    // nonzero spectrum without forming the n x n kernel.
    const Eigen::VectorXd root = grid_->weights().array().sqrt();
    const Eigen::MatrixXd scaled = root.asDiagonal() * states_ / std::sqrt(static_cast<double>(T));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU);
    Eigen::VectorXd values = svd.singularValues().array().square();
    Eigen::MatrixXd vectors = root.cwiseInverse().asDiagonal() * svd.matrixU();
    detail::apply_sign_convention(vectors);
    eigen_ = truncate(EigenSystem(grid_, std::move(values), std::move(vectors)));
  } else {
    eigen_ = truncate(eigh_operator(covariance()));
  }
}

GridFunction PanelDecomposition::state(std::size_t t) const {
  return GridFunction(grid_, states_.col(static_cast<Eigen::Index>(t)));
}

std::size_t PanelDecomposition::usable_rank() const noexcept {
  if (eigen_.size() == 0) return 0;
  const double top = eigen_.eigenvalue(0);
  std::size_t k = 0;
  while (k < eigen_.size() && eigen_.eigenvalue(k) > kRankTolerance * top) ++k;
  return k;
}

void PanelDecomposition::check_rank(std::size_t K) const {
  require(K >= 1, ErrorCode::InvalidArgument, "truncation K must be at least 1");
  require(K <= usable_rank(), ErrorCode::RankDeficient,
          "K=" + std::to_string(K) + " exceeds the usable rank " + std::to_string(usable_rank()) +
              " of the covariance operator");
}

Eigen::MatrixXd PanelDecomposition::regression_coefficients(std::size_t K) const {
  check_rank(K);
  const auto k = static_cast<Eigen::Index>(K);
  const Eigen::Index T = states_.cols();
  const auto v = eigen_.eigenfunctions().leftCols(k);
  Eigen::MatrixXd c = states_.leftCols(T - 1).transpose() * grid_->weights().asDiagonal() * v;
  c *= eigen_.eigenvalues().head(k).cwiseInverse().asDiagonal();
  return c / static_cast<double>(T);
}

OperatorRep PanelDecomposition::autoregressive_operator(std::size_t K) const {
  const Eigen::Index T = states_.cols();
  const Eigen::MatrixXd b = states_.rightCols(T - 1) * regression_coefficients(K);
  Eigen::MatrixXd kernel = b * eigen_.eigenfunctions().leftCols(static_cast<Eigen::Index>(K)).transpose();
  return OperatorRep(grid_, std::move(kernel));
}

GridFunction PanelDecomposition::apply_autoregressive(std::size_t K, const GridFunction& w) const {
  check_same_grid(grid_, w.grid());
  const Eigen::Index T = states_.cols();
  const auto v = eigen_.eigenfunctions().leftCols(static_cast<Eigen::Index>(K));
  const Eigen::VectorXd scores = v.transpose() * grid_->weights().cwiseProduct(w.values());
  return GridFunction(grid_, states_.rightCols(T - 1) * (regression_coefficients(K) * scores));
}

OperatorRep PanelDecomposition::covariance() const { return covariance_operator(unstack(grid_, states_)); }

OperatorRep PanelDecomposition::cross_covariance() const {
  return lag1_cross_covariance(unstack(grid_, states_));
}

// --- fit --------------------------------------------------------------------

FarModel fit_curves(const std::vector<GridFunction>& curves, std::size_t K) {
  require_periods(curves.size(), 5, "FAR estimation");
  require(K >= 1, ErrorCode::InvalidArgument, "truncation K must be at least 1");
  const PanelDecomposition panel(curves);
  panel.check_rank(K);

  const Eigen::MatrixXd& x = panel.states();
  const Eigen::Index T = x.cols();
  const auto k = static_cast<Eigen::Index>(K);
  const Grid& grid = panel.grid();

  const Eigen::MatrixXd coef = panel.regression_coefficients(K);
  const Eigen::MatrixXd b = x.rightCols(T - 1) * coef;
  const auto v = panel.eigen().eigenfunctions().leftCols(k);
  OperatorRep a_hat(grid, b * v.transpose());

  // eps_t = w_t - A_hat w_{t-1}, evaluated through the rank-K factors.
  const Eigen::MatrixXd prev_scores = v.transpose() * grid->weights().asDiagonal() * x.leftCols(T - 1);
  const Eigen::MatrixXd eps = x.rightCols(T - 1) - b * prev_scores;
  std::vector<GridFunction> eps_curves = unstack(grid, eps);

  OperatorRep sigma = noise_covariance(eps_curves, static_cast<std::size_t>(T));

  return FarModel{grid,
                  panel.mean(),
                  panel.eigen(),
                  K,
                  std::move(a_hat),
                  panel.covariance(),
                  panel.cross_covariance(),
                  std::move(sigma),
                  std::move(eps_curves),
                  static_cast<std::size_t>(T),
                  panel.state(0),
                  panel.state(static_cast<std::size_t>(T - 1))};
}

FarModel fit(const DensityPanel& panel, std::size_t K) {
  require(!panel.densities.empty(), ErrorCode::EmptyPanel, "cannot fit an empty panel");
  return fit_curves(panel.densities, K);
}

}  // namespace far
