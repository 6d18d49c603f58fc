#include "far/dynamics_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace far {

namespace {

double variance_floor(const GridFunction& v, const OperatorRep& Q) {
  return 1e-14 * std::abs(trace(Q)) * inner(v, v);
}

double checked_variance(const GridFunction& v, const OperatorRep& Q) {
  const double var = quadratic_form(v, Q, v);
  require(var > variance_floor(v, Q) && var > 0.0, ErrorCode::ZeroVariance,
          "the functional has (numerically) zero variance under Q");
  return var;
}

}  // namespace

FeatureSet leading_features(const OperatorRep& A_hat, std::size_t m) {
  SingularSystem svd = svd_operator(A_hat, m);
  return FeatureSet{std::move(svd.right), std::move(svd.left), std::move(svd.singular_values)};
}

GridFunction impulse_response(const OperatorRep& A_hat, const GridFunction& v) {
  return apply_operator(adjoint(A_hat), v);
}

GridFunction moment_functional(std::size_t p, const Grid& grid) {
  require(p >= 1, ErrorCode::InvalidArgument, "moment order must be at least 1");
  return GridFunction::sample(grid, [p](double x) { return std::pow(x, static_cast<double>(p)); });
}

GridFunction tail_indicator(const Grid& grid, const TailRegion& region) {
  const double a = grid->a();
  const double b = grid->b();
  auto check = [&](double tau) {
    require(tau >= a && tau <= b, ErrorCode::ThresholdOutOfSupport,
            "threshold " + std::to_string(tau) + " lies outside [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  };

  // Coefficients c_i with sum_i c_i f_i = trapezoid integral of the linear
  // interpolant of f over [a, tau]; the indicator value is c_i / w_i.
  auto left_mass = [&](double tau) {
    check(tau);
    const auto n = static_cast<Eigen::Index>(grid->size());
    const double h = grid->step();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    const double pos = (tau - a) / h;
    auto j = static_cast<Eigen::Index>(std::floor(pos));
    if (j >= n - 1) return Eigen::VectorXd(Eigen::VectorXd::Ones(n));
    const double theta = pos - static_cast<double>(j);
    for (Eigen::Index cell = 0; cell < j; ++cell) {
      c[cell] += 0.5 * h;
      c[cell + 1] += 0.5 * h;
    }
    c[j] += 0.5 * theta * h * (2.0 - theta);
    c[j + 1] += 0.5 * theta * theta * h;
    return Eigen::VectorXd(c.cwiseQuotient(grid->weights()));
  };

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid->size()));
  switch (region.kind) {
    case TailRegion::Kind::Left:
      return GridFunction(grid, left_mass(region.lower));
    case TailRegion::Kind::Right:
      return GridFunction(grid, ones - left_mass(region.upper));
    case TailRegion::Kind::TwoSided:
      require(region.lower <= region.upper, ErrorCode::InvalidArgument,
              "two-sided region needs lower <= upper threshold");
      return GridFunction(grid, left_mass(region.lower) + ones - left_mass(region.upper));
  }
  fail(ErrorCode::InvalidArgument, "unknown tail region");
}

MomentBasis moment_basis(const OperatorRep& Q, const Grid& grid, std::size_t kmax) {
  check_same_grid(Q.grid(), grid);
  require(kmax >= 1 && kmax <= kDefaultMomentCount, ErrorCode::InvalidArgument,
          "moment count must lie in [1, " + std::to_string(kDefaultMomentCount) + "]");
  const double mid = 0.5 * (grid->a() + grid->b());
  const double half = 0.5 * grid->length();

  std::vector<GridFunction> basis;
  std::vector<GridFunction> q_basis;  // Q u_j
  basis.reserve(kmax);
  for (std::size_t k = 1; k <= kmax; ++k) {
    // Same span as x^k; the rescaling keeps high degrees well conditioned.
    GridFunction candidate = project_zero_integral(GridFunction::sample(
        grid, [&](double x) { return std::pow((x - mid) / half, static_cast<double>(k)); }));
    const double start = quadratic_form(candidate, Q, candidate);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < basis.size(); ++j) {
        candidate -= inner(q_basis[j], candidate) * basis[j];
      }
    }
    candidate = project_zero_integral(candidate);
    const double q_norm = quadratic_form(candidate, Q, candidate);
    require(start > 0.0 && q_norm > 1e-10 * start, ErrorCode::DegenerateMetric,
            "Q has no room for moment " + std::to_string(k) + " (rank too low for kmax)");
    candidate *= 1.0 / std::sqrt(q_norm);
    q_basis.push_back(apply_operator(Q, candidate));
    basis.push_back(std::move(candidate));
  }
  return MomentBasis{grid, std::move(basis), Q};
}

RSquared r_squared(const GridFunction& v, const OperatorRep& Q, const OperatorRep& Sigma) {
  check_same_grid(Q.grid(), Sigma.grid());
  const double total = checked_variance(v, Q);
  const double raw = 1.0 - quadratic_form(v, Sigma, v) / total;
  return RSquared{std::clamp(raw, 0.0, 1.0), raw};
}

DecompositionReport variance_decomposition(const GridFunction& v, const OperatorRep& A, const OperatorRep& Q,
                                           const MomentBasis& basis, const std::optional<OperatorRep>& Sigma) {
  check_same_grid(A.grid(), Q.grid());
  check_same_grid(basis.grid, Q.grid());
  const double total = checked_variance(v, Q);
  // <v, A Q u_k> = <A* v, Q u_k>.
  const GridFunction response = impulse_response(A, v);
  Eigen::VectorXd pi(static_cast<Eigen::Index>(basis.kmax()));
  for (std::size_t k = 0; k < basis.kmax(); ++k) {
    const double c = inner(response, apply_operator(Q, basis.functions[k]));
    pi[static_cast<Eigen::Index>(k)] = c * c / total;
  }
  DecompositionReport report{v, std::move(pi), std::nullopt};
  if (Sigma) report.r2 = r_squared(v, Q, *Sigma);
  return report;
}

}  // namespace far
