#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "far/function_space.hpp"

namespace far {

/// Leading singular structure of an autoregressive operator.
/// progressive[k]: direction of w_{t-1} that drives w_t (right singular function);
/// regressive[k]: direction of w_t driven by w_{t-1} (left singular function).
struct FeatureSet {
  std::vector<GridFunction> progressive;
  std::vector<GridFunction> regressive;
  Eigen::VectorXd strengths;
};

FeatureSet leading_features(const OperatorRep& A_hat, std::size_t m);

/// x -> (A* v)(x): change in <v, w_t> per unit Dirac mass added to w_{t-1} at x.
GridFunction impulse_response(const OperatorRep& A_hat, const GridFunction& v);

/// iota_p(x) = x^p.
GridFunction moment_functional(std::size_t p, const Grid& grid);

/// Region of the support probed by a tail-probability functional.
struct TailRegion {
  enum class Kind { Left, Right, TwoSided };
  Kind kind;
  double lower;  // Left: threshold; TwoSided: left threshold
  double upper;  // Right: threshold; TwoSided: right threshold

  static TailRegion left(double tau) { return {Kind::Left, tau, tau}; }
  static TailRegion right(double tau) { return {Kind::Right, tau, tau}; }
  static TailRegion two_sided(double lo, double hi) { return {Kind::TwoSided, lo, hi}; }
};

/// Indicator of the region with the boundary cell weighted fractionally, so
/// <1_B, f> equals the trapezoid integral of the interpolated f over B.
GridFunction tail_indicator(const Grid& grid, const TailRegion& region);

/// Degree-1..kmax polynomials with zero integral, orthonormal under <., Q .>.
struct MomentBasis {
  Grid grid;
  std::vector<GridFunction> functions;
  OperatorRep gram_operator;

  std::size_t kmax() const noexcept { return functions.size(); }
};

inline constexpr std::size_t kDefaultMomentCount = 10;

/// Modified Gram-Schmidt (two passes) in the Q inner product over centered
/// monomials. Throws DegenerateMetric when Q has too few directions left for
/// the next degree.
MomentBasis moment_basis(const OperatorRep& Q, const Grid& grid, std::size_t kmax = kDefaultMomentCount);

struct RSquared {
  double value;  // clipped to [0,1]
  double raw;
};

/// 1 - <v, Sigma v> / <v, Q v>. Throws ZeroVariance if <v,Qv> is negligible.
RSquared r_squared(const GridFunction& v, const OperatorRep& Q, const OperatorRep& Sigma);

struct DecompositionReport {
  GridFunction v;
  /// pi[k-1] = <v, A Q u_k>^2 / <v, Q v>.
  Eigen::VectorXd pi;
  std::optional<RSquared> r2;

  /// 1 - R^2 when Sigma was supplied.
  std::optional<double> residual_share() const {
    if (!r2) return std::nullopt;
    return 1.0 - r2->value;
  }
};

DecompositionReport variance_decomposition(const GridFunction& v, const OperatorRep& A, const OperatorRep& Q,
                                           const MomentBasis& basis,
                                           const std::optional<OperatorRep>& Sigma = std::nullopt);

}  // namespace far
