#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <vector>

#include "far/error.hpp"

/// @file
/// Discretized L2([a,b]): functions are values on a shared uniform grid,
/// integral operators are kernel matrices, and every inner product is the
/// trapezoid quadrature on that grid.

namespace far {

class GridSpec;
using Grid = std::shared_ptr<const GridSpec>;

/// Uniform grid on [a,b] with trapezoid weights. Immutable; shared by every
/// function and operator defined on it.
class GridSpec {
 public:
  static constexpr std::size_t kMinPoints = 16;
  static constexpr std::size_t kDefaultPoints = 512;

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.size()); }
  double step() const noexcept { return step_; }
  double length() const noexcept { return b_ - a_; }
  const Eigen::VectorXd& points() const noexcept { return points_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  /// Same support and resolution (hence identical abscissae and weights).
  bool same_as(const GridSpec& other) const noexcept {
    return a_ == other.a_ && b_ == other.b_ && size() == other.size();
  }

 private:
  friend Grid make_grid(double a, double b, std::size_t n);
  GridSpec(double a, double b, std::size_t n);

  double a_;
  double b_;
  double step_;
  Eigen::VectorXd points_;
  Eigen::VectorXd weights_;
};

/// Uniform grid with trapezoid weights h/2, h, ..., h, h/2.
/// Throws InvalidSupport if a >= b and GridTooSmall if n < 16.
Grid make_grid(double a, double b, std::size_t n = GridSpec::kDefaultPoints);

bool same_grid(const Grid& lhs, const Grid& rhs) noexcept;
void check_same_grid(const Grid& lhs, const Grid& rhs);

/// A function sampled on a grid. Values are always finite.
class GridFunction {
 public:
  GridFunction(Grid grid, Eigen::VectorXd values);

  static GridFunction zero(const Grid& grid);
  static GridFunction constant(const Grid& grid, double value);
  /// Samples fn at every grid point.
  template <class Fn>
  static GridFunction sample(const Grid& grid, Fn&& fn) {
    Eigen::VectorXd v(grid->size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = fn(grid->points()[i]);
    return GridFunction(grid, std::move(v));
  }

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  GridFunction& operator+=(const GridFunction& rhs);
  GridFunction& operator-=(const GridFunction& rhs);
  GridFunction& operator*=(double c);

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

GridFunction operator+(GridFunction lhs, const GridFunction& rhs);
GridFunction operator-(GridFunction lhs, const GridFunction& rhs);
GridFunction operator*(double c, GridFunction f);
GridFunction operator*(GridFunction f, double c);

/// Integral operator with kernel k(x_i, x_j). Acting on g gives
/// (Kg)(x_i) = sum_j weights[j] * kernel(i,j) * g(x_j).
class OperatorRep {
 public:
  OperatorRep(Grid grid, Eigen::MatrixXd kernel);

  static OperatorRep zero(const Grid& grid);
  /// The operator acting as the identity on grid functions.
  static OperatorRep identity(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& kernel() const noexcept { return kernel_; }

  OperatorRep& operator+=(const OperatorRep& rhs);
  OperatorRep& operator*=(double c);

 private:
  Grid grid_;
  Eigen::MatrixXd kernel_;
};

OperatorRep operator+(OperatorRep lhs, const OperatorRep& rhs);
OperatorRep operator-(OperatorRep lhs, const OperatorRep& rhs);
OperatorRep operator*(double c, OperatorRep op);

/// Eigenpairs of a self-adjoint nonnegative operator, eigenvalues descending,
/// eigenfunctions orthonormal under the quadrature inner product. The entry
/// of largest magnitude in every eigenfunction is positive.
class EigenSystem {
 public:
  EigenSystem(Grid grid, Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenfunctions);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return values_; }
  double eigenvalue(std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }
  /// Column k holds the k-th eigenfunction (0-based).
  const Eigen::MatrixXd& eigenfunctions() const noexcept { return vectors_; }
  GridFunction eigenfunction(std::size_t k) const;

 private:
  Grid grid_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
};

struct SingularSystem {
  Eigen::VectorXd singular_values;
  std::vector<GridFunction> left;
  std::vector<GridFunction> right;
};

double inner(const GridFunction& f, const GridFunction& g);
double norm(const GridFunction& f);
/// <1, f>.
double integral(const GridFunction& f);
/// f - (<1,f>/(b-a)) * 1, which lies in the zero-integral subspace H.
GridFunction project_zero_integral(const GridFunction& f);

/// (u ⊗ v)(g) = <v, g> u.
OperatorRep outer(const GridFunction& u, const GridFunction& v);
GridFunction apply_operator(const OperatorRep& op, const GridFunction& g);
OperatorRep adjoint(const OperatorRep& op);
/// Kernel of the composition lhs ∘ rhs: kernel_lhs * W * kernel_rhs.
OperatorRep compose(const OperatorRep& lhs, const OperatorRep& rhs);
/// <f, K g>.
double quadratic_form(const GridFunction& f, const OperatorRep& op, const GridFunction& g);
/// Trace ∫ k(x,x) dx.
double trace(const OperatorRep& op);

/// Full eigensystem of a symmetric kernel under the quadrature geometry.
/// Throws NotSymmetric or NonPSD (eigenvalue below -1e-12 * lambda_max).
EigenSystem eigh_operator(const OperatorRep& op);

/// Top-m singular triplets under the quadrature geometry. The sign of each
/// pair is fixed so that the left function's largest-magnitude entry is positive.
SingularSystem svd_operator(const OperatorRep& op, std::size_t m);

/// Cumulative trapezoid integral with F(a) = 0. Throws NegativeDensity.
GridFunction cdf_from_density(const GridFunction& f);

/// Smallest abscissa where the CDF reaches p, linearly interpolated between
/// the bracketing grid points.
double quantile(const GridFunction& f, double p);

/// Linear interpolation of grid values at x in [a,b].
double interpolate(const GridFunction& f, double x);

namespace detail {
/// Flips the sign of each column so its largest-magnitude entry is positive;
/// companion columns (if given) are flipped along with it.
void apply_sign_convention(Eigen::MatrixXd& columns, Eigen::MatrixXd* companion = nullptr);
}  // namespace detail

}  // namespace far
