#include "far/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace far {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

Eigen::VectorXd sqrt_weights(const GridSpec& grid) { return grid.weights().array().sqrt(); }

}  // namespace

GridSpec::GridSpec(double a, double b, std::size_t n)
    : a_(a), b_(b), step_((b - a) / static_cast<double>(n - 1)), points_(n), weights_(n) {
  const auto last = static_cast<Eigen::Index>(n - 1);
  for (Eigen::Index i = 0; i <= last; ++i) {
    points_[i] = a + static_cast<double>(i) * step_;
    weights_[i] = step_;
  }
  points_[last] = b;
  weights_[0] = weights_[last] = 0.5 * step_;
}

Grid make_grid(double a, double b, std::size_t n) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, ErrorCode::InvalidSupport,
          "support requires a < b (got a=" + std::to_string(a) + ", b=" + std::to_string(b) + ")");
  require(n >= GridSpec::kMinPoints, ErrorCode::GridTooSmall,
          "grid needs at least " + std::to_string(GridSpec::kMinPoints) + " points, got " +
              std::to_string(n));
  return Grid(new GridSpec(a, b, n));
}

bool same_grid(const Grid& lhs, const Grid& rhs) noexcept {
  if (lhs == rhs) return true;
  if (!lhs || !rhs) return false;
  return lhs->same_as(*rhs);
}

void check_same_grid(const Grid& lhs, const Grid& rhs) {
  require(same_grid(lhs, rhs), ErrorCode::GridMismatch, "operands live on different grids");
}

// --- GridFunction -----------------------------------------------------------

GridFunction::GridFunction(Grid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, ErrorCode::InvalidArgument, "grid function without a grid");
  require(static_cast<std::size_t>(values_.size()) == grid_->size(), ErrorCode::GridMismatch,
          "value count " + std::to_string(values_.size()) + " does not match grid size " +
              std::to_string(grid_->size()));
  require(values_.allFinite(), ErrorCode::InvalidArgument, "grid function values must be finite");
}

GridFunction GridFunction::zero(const Grid& grid) {
  return GridFunction(grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->size())));
}

GridFunction GridFunction::constant(const Grid& grid, double value) {
  return GridFunction(grid, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid->size()), value));
}

GridFunction& GridFunction::operator+=(const GridFunction& rhs) {
  check_same_grid(grid_, rhs.grid_);
  values_ += rhs.values_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& rhs) {
  check_same_grid(grid_, rhs.grid_);
  values_ -= rhs.values_;
  return *this;
}

GridFunction& GridFunction::operator*=(double c) {
  values_ *= c;
  return *this;
}

GridFunction operator+(GridFunction lhs, const GridFunction& rhs) { return lhs += rhs; }
GridFunction operator-(GridFunction lhs, const GridFunction& rhs) { return lhs -= rhs; }
GridFunction operator*(double c, GridFunction f) { return f *= c; }
GridFunction operator*(GridFunction f, double c) { return f *= c; }

// --- OperatorRep ------------------------------------------------------------

OperatorRep::OperatorRep(Grid grid, Eigen::MatrixXd kernel) : grid_(std::move(grid)), kernel_(std::move(kernel)) {
  require(grid_ != nullptr, ErrorCode::InvalidArgument, "operator without a grid");
  const auto n = static_cast<Eigen::Index>(grid_->size());
  require(kernel_.rows() == n && kernel_.cols() == n, ErrorCode::GridMismatch,
          "kernel shape does not match grid size " + std::to_string(n));
  require(all_finite(kernel_), ErrorCode::InvalidArgument, "kernel entries must be finite");
}

OperatorRep OperatorRep::zero(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return OperatorRep(grid, Eigen::MatrixXd::Zero(n, n));
}

OperatorRep OperatorRep::identity(const Grid& grid) {
  Eigen::MatrixXd kernel = grid->weights().cwiseInverse().asDiagonal();
  return OperatorRep(grid, std::move(kernel));
}

OperatorRep& OperatorRep::operator+=(const OperatorRep& rhs) {
  check_same_grid(grid_, rhs.grid_);
  kernel_ += rhs.kernel_;
  return *this;
}

OperatorRep& OperatorRep::operator*=(double c) {
  kernel_ *= c;
  return *this;
}

OperatorRep operator+(OperatorRep lhs, const OperatorRep& rhs) { return lhs += rhs; }
OperatorRep operator-(OperatorRep lhs, const OperatorRep& rhs) { return lhs += (-1.0) * rhs; }
OperatorRep operator*(double c, OperatorRep op) { return op *= c; }

// --- EigenSystem ------------------------------------------------------------

EigenSystem::EigenSystem(Grid grid, Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenfunctions)
    : grid_(std::move(grid)), values_(std::move(eigenvalues)), vectors_(std::move(eigenfunctions)) {
  require(static_cast<std::size_t>(vectors_.rows()) == grid_->size() && vectors_.cols() == values_.size(),
          ErrorCode::GridMismatch, "eigenfunction matrix shape mismatch");
}

GridFunction EigenSystem::eigenfunction(std::size_t k) const {
  return GridFunction(grid_, vectors_.col(static_cast<Eigen::Index>(k)));
}

// --- Core numerics ----------------------------------------------------------

double inner(const GridFunction& f, const GridFunction& g) {
  check_same_grid(f.grid(), g.grid());
  return (f.grid()->weights().array() * f.values().array() * g.values().array()).sum();
}

double norm(const GridFunction& f) { return std::sqrt(inner(f, f)); }

double integral(const GridFunction& f) { return f.grid()->weights().dot(f.values()); }

GridFunction project_zero_integral(const GridFunction& f) {
  const double shift = integral(f) / f.grid()->length();
  return GridFunction(f.grid(), f.values().array() - shift);
}

OperatorRep outer(const GridFunction& u, const GridFunction& v) {
  check_same_grid(u.grid(), v.grid());
  return OperatorRep(u.grid(), u.values() * v.values().transpose());
}

GridFunction apply_operator(const OperatorRep& op, const GridFunction& g) {
  check_same_grid(op.grid(), g.grid());
  Eigen::VectorXd weighted = op.grid()->weights().cwiseProduct(g.values());
  return GridFunction(op.grid(), op.kernel() * weighted);
}

OperatorRep adjoint(const OperatorRep& op) { return OperatorRep(op.grid(), op.kernel().transpose()); }

OperatorRep compose(const OperatorRep& lhs, const OperatorRep& rhs) {
  check_same_grid(lhs.grid(), rhs.grid());
  Eigen::MatrixXd kernel = lhs.kernel() * lhs.grid()->weights().asDiagonal() * rhs.kernel();
  return OperatorRep(lhs.grid(), std::move(kernel));
}

double quadratic_form(const GridFunction& f, const OperatorRep& op, const GridFunction& g) {
  return inner(f, apply_operator(op, g));
}

double trace(const OperatorRep& op) { return op.grid()->weights().dot(op.kernel().diagonal()); }

namespace detail {

void apply_sign_convention(Eigen::MatrixXd& columns, Eigen::MatrixXd* companion) {
  for (Eigen::Index k = 0; k < columns.cols(); ++k) {
    auto col = columns.col(k);
    const double peak = col.cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    // First index within rounding of the peak, so symmetric shapes resolve
    // the same way regardless of last-bit noise.
    Eigen::Index pick = 0;
    while (std::abs(col[pick]) < peak * (1.0 - 1e-9)) ++pick;
    if (col[pick] < 0.0) {
      col *= -1.0;
      if (companion != nullptr) companion->col(k) *= -1.0;
    }
  }
}

}  // namespace detail

EigenSystem eigh_operator(const OperatorRep& op) {
  const Eigen::MatrixXd& kernel = op.kernel();
  const double scale = std::max(1.0, kernel.cwiseAbs().maxCoeff());
  const double asym = (kernel - kernel.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10 * scale, ErrorCode::NotSymmetric,
          "kernel asymmetry " + std::to_string(asym) + " exceeds tolerance");

  const Eigen::VectorXd root = sqrt_weights(*op.grid());
  Eigen::MatrixXd sym = root.asDiagonal() * kernel * root.asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  require(solver.info() == Eigen::Success, ErrorCode::NonPSD, "symmetric eigensolver failed");

  // Eigen returns ascending order; reverse.
  const Eigen::Index n = sym.rows();
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  const double top = std::max(values[0], 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (values[k] < 0.0) {
      require(values[k] >= -1e-12 * top, ErrorCode::NonPSD,
              "eigenvalue " + std::to_string(values[k]) + " is below the nonnegativity tolerance");
      values[k] = 0.0;
    }
  }

  vectors = root.cwiseInverse().asDiagonal() * vectors;
  detail::apply_sign_convention(vectors);
  return EigenSystem(op.grid(), std::move(values), std::move(vectors));
}

SingularSystem svd_operator(const OperatorRep& op, std::size_t m) {
  const auto n = op.grid()->size();
  require(m >= 1 && m <= n, ErrorCode::InvalidArgument,
          "requested " + std::to_string(m) + " singular triplets on a grid of " + std::to_string(n));
  const Eigen::VectorXd root = sqrt_weights(*op.grid());
  Eigen::MatrixXd scaled = root.asDiagonal() * op.kernel() * root.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const auto count = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd left = root.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(count);
  Eigen::MatrixXd right = root.cwiseInverse().asDiagonal() * svd.matrixV().leftCols(count);
  detail::apply_sign_convention(left, &right);

  SingularSystem out;
  out.singular_values = svd.singularValues().head(count);
  out.left.reserve(m);
  out.right.reserve(m);
  for (Eigen::Index k = 0; k < count; ++k) {
    out.left.emplace_back(op.grid(), left.col(k));
    out.right.emplace_back(op.grid(), right.col(k));
  }
  return out;
}

GridFunction cdf_from_density(const GridFunction& f) {
  const Eigen::VectorXd& v = f.values();
  require(v.minCoeff() >= -1e-12, ErrorCode::NegativeDensity,
          "density has value " + std::to_string(v.minCoeff()) + " below zero");
  const double h = f.grid()->step();
  Eigen::VectorXd cdf(v.size());
  cdf[0] = 0.0;
  for (Eigen::Index i = 1; i < v.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
  return GridFunction(f.grid(), std::move(cdf));
}

double quantile(const GridFunction& f, double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "quantile level must lie in (0,1)");
  const GridFunction cdf = cdf_from_density(f);
  const Eigen::VectorXd& c = cdf.values();
  const Eigen::VectorXd& x = f.grid()->points();
  const Eigen::Index n = c.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c[i] >= p) {
      if (i == 0) return x[0];
      const double span = c[i] - c[i - 1];
      const double theta = span > 0.0 ? (p - c[i - 1]) / span : 1.0;
      return x[i - 1] + theta * (x[i] - x[i - 1]);
    }
  }
  return x[n - 1];
}

double interpolate(const GridFunction& f, double x) {
  const GridSpec& grid = *f.grid();
  if (x <= grid.a()) return f.values()[0];
  const auto last = static_cast<Eigen::Index>(grid.size() - 1);
  if (x >= grid.b()) return f.values()[last];
  const double pos = (x - grid.a()) / grid.step();
  auto i = static_cast<Eigen::Index>(pos);
  if (i >= last) i = last - 1;
  const double theta = pos - static_cast<double>(i);
  return (1.0 - theta) * f.values()[i] + theta * f.values()[i + 1];
}

}  // namespace far
