#pragma once

#include <string>
#include <utility>
#include <vector>

#include "far/function_space.hpp"

namespace far {

enum class Kernel { Epanechnikov, Normal };

Kernel parse_kernel(const std::string& name);
std::string to_string(Kernel kernel);

/// Raw observations of one period.
struct PeriodBlock {
  std::string label;
  std::vector<double> observations;
};

/// Periods ordered by label (natural order: "2" < "10").
class RawPanel {
 public:
  RawPanel() = default;
  /// Validates blocks (nonempty, finite) and sorts them stably by label;
  /// duplicate labels are rejected.
  explicit RawPanel(std::vector<PeriodBlock> blocks);

  const std::vector<PeriodBlock>& blocks() const noexcept { return blocks_; }
  std::size_t periods() const noexcept { return blocks_.size(); }
  std::size_t total_observations() const noexcept;

 private:
  std::vector<PeriodBlock> blocks_;
};

/// Label comparison that orders embedded digit runs numerically.
bool natural_less(const std::string& lhs, const std::string& rhs);

/// Time series of densities on a common grid.
struct DensityPanel {
  Grid grid;
  std::vector<GridFunction> densities;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return densities.size(); }
  /// First `count` periods.
  DensityPanel prefix(std::size_t count) const;
};

struct Support {
  double a;
  double b;
};

/// Pooled empirical quantiles at (1-coverage)/2 and (1+coverage)/2, widened by
/// one rule-of-thumb bandwidth (pooled sd, median period size) on each side.
Support select_support(const RawPanel& panel, double coverage, Kernel kernel = Kernel::Epanechnikov);

/// Rule-of-thumb bandwidth: 2.3449 * sd * n^(-1/5) (Epanechnikov) or
/// 1.06 * sd * n^(-1/5) (normal).
double bandwidth(double sigma_hat, std::size_t n, Kernel kernel);

/// Unbiased (n-1) sample standard deviation.
double sample_sd(const std::vector<double>& x);

/// Kernel density estimate on the grid, renormalized to unit quadrature mass.
GridFunction kde(const std::vector<double>& observations, const Grid& grid, Kernel kernel, double h);

/// Per-period KDE with per-period rule-of-thumb bandwidths.
DensityPanel estimate_panel(const RawPanel& panel, const Grid& grid, Kernel kernel);

}  // namespace far
