#include "far/density_estimation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>

#include "far/parallel.hpp"

namespace far {

namespace {

constexpr double kEpanechnikovConstant = 2.3449;
constexpr double kNormalConstant = 1.06;
// Normal kernel contributions beyond this many bandwidths are below 1e-17.
constexpr double kNormalCutoff = 9.0;

double empirical_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double theta = pos - static_cast<double>(lo);
  return sorted[lo] + theta * (sorted[hi] - sorted[lo]);
}

void add_epanechnikov(Eigen::VectorXd& acc, const GridSpec& grid, double x, double h) {
  const double step = grid.step();
  const auto n = static_cast<long>(grid.size());
  const long first = std::max(0L, static_cast<long>(std::ceil((x - h - grid.a()) / step)));
  const long last = std::min(n - 1, static_cast<long>(std::floor((x + h - grid.a()) / step)));
  for (long i = first; i <= last; ++i) {
    const double u = (grid.points()[i] - x) / h;
    if (u > -1.0 && u < 1.0) acc[i] += 0.75 * (1.0 - u * u);
  }
}

// Gaussian bumps evaluated outward from the nearest grid point with the
// ratio recurrence exp(-(d+s)^2/2) = exp(-d^2/2) * exp(-(2ds+s^2)/2).
void add_normal(Eigen::VectorXd& acc, const GridSpec& grid, double x, double h) {
  const double step = grid.step();
  const auto n = static_cast<long>(grid.size());
  const double s = step / h;
  const double q = std::exp(-s * s);
  const long reach = static_cast<long>(std::ceil(kNormalCutoff / s));
  long c = std::lround((x - grid.a()) / step);
  c = std::clamp(c, 0L, n - 1);
  const double d = (grid.points()[c] - x) / h;
  const double peak = std::exp(-0.5 * d * d);
  acc[c] += peak;

  double g = peak;
  double r = std::exp(-(2.0 * d * s + s * s) * 0.5);
  for (long i = c + 1; i < n && i - c <= reach; ++i) {
    g *= r;
    r *= q;
    acc[i] += g;
  }
  g = peak;
  r = std::exp(-(-2.0 * d * s + s * s) * 0.5);
  for (long i = c - 1; i >= 0 && c - i <= reach; --i) {
    g *= r;
    r *= q;
    acc[i] += g;
  }
}

}  // namespace

Kernel parse_kernel(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "epanechnikov") return Kernel::Epanechnikov;
  if (lower == "normal" || lower == "gaussian") return Kernel::Normal;
  fail(ErrorCode::InvalidArgument, "unknown kernel '" + name + "' (expected epanechnikov or normal)");
}

std::string to_string(Kernel kernel) { return kernel == Kernel::Epanechnikov ? "epanechnikov" : "normal"; }

bool natural_less(const std::string& lhs, const std::string& rhs) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < lhs.size() && j < rhs.size()) {
    const bool ldigit = std::isdigit(static_cast<unsigned char>(lhs[i])) != 0;
    const bool rdigit = std::isdigit(static_cast<unsigned char>(rhs[j])) != 0;
    if (ldigit && rdigit) {
      std::size_t ie = i;
      std::size_t je = j;
      while (ie < lhs.size() && std::isdigit(static_cast<unsigned char>(lhs[ie]))) ++ie;
      while (je < rhs.size() && std::isdigit(static_cast<unsigned char>(rhs[je]))) ++je;
      std::size_t is = i;
      std::size_t js = j;
      while (is + 1 < ie && lhs[is] == '0') ++is;
      while (js + 1 < je && rhs[js] == '0') ++js;
      if (ie - is != je - js) return ie - is < je - js;
      const int cmp = lhs.compare(is, ie - is, rhs, js, je - js);
      if (cmp != 0) return cmp < 0;
      if (ie - i != je - j) return ie - i < je - j;
      i = ie;
      j = je;
    } else {
      if (lhs[i] != rhs[j]) return lhs[i] < rhs[j];
      ++i;
      ++j;
    }
  }
  return lhs.size() - i < rhs.size() - j;
}

RawPanel::RawPanel(std::vector<PeriodBlock> blocks) : blocks_(std::move(blocks)) {
  for (const auto& block : blocks_) {
    require(!block.observations.empty(), ErrorCode::TooFewObservations,
            "period '" + block.label + "' has no observations");
    for (double x : block.observations)
      require(std::isfinite(x), ErrorCode::InvalidArgument, "period '" + block.label + "' has a non-finite value");
  }
  std::stable_sort(blocks_.begin(), blocks_.end(),
                   [](const PeriodBlock& l, const PeriodBlock& r) { return natural_less(l.label, r.label); });
  for (std::size_t t = 1; t < blocks_.size(); ++t)
    require(natural_less(blocks_[t - 1].label, blocks_[t].label), ErrorCode::InvalidArgument,
            "duplicate period label '" + blocks_[t].label + "'");
}

std::size_t RawPanel::total_observations() const noexcept {
  std::size_t total = 0;
  for (const auto& block : blocks_) total += block.observations.size();
  return total;
}

DensityPanel DensityPanel::prefix(std::size_t count) const {
  require(count <= densities.size(), ErrorCode::InvalidArgument, "prefix longer than panel");
  DensityPanel out{grid, {}, {}};
  out.densities.assign(densities.begin(), densities.begin() + static_cast<std::ptrdiff_t>(count));
  out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

double sample_sd(const std::vector<double>& x) {
  require(x.size() >= 2, ErrorCode::TooFewObservations, "standard deviation needs at least 2 observations");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double bandwidth(double sigma_hat, std::size_t n, Kernel kernel) {
  require(n >= 2, ErrorCode::InvalidArgument, "bandwidth needs n >= 2");
  require(sigma_hat > 0.0 && std::isfinite(sigma_hat), ErrorCode::DegenerateSample,
          "bandwidth needs a positive standard deviation");
  const double constant = kernel == Kernel::Epanechnikov ? kEpanechnikovConstant : kNormalConstant;
  return constant * sigma_hat * std::pow(static_cast<double>(n), -0.2);
}

Support select_support(const RawPanel& panel, double coverage, Kernel kernel) {
  require(coverage > 0.5 && coverage < 1.0, ErrorCode::InvalidArgument, "coverage must lie in (0.5, 1)");
  std::vector<double> pooled;
  pooled.reserve(panel.total_observations());
  std::vector<std::size_t> counts;
  for (const auto& block : panel.blocks()) {
    pooled.insert(pooled.end(), block.observations.begin(), block.observations.end());
    counts.push_back(block.observations.size());
  }
  require(pooled.size() >= 100, ErrorCode::TooFewObservations,
          "support selection needs at least 100 pooled observations, got " + std::to_string(pooled.size()));
  const double sd = sample_sd(pooled);
  require(sd > 0.0, ErrorCode::DegenerateSample, "pooled sample has zero variance");

  std::sort(pooled.begin(), pooled.end());
  const double tail = 0.5 * (1.0 - coverage);
  const double lo = empirical_quantile(pooled, tail);
  const double hi = empirical_quantile(pooled, 1.0 - tail);

  std::nth_element(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(counts.size() / 2), counts.end());
  const std::size_t typical = std::max<std::size_t>(2, counts[counts.size() / 2]);
  const double h = bandwidth(sd, typical, kernel);
  return {lo - h, hi + h};
}

GridFunction kde(const std::vector<double>& observations, const Grid& grid, Kernel kernel, double h) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::BandwidthNonpositive, "bandwidth must be positive");
  require(observations.size() >= 2, ErrorCode::TooFewObservations, "KDE needs at least 2 observations");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->size()));
  for (double x : observations) {
    if (kernel == Kernel::Epanechnikov)
      add_epanechnikov(acc, *grid, x, h);
    else
      add_normal(acc, *grid, x, h);
  }
  if (kernel == Kernel::Normal) acc *= 1.0 / std::sqrt(2.0 * std::numbers::pi);
  acc /= static_cast<double>(observations.size()) * h;

  const double mass = grid->weights().dot(acc);
  require(mass > 0.0, ErrorCode::DegenerateSample, "no kernel mass falls inside the support");
  acc /= mass;
  return GridFunction(grid, std::move(acc));
}

DensityPanel estimate_panel(const RawPanel& panel, const Grid& grid, Kernel kernel) {
  const auto& blocks = panel.blocks();
  std::vector<std::optional<GridFunction>> slots(blocks.size());
  parallel_for(blocks.size(), [&](std::size_t t) {
    const auto& block = blocks[t];
    try {
      const double sd = sample_sd(block.observations);
      const double h = bandwidth(sd, block.observations.size(), kernel);
      slots[t] = kde(block.observations, grid, kernel, h);
    } catch (const Error& e) {
      throw Error(e.code(), "period '" + block.label + "': " + e.what());
    }
  });
  DensityPanel out{grid, {}, {}};
  out.densities.reserve(blocks.size());
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    out.densities.push_back(std::move(*slots[t]));
    out.labels.push_back(blocks[t].label);
  }
  return out;
}

}  // namespace far
