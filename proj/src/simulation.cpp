#include "far/simulation.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "far/parallel.hpp"

namespace far {

namespace {

// Draws innovations for a generator: resampled centered residuals or a
// Gaussian element sum_k sqrt(lambda_k) xi_k phi_k.
class NoiseSource {
 public:
  explicit NoiseSource(const Generator& gen) {
    const auto n = static_cast<Eigen::Index>(gen.grid->size());
    if (!gen.residual_pool.empty()) {
      pool_.resize(n, static_cast<Eigen::Index>(gen.residual_pool.size()));
      for (std::size_t t = 0; t < gen.residual_pool.size(); ++t) {
        check_same_grid(gen.residual_pool[t].grid(), gen.grid);
        pool_.col(static_cast<Eigen::Index>(t)) = gen.residual_pool[t].values();
      }
      const Eigen::VectorXd center = pool_.rowwise().mean();
      pool_.colwise() -= center;
      return;
    }
    require(gen.noise_covariance.has_value(), ErrorCode::InvalidArgument,
            "generator needs a residual pool or a noise covariance");
    check_same_grid(gen.noise_covariance->grid(), gen.grid);
    const EigenSystem eig = eigh_operator(*gen.noise_covariance);
    Eigen::Index r = 0;
    while (r < static_cast<Eigen::Index>(eig.size()) && eig.eigenvalues()[r] > 0.0) ++r;
    factor_ = eig.eigenfunctions().leftCols(r) * eig.eigenvalues().head(r).cwiseSqrt().asDiagonal();
  }

  Eigen::VectorXd draw(Rng& rng) const {
    if (pool_.size() > 0) {
      const auto pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(pool_.cols()));
      return pool_.col(pick);
    }
    Eigen::VectorXd xi(factor_.cols());
    for (Eigen::Index k = 0; k < xi.size(); ++k) xi[k] = standard_normal(rng);
    return factor_ * xi;
  }

 private:
  Eigen::MatrixXd pool_;
  Eigen::MatrixXd factor_;
};

void check_generator(const Generator& gen) {
  require(gen.grid != nullptr, ErrorCode::InvalidArgument, "generator has no grid");
  check_same_grid(gen.mean_density.grid(), gen.grid);
  check_same_grid(gen.A.grid(), gen.grid);
}

std::vector<GridFunction> run_states(const Generator& gen, const NoiseSource& noise, std::size_t T,
                                     std::optional<std::size_t> burn_in, Rng& rng) {
  require(T >= 1, ErrorCode::InvalidArgument, "simulation needs T >= 1");
  const std::size_t keep = T + 1;
  const std::size_t burn = burn_in.value_or(keep >= kDefaultSimulatedPeriods ? 0 : kDefaultSimulatedPeriods - keep);
  const double limit = 1e6 * std::max(norm(gen.mean_density), 1e-300);
  const Eigen::MatrixXd& a = gen.A.kernel();
  const Eigen::VectorXd& weights = gen.grid->weights();

  std::vector<GridFunction> states;
  states.reserve(keep);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gen.grid->size()));
  for (std::size_t t = 0; t < burn + keep; ++t) {
    w = a * weights.cwiseProduct(w) + noise.draw(rng);
    const double size = std::sqrt(weights.dot(w.cwiseAbs2()));
    require(std::isfinite(size) && size <= limit, ErrorCode::UnstableGenerator,
            "simulated path diverged at period " + std::to_string(t + 1));
    if (t >= burn) states.emplace_back(gen.grid, w);
  }
  return states;
}

DensityPanel states_to_panel(const Generator& gen, const std::vector<GridFunction>& states) {
  DensityPanel panel;
  panel.grid = gen.grid;
  for (std::size_t t = 0; t < states.size(); ++t) {
    panel.densities.push_back(to_density(states[t], gen.mean_density));
    panel.labels.push_back(std::to_string(t + 1));
  }
  return panel;
}

}  // namespace

Generator generator_from_model(const FarModel& model) {
  require(!model.residuals.empty(), ErrorCode::TooFewResiduals, "model has no residuals to resample");
  return Generator{model.grid, model.mean_density, model.A_hat, model.residuals, std::nullopt};
}

SyntheticDesign forex_like_design() { return SyntheticDesign{}; }

std::vector<GridFunction> hermite_features(const Grid& grid, double scale, std::size_t count) {
  require(scale > 0.0, ErrorCode::InvalidArgument, "feature scale must be positive");
  const double mid = 0.5 * (grid->a() + grid->b());
  std::vector<GridFunction> basis;
  for (std::size_t k = 1; basis.size() < count; ++k) {
    require(k <= count + 8, ErrorCode::DegenerateMetric, "grid cannot resolve the requested features");
    GridFunction f = GridFunction::sample(grid, [&](double x) {
      const double z = (x - mid) / scale;
      // Probabilists' Hermite polynomial He_k(z) by recurrence.
      double prev = 1.0;
      double cur = z;
      for (std::size_t j = 1; j < k; ++j) {
        const double next = z * cur - static_cast<double>(j) * prev;
        prev = cur;
        cur = next;
      }
      return cur * std::exp(-0.5 * z * z);
    });
    f = project_zero_integral(f);
    const double start = norm(f);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : basis) f -= inner(f, e) * e;
    const double left = norm(f);
    if (left <= 1e-8 * start) continue;
    basis.push_back((1.0 / left) * f);
  }
  return basis;
}

Generator make_synthetic_generator(const SyntheticDesign& design) {
  const Grid grid = make_grid(design.a, design.b, design.grid_points);
  require(design.mean_sd > 0.0, ErrorCode::InvalidArgument, "mean_sd must be positive");
  const std::size_t m = std::max(design.operator_coefficients.size(), design.noise_sd.size());
  require(m >= 1, ErrorCode::InvalidArgument, "design has no feature directions");
  for (double s : design.noise_sd) require(s >= 0.0, ErrorCode::InvalidArgument, "noise sd must be nonnegative");

  const double mid = 0.5 * (design.a + design.b);
  GridFunction f_bar = GridFunction::sample(grid, [&](double x) {
    const double z = (x - mid) / design.mean_sd;
    return std::exp(-0.5 * z * z);
  });
  f_bar *= 1.0 / integral(f_bar);

  const std::vector<GridFunction> e = hermite_features(grid, design.feature_scale * design.mean_sd, m);
  OperatorRep A = OperatorRep::zero(grid);
  for (std::size_t k = 0; k < design.operator_coefficients.size(); ++k)
    A += design.operator_coefficients[k] * outer(e[k], e[k]);
  OperatorRep sigma = OperatorRep::zero(grid);
  for (std::size_t k = 0; k < design.noise_sd.size(); ++k)
    sigma += design.noise_sd[k] * design.noise_sd[k] * outer(e[k], e[k]);
  return Generator{grid, std::move(f_bar), std::move(A), {}, std::move(sigma)};
}

std::vector<double> acceptance_sample(const GridFunction& f, std::size_t n, Rng& rng, std::size_t* proposals) {
  const Eigen::VectorXd& v = f.values();
  require(v.minCoeff() >= -1e-12, ErrorCode::NegativeDensity, "cannot sample from a negative density");
  const double envelope = v.maxCoeff();
  require(envelope > 0.0, ErrorCode::DegenerateDensity, "density is identically zero");
  const double a = f.grid()->a();
  const double len = f.grid()->length();
  std::vector<double> draws;
  draws.reserve(n);
  std::size_t tried = 0;
  while (draws.size() < n) {
    const double x = a + len * uniform01(rng);
    const double u = uniform01(rng);
    ++tried;
    if (u * envelope <= interpolate(f, x)) draws.push_back(x);
  }
  if (proposals) *proposals = tried;
  return draws;
}

std::vector<double> acceptance_sample(const GridFunction& f, std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  return acceptance_sample(f, n, rng);
}

std::vector<GridFunction> simulate_states(const Generator& generator, std::size_t T, std::uint64_t seed,
                                          std::optional<std::size_t> burn_in) {
  check_generator(generator);
  const NoiseSource noise(generator);
  Rng rng = make_stream(seed);
  return run_states(generator, noise, T, burn_in, rng);
}

DensityPanel simulate_far(const Generator& generator, std::size_t T, std::uint64_t seed,
                          std::optional<std::size_t> burn_in) {
  return states_to_panel(generator, simulate_states(generator, T, seed, burn_in));
}

const StudyCell& StudyResult::cell(std::size_t T, std::size_t N) const {
  for (const auto& c : cells)
    if (c.T == T && c.N == N) return c;
  fail(ErrorCode::InvalidArgument, "no study cell for T=" + std::to_string(T) + ", N=" + std::to_string(N));
}

namespace {

std::array<ErrorReport, 3> iteration_with(const StudyConfig& config, const NoiseSource& noise, std::size_t T,
                                          std::size_t N, std::size_t iteration) {
  const Generator& gen = config.generator;
  Rng path_rng = make_stream(config.seed, {T, iteration});
  const DensityPanel truth = states_to_panel(gen, run_states(gen, noise, T, config.burn_in, path_rng));

  Rng sample_rng = make_stream(config.seed, {T, N, iteration});
  DensityPanel estimated;
  estimated.grid = gen.grid;
  for (std::size_t t = 0; t < T; ++t) {
    const std::vector<double> x = acceptance_sample(truth.densities[t], N, sample_rng);
    const double h = bandwidth(sample_sd(x), N, config.kernel);
    estimated.densities.push_back(kde(x, gen.grid, config.kernel, h));
    estimated.labels.push_back(truth.labels[t]);
  }

  const std::size_t K = config.K ? *config.K : select_K_cv(estimated, config.K_candidates, config.n_validation);
  const FarModel model = fit(estimated, K);
  const GridFunction& target = truth.densities[T];
  std::array<ErrorReport, 3> row;
  row[static_cast<std::size_t>(Predictor::Far)] =
      error_metrics(to_density(forecast_one_step(model, model.last_state), model.mean_density), target);
  row[static_cast<std::size_t>(Predictor::Ave)] = error_metrics(predictor_ave(estimated), target);
  row[static_cast<std::size_t>(Predictor::Last)] = error_metrics(predictor_last(estimated), target);
  return row;
}

void check_config(const StudyConfig& config) {
  check_generator(config.generator);
  require(!config.T_values.empty() && !config.N_values.empty(), ErrorCode::InvalidArgument,
          "study needs at least one T and one N");
  require(config.iterations >= 1, ErrorCode::InvalidArgument, "study needs at least one iteration");
  for (std::size_t T : config.T_values) require(T >= 10, ErrorCode::InvalidArgument, "every T must be >= 10");
  for (std::size_t N : config.N_values) require(N >= 10, ErrorCode::InvalidArgument, "every N must be >= 10");
  if (config.K) require(*config.K >= 1, ErrorCode::InvalidArgument, "K must be >= 1");
}

}  // namespace

std::array<ErrorReport, 3> run_iteration(const StudyConfig& config, std::size_t T, std::size_t N,
                                         std::size_t iteration) {
  check_config(config);
  const NoiseSource noise(config.generator);
  return iteration_with(config, noise, T, N, iteration);
}

StudyResult run_study(const StudyConfig& config) {
  check_config(config);
  const NoiseSource noise(config.generator);
  StudyResult result;
  for (std::size_t T : config.T_values) {
    for (std::size_t N : config.N_values) {
      std::vector<std::optional<std::array<ErrorReport, 3>>> slots(config.iterations);
      parallel_for(config.iterations, [&](std::size_t i) {
        try {
          slots[i] = iteration_with(config, noise, T, N, i);
        } catch (const Error& e) {
          if (is_validation_error(e.code())) throw;
        }
      });
      std::vector<std::array<ErrorReport, 3>> rows;
      for (auto& s : slots)
        if (s) rows.push_back(*s);
      const std::size_t dropped = config.iterations - rows.size();
      require(static_cast<double>(dropped) <= 0.02 * static_cast<double>(config.iterations),
              ErrorCode::TooManyFailures,
              std::to_string(dropped) + " of " + std::to_string(config.iterations) +
                  " iterations failed at T=" + std::to_string(T) + ", N=" + std::to_string(N));

      StudyCell cell{T, N, summarize(rows), {}, config.iterations, dropped};
      for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t m = 0; m < ErrorReport::kCount; ++m) {
          const double mean = cell.summary.table[p][m].mean;
          double ss = 0.0;
          for (const auto& row : rows) ss += std::pow(row[p].values()[m] - mean, 2);
          const auto count = static_cast<double>(rows.size());
          cell.std_error[p][m] =
              rows.size() < 2 ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(ss / (count - 1.0) / count);
        }
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

}  // namespace far
