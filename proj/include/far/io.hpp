#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "far/density_estimation.hpp"
#include "far/dynamics_analysis.hpp"
#include "far/far_estimation.hpp"
#include "far/simulation.hpp"

namespace far {

// --- observations -----------------------------------------------------------

/// CSV with header `period,value`. Rows may be grouped or interleaved by
/// period; blank lines are skipped. Fields are not quoted.
RawPanel read_observations(const std::filesystem::path& path);
RawPanel parse_observations(std::istream& in);

// --- model files ------------------------------------------------------------

enum class ModelFormat { Json, Binary };

/// ".json" selects JSON, anything else binary.
ModelFormat model_format_for(const std::filesystem::path& path);

/// Binary layout, all little-endian: "FARM", u32 version, f64 a, f64 b,
/// u64 n, u64 K, u64 T, u64 eigen count m, u64 residual count r, then f64
/// arrays f_bar[n], eigenvalues[m], eigenfunctions[n*m], A_hat[n*n],
/// Sigma_hat[n*n], Q_hat[n*n], P_hat[n*n], residuals[r*n], w_1[n], w_T[n].
/// Matrices are row-major.
void save_model(const FarModel& model, const std::filesystem::path& path, ModelFormat format);
void save_model(const FarModel& model, const std::filesystem::path& path);
/// Detects the encoding from the leading bytes.
FarModel load_model(const std::filesystem::path& path);

std::string encode_model_binary(const FarModel& model);
FarModel decode_model_binary(const std::string& bytes);
std::string encode_model_json(const FarModel& model);
FarModel decode_model_json(const std::string& text);

// --- text output ------------------------------------------------------------

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

/// Writes to a temporary sibling and renames it over the target, so readers
/// never see a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string to_string() const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Two columns `x,density`; the abscissae must form a uniform grid.
void write_density_csv(const std::filesystem::path& path, const GridFunction& f);
GridFunction read_density_csv(const std::filesystem::path& path);

// --- functionals ------------------------------------------------------------

/// Functional descriptors: "moment:p", "left[:tau]", "right[:tau]",
/// "tails[:lo:hi]". Missing thresholds default to the 5th and 95th
/// percentiles of f_bar.
GridFunction parse_functional(const std::string& descriptor, const GridFunction& f_bar);

// --- configuration ----------------------------------------------------------

struct GridSettings {
  /// Explicit support; when absent it is chosen from the data by coverage.
  std::optional<double> a;
  std::optional<double> b;
  std::size_t n = GridSpec::kDefaultPoints;
  double coverage = 0.999;
};

struct AnalysisSettings {
  std::size_t features = 3;
  std::vector<std::string> irf;
  std::vector<std::string> vardecomp;
  std::size_t kmax = kDefaultMomentCount;
  std::vector<std::string> tails;
};

struct BootstrapSettings {
  std::size_t B = 0;  // 0 disables
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

/// End-to-end run: read, estimate, analyze, optionally bootstrap and backtest.
struct PipelineConfig {
  std::filesystem::path input;
  GridSettings grid;
  Kernel kernel = Kernel::Epanechnikov;
  std::optional<std::size_t> K;
  std::vector<std::size_t> K_candidates = {1, 2, 3, 4, 5, 6, 7, 8};
  std::size_t n_validation = 5;
  AnalysisSettings analysis;
  BootstrapSettings bootstrap;
  std::size_t n_test = 0;  // 0 disables the backtest
  std::filesystem::path output_dir = ".";
};

/// Relative paths are resolved against the config file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(const std::string& text, const std::filesystem::path& base_dir);

StudyConfig load_study_config(const std::filesystem::path& path);
StudyConfig parse_study_config(const std::string& text, const std::filesystem::path& base_dir);

/// Parses "1..8", "1,2,4" or a mix such as "1..3,6".
std::vector<std::size_t> parse_count_list(const std::string& text);

}  // namespace far
