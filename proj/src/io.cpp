#include "far/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace far {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

// --- observations -----------------------------------------------------------

RawPanel parse_observations(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<PeriodBlock> blocks;
  std::map<std::string, std::size_t> index;
  std::size_t rows = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (!header_seen) {
      const auto comma = line.find(',');
      const std::string first = trim(line.substr(0, comma));
      const std::string second = comma == std::string::npos ? std::string() : trim(line.substr(comma + 1));
      if (first != "period") throw ParseError(line_no, 1, "expected header 'period,value'");
      if (second != "value")
        throw ParseError(line_no, comma == std::string::npos ? line.size() + 1 : comma + 2,
                         "expected header 'period,value'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(line_no, line.size() + 1, "expected two fields");
    if (line.find(',', comma + 1) != std::string::npos)
      throw ParseError(line_no, line.find(',', comma + 1) + 1, "too many fields");
    const std::string label = trim(line.substr(0, comma));
    if (label.empty()) throw ParseError(line_no, 1, "empty period label");
    const std::string value_text = trim(line.substr(comma + 1));
    double value = 0.0;
    if (!parse_double(value_text, value)) throw ParseError(line_no, comma + 2, "not a number: '" + value_text + "'");
    if (!std::isfinite(value)) throw ParseError(line_no, comma + 2, "value is not finite");

    auto [it, inserted] = index.try_emplace(label, blocks.size());
    if (inserted) blocks.push_back(PeriodBlock{label, {}});
    blocks[it->second].observations.push_back(value);
    ++rows;
  }
  require(header_seen, ErrorCode::EmptyFile, "observation file is empty");
  require(rows > 0, ErrorCode::EmptyFile, "observation file has a header but no rows");
  return RawPanel(std::move(blocks));
}

RawPanel read_observations(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  return parse_observations(in);
}

// --- model files ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'F', 'A', 'R', 'M'};
constexpr std::uint32_t kModelVersion = 1;

template <class T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

class ByteWriter {
 public:
  template <class T>
  void put(T value) {
    value = to_little(value);
    const auto* p = reinterpret_cast<const char*>(&value);
    out_.append(p, sizeof(T));
  }
  void put_vector(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put(v[i]);
  }
  void put_matrix(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) put(m(i, j));
  }
  void put_raw(const char* data, std::size_t n) { out_.append(data, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(value);
  }
  Eigen::VectorXd get_vector(std::size_t n, const char* what) {
    need(n * sizeof(double), what);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = get<double>(what);
    return v;
  }
  Eigen::MatrixXd get_matrix(std::size_t rows, std::size_t cols, const char* what) {
    need(rows * cols * sizeof(double), what);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>(what);
    return m;
  }
  void expect_magic() {
    need(4, "magic");
    if (std::memcmp(bytes_.data(), kMagic, 4) != 0) throw FormatError(0, "not a model file (bad magic)");
    pos_ = 4;
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) throw FormatError(pos_, "trailing bytes after model data");
  }
  std::size_t offset() const noexcept { return pos_; }

 private:
  void need(std::size_t count, const char* what) const {
    if (bytes_.size() - pos_ < count) throw FormatError(pos_, std::string("file truncated while reading ") + what);
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

struct ModelHeader {
  double a;
  double b;
  std::size_t n;
  std::size_t K;
  std::size_t T;
  std::size_t m;
  std::size_t r;
};

FarModel assemble(const ModelHeader& h, Eigen::VectorXd f_bar, Eigen::VectorXd eigenvalues,
                  Eigen::MatrixXd eigenfunctions, Eigen::MatrixXd a_hat, Eigen::MatrixXd sigma, Eigen::MatrixXd q,
                  Eigen::MatrixXd p, const Eigen::MatrixXd& residuals, Eigen::VectorXd first,
                  Eigen::VectorXd last) {
  const Grid grid = make_grid(h.a, h.b, h.n);
  std::vector<GridFunction> eps;
  for (Eigen::Index t = 0; t < residuals.rows(); ++t) eps.emplace_back(grid, residuals.row(t).transpose());
  return FarModel{grid,
                  GridFunction(grid, std::move(f_bar)),
                  EigenSystem(grid, std::move(eigenvalues), std::move(eigenfunctions)),
                  h.K,
                  OperatorRep(grid, std::move(a_hat)),
                  OperatorRep(grid, std::move(q)),
                  OperatorRep(grid, std::move(p)),
                  OperatorRep(grid, std::move(sigma)),
                  std::move(eps),
                  h.T,
                  GridFunction(grid, std::move(first)),
                  GridFunction(grid, std::move(last))};
}

Eigen::MatrixXd residual_matrix(const FarModel& model) {
  Eigen::MatrixXd r(static_cast<Eigen::Index>(model.residuals.size()), static_cast<Eigen::Index>(model.grid->size()));
  for (std::size_t t = 0; t < model.residuals.size(); ++t)
    r.row(static_cast<Eigen::Index>(t)) = model.residuals[t].values().transpose();
  return r;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Eigen::RowVectorXd row = m.row(i);
    rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  return rows;
}

[[noreturn]] void bad_json(const std::string& what) { throw FormatError(0, "model JSON: " + what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad_json(std::string("missing field '") + key + "'");
  return j.at(key);
}

Eigen::VectorXd json_vector(const json& j, std::size_t n, const char* key) {
  if (!j.is_array() || j.size() != n) bad_json(std::string("field '") + key + "' has the wrong length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_number()) bad_json(std::string("field '") + key + "' holds a non-number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd json_matrix(const json& j, std::size_t rows, std::size_t cols, const char* key) {
  if (!j.is_array() || j.size() != rows) bad_json(std::string("field '") + key + "' has the wrong row count");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) m.row(static_cast<Eigen::Index>(i)) = json_vector(j[i], cols, key).transpose();
  return m;
}

std::size_t json_count(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_unsigned()) bad_json(std::string("field '") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

}  // namespace

ModelFormat model_format_for(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".json" ? ModelFormat::Json : ModelFormat::Binary;
}

std::string encode_model_binary(const FarModel& model) {
  const std::size_t n = model.grid->size();
  ByteWriter w;
  w.put_raw(kMagic, 4);
  w.put(kModelVersion);
  w.put(model.grid->a());
  w.put(model.grid->b());
  w.put(static_cast<std::uint64_t>(n));
  w.put(static_cast<std::uint64_t>(model.K));
  w.put(static_cast<std::uint64_t>(model.sample_size));
  w.put(static_cast<std::uint64_t>(model.eigen.size()));
  w.put(static_cast<std::uint64_t>(model.residuals.size()));
  w.put_vector(model.mean_density.values());
  w.put_vector(model.eigen.eigenvalues());
  w.put_matrix(model.eigen.eigenfunctions());
  w.put_matrix(model.A_hat.kernel());
  w.put_matrix(model.Sigma_hat.kernel());
  w.put_matrix(model.Q_hat.kernel());
  w.put_matrix(model.P_hat.kernel());
  w.put_matrix(residual_matrix(model));
  w.put_vector(model.first_state.values());
  w.put_vector(model.last_state.values());
  return w.take();
}

FarModel decode_model_binary(const std::string& bytes) {
  ByteReader r(bytes);
  r.expect_magic();
  const std::size_t version_at = r.offset();
  const auto version = r.get<std::uint32_t>("version");
  if (version != kModelVersion) throw FormatError(version_at, "unsupported model version " + std::to_string(version));
  ModelHeader h{};
  h.a = r.get<double>("grid header");
  h.b = r.get<double>("grid header");
  const std::size_t n_at = r.offset();
  h.n = r.get<std::uint64_t>("grid header");
  h.K = r.get<std::uint64_t>("K");
  h.T = r.get<std::uint64_t>("sample size");
  const std::size_t m_at = r.offset();
  h.m = r.get<std::uint64_t>("eigen count");
  h.r = r.get<std::uint64_t>("residual count");
  if (!(h.a < h.b) || h.n < GridSpec::kMinPoints || h.n > (1u << 15))
    throw FormatError(n_at, "implausible grid header");
  if (h.m > h.n || h.r > (bytes.size() / 8) / h.n) throw FormatError(m_at, "implausible array sizes");

  Eigen::VectorXd f_bar = r.get_vector(h.n, "mean density");
  Eigen::VectorXd values = r.get_vector(h.m, "eigenvalues");
  Eigen::MatrixXd vectors = r.get_matrix(h.n, h.m, "eigenfunctions");
  Eigen::MatrixXd a_hat = r.get_matrix(h.n, h.n, "A_hat");
  Eigen::MatrixXd sigma = r.get_matrix(h.n, h.n, "Sigma_hat");
  Eigen::MatrixXd q = r.get_matrix(h.n, h.n, "Q_hat");
  Eigen::MatrixXd p = r.get_matrix(h.n, h.n, "P_hat");
  const Eigen::MatrixXd eps = r.get_matrix(h.r, h.n, "residuals");
  Eigen::VectorXd first = r.get_vector(h.n, "first state");
  Eigen::VectorXd last = r.get_vector(h.n, "last state");
  r.expect_end();
  return assemble(h, std::move(f_bar), std::move(values), std::move(vectors), std::move(a_hat), std::move(sigma),
                  std::move(q), std::move(p), eps, std::move(first), std::move(last));
}

std::string encode_model_json(const FarModel& model) {
  json j;
  j["format"] = "far-model";
  j["version"] = kModelVersion;
  j["grid"] = {{"a", model.grid->a()}, {"b", model.grid->b()}, {"n", model.grid->size()}};
  j["K"] = model.K;
  j["sample_size"] = model.sample_size;
  j["mean_density"] = vector_json(model.mean_density.values());
  j["eigenvalues"] = vector_json(model.eigen.eigenvalues());
  j["eigenfunctions"] = matrix_json(model.eigen.eigenfunctions());
  j["A_hat"] = matrix_json(model.A_hat.kernel());
  j["Sigma_hat"] = matrix_json(model.Sigma_hat.kernel());
  j["Q_hat"] = matrix_json(model.Q_hat.kernel());
  j["P_hat"] = matrix_json(model.P_hat.kernel());
  j["residuals"] = matrix_json(residual_matrix(model));
  j["first_state"] = vector_json(model.first_state.values());
  j["last_state"] = vector_json(model.last_state.values());
  return j.dump() + "\n";
}

FarModel decode_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(e.byte, std::string("model JSON is malformed: ") + e.what());
  }
  if (field(j, "format") != "far-model") bad_json("not a model file");
  if (json_count(j, "version") != kModelVersion) bad_json("unsupported model version");
  const json& g = field(j, "grid");
  if (!field(g, "a").is_number() || !field(g, "b").is_number()) bad_json("grid support must be numeric");
  ModelHeader h{};
  h.a = g.at("a").get<double>();
  h.b = g.at("b").get<double>();
  h.n = json_count(g, "n");
  h.K = json_count(j, "K");
  h.T = json_count(j, "sample_size");
  h.m = field(j, "eigenvalues").size();
  h.r = field(j, "residuals").size();
  if (!(h.a < h.b) || h.n < GridSpec::kMinPoints) bad_json("implausible grid header");

  return assemble(h, json_vector(j["mean_density"], h.n, "mean_density"),
                  json_vector(j["eigenvalues"], h.m, "eigenvalues"),
                  json_matrix(field(j, "eigenfunctions"), h.n, h.m, "eigenfunctions"),
                  json_matrix(field(j, "A_hat"), h.n, h.n, "A_hat"),
                  json_matrix(field(j, "Sigma_hat"), h.n, h.n, "Sigma_hat"),
                  json_matrix(field(j, "Q_hat"), h.n, h.n, "Q_hat"), json_matrix(field(j, "P_hat"), h.n, h.n, "P_hat"),
                  json_matrix(j["residuals"], h.r, h.n, "residuals"),
                  json_vector(field(j, "first_state"), h.n, "first_state"),
                  json_vector(field(j, "last_state"), h.n, "last_state"));
}

void save_model(const FarModel& model, const fs::path& path, ModelFormat format) {
  write_text_atomic(path, format == ModelFormat::Json ? encode_model_json(model) : encode_model_binary(model));
}

void save_model(const FarModel& model, const fs::path& path) { save_model(model, path, model_format_for(path)); }

FarModel load_model(const fs::path& path) {
  const std::string bytes = read_text(path);
  if (bytes.empty()) throw FormatError(0, "model file is empty");
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) return decode_model_binary(bytes);
  if (bytes.find_first_not_of(" \t\r\n") != std::string::npos && bytes[bytes.find_first_not_of(" \t\r\n")] == '{')
    return decode_model_json(bytes);
  return decode_model_binary(bytes);  // reports the bad magic
}

// --- text output ------------------------------------------------------------

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      fs::remove(tmp, ec);
      fail(ErrorCode::IoError, "write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot move output into place at " + path.string());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string CsvTable::to_string() const {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  append_row(header);
  for (const auto& row : rows) append_row(row);
  return out;
}

void write_csv(const fs::path& path, const CsvTable& table) { write_text_atomic(path, table.to_string()); }

void write_density_csv(const fs::path& path, const GridFunction& f) {
  CsvTable table{{"x", "density"}, {}};
  const Eigen::VectorXd& x = f.grid()->points();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    table.add_row({format_double(x[i]), format_double(f.values()[i])});
  write_csv(path, table);
}

GridFunction read_density_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<double> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (!header_seen) {
      if (comma == std::string::npos || trim(line.substr(0, comma)) != "x" || trim(line.substr(comma + 1)) != "density")
        throw ParseError(line_no, 1, "expected header 'x,density'");
      header_seen = true;
      continue;
    }
    if (comma == std::string::npos) throw ParseError(line_no, line.size() + 1, "expected two fields");
    double x = 0.0;
    double y = 0.0;
    if (!parse_double(trim(line.substr(0, comma)), x) || !std::isfinite(x))
      throw ParseError(line_no, 1, "abscissa is not a finite number");
    if (!parse_double(trim(line.substr(comma + 1)), y) || !std::isfinite(y))
      throw ParseError(line_no, comma + 2, "density value is not a finite number");
    xs.push_back(x);
    ys.push_back(y);
  }
  require(!xs.empty(), ErrorCode::EmptyFile, "density file has no rows: " + path.string());
  require(xs.size() >= GridSpec::kMinPoints, ErrorCode::GridTooSmall,
          "density file has " + std::to_string(xs.size()) + " rows; a grid needs at least " +
              std::to_string(GridSpec::kMinPoints));
  const Grid grid = make_grid(xs.front(), xs.back(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(std::abs(xs[i] - grid->points()[static_cast<Eigen::Index>(i)]) <= 1e-9 * grid->length(),
            ErrorCode::InvalidArgument, "density abscissae are not uniformly spaced (row " + std::to_string(i + 2) + ")");
  }
  return GridFunction(grid, Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())));
}

// --- functionals ------------------------------------------------------------

GridFunction parse_functional(const std::string& descriptor, const GridFunction& f_bar) {
  std::vector<std::string> parts;
  std::stringstream ss(descriptor);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(trim(part));
  require(!parts.empty() && !parts[0].empty(), ErrorCode::InvalidArgument, "empty functional descriptor");
  const std::string& kind = parts[0];
  auto number = [&](std::size_t i) {
    double v = 0.0;
    require(parse_double(parts[i], v), ErrorCode::InvalidArgument,
            "bad number '" + parts[i] + "' in functional '" + descriptor + "'");
    return v;
  };
  const Grid& grid = f_bar.grid();
  if (kind == "moment") {
    require(parts.size() == 2, ErrorCode::InvalidArgument, "moment functional needs a degree, e.g. moment:2");
    const double p = number(1);
    require(p >= 1 && p == std::floor(p), ErrorCode::InvalidArgument, "moment degree must be a positive integer");
    return moment_functional(static_cast<std::size_t>(p), grid);
  }
  if (kind == "left" || kind == "right") {
    require(parts.size() <= 2, ErrorCode::InvalidArgument, "tail functional takes one threshold");
    const double tau = parts.size() == 2 ? number(1) : quantile(f_bar, kind == "left" ? 0.05 : 0.95);
    return tail_indicator(grid, kind == "left" ? TailRegion::left(tau) : TailRegion::right(tau));
  }
  if (kind == "tails") {
    require(parts.size() == 1 || parts.size() == 3, ErrorCode::InvalidArgument,
            "two-sided tail functional takes two thresholds, e.g. tails:-1:1");
    const double lo = parts.size() == 3 ? number(1) : quantile(f_bar, 0.05);
    const double hi = parts.size() == 3 ? number(2) : quantile(f_bar, 0.95);
    return tail_indicator(grid, TailRegion::two_sided(lo, hi));
  }
  fail(ErrorCode::InvalidArgument, "unknown functional '" + descriptor + "' (use moment:p, left, right or tails)");
}

std::vector<std::size_t> parse_count_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  auto count = [&](const std::string& s) {
    std::size_t v = 0;
    const std::string t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    require(!t.empty() && ec == std::errc() && ptr == t.data() + t.size(), ErrorCode::InvalidArgument,
            "bad count '" + t + "' in list '" + text + "'");
    return v;
  };
  for (std::string item; std::getline(ss, item, ',');) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(count(item));
      continue;
    }
    const std::size_t lo = count(item.substr(0, dots));
    const std::size_t hi = count(item.substr(dots + 2));
    require(lo <= hi, ErrorCode::InvalidArgument, "empty range '" + trim(item) + "'");
    for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
  }
  require(!out.empty(), ErrorCode::InvalidArgument, "empty count list");
  return out;
}

// --- configuration ----------------------------------------------------------

namespace {

json parse_config_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, "malformed JSON config");
  }
}

// Typed access with key-path error messages; unknown keys are rejected.
class ConfigReader {
 public:
  ConfigReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    require(j_.is_object(), ErrorCode::InvalidArgument, where_ + " must be a JSON object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
      require(known, ErrorCode::InvalidArgument, "unknown key '" + key + "' in " + where_);
    }
  }
  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  double number(const char* key) const {
    require(j_.at(key).is_number(), ErrorCode::InvalidArgument, path(key) + " must be a number");
    return j_.at(key).get<double>();
  }
  std::size_t count(const char* key) const {
    require(j_.at(key).is_number_unsigned(), ErrorCode::InvalidArgument,
            path(key) + " must be a nonnegative integer");
    return j_.at(key).get<std::size_t>();
  }
  std::string string(const char* key) const {
    require(j_.at(key).is_string(), ErrorCode::InvalidArgument, path(key) + " must be a string");
    return j_.at(key).get<std::string>();
  }
  std::vector<std::string> strings(const char* key) const {
    const json& v = j_.at(key);
    require(v.is_array(), ErrorCode::InvalidArgument, path(key) + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& item : v) {
      require(item.is_string(), ErrorCode::InvalidArgument, path(key) + " must be an array of strings");
      out.push_back(item.get<std::string>());
    }
    return out;
  }
  std::vector<double> numbers(const char* key) const {
    const json& v = j_.at(key);
    require(v.is_array(), ErrorCode::InvalidArgument, path(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& item : v) {
      require(item.is_number(), ErrorCode::InvalidArgument, path(key) + " must be an array of numbers");
      out.push_back(item.get<double>());
    }
    return out;
  }
  /// Either an array of counts or a list string such as "1..8".
  std::vector<std::size_t> counts(const char* key) const {
    const json& v = j_.at(key);
    if (v.is_string()) return parse_count_list(v.get<std::string>());
    require(v.is_array() && !v.empty(), ErrorCode::InvalidArgument,
            path(key) + " must be a nonempty array of counts or a list such as \"1..8\"");
    std::vector<std::size_t> out;
    for (const auto& item : v) {
      require(item.is_number_unsigned(), ErrorCode::InvalidArgument, path(key) + " must hold nonnegative integers");
      out.push_back(item.get<std::size_t>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string where_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void check_unit_interval(double v, const std::string& what) {
  require(v > 0.0 && v < 1.0, ErrorCode::InvalidArgument, what + " must lie in (0,1)");
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text, const fs::path& base_dir) {
  const json j = parse_config_json(text);
  const ConfigReader root(j, "config");
  root.allow({"input", "grid", "kernel", "K", "K_candidates", "n_validation", "analysis", "bootstrap", "n_test",
              "output_dir"});
  PipelineConfig c;
  require(root.has("input"), ErrorCode::InvalidArgument, "config.input is required");
  c.input = resolve(base_dir, root.string("input"));
  require(fs::exists(c.input), ErrorCode::IoError, "input file does not exist: " + c.input.string());

  if (root.has("grid")) {
    const ConfigReader g(root.raw("grid"), "config.grid");
    g.allow({"a", "b", "n", "coverage"});
    if (g.has("a")) c.grid.a = g.number("a");
    if (g.has("b")) c.grid.b = g.number("b");
    require(c.grid.a.has_value() == c.grid.b.has_value(), ErrorCode::InvalidArgument,
            "config.grid needs both a and b, or neither");
    if (c.grid.a) require(*c.grid.a < *c.grid.b, ErrorCode::InvalidSupport, "config.grid requires a < b");
    if (g.has("n")) c.grid.n = g.count("n");
    require(c.grid.n >= GridSpec::kMinPoints, ErrorCode::GridTooSmall, "config.grid.n must be at least 16");
    if (g.has("coverage")) c.grid.coverage = g.number("coverage");
    require(c.grid.coverage > 0.5 && c.grid.coverage < 1.0, ErrorCode::InvalidArgument,
            "config.grid.coverage must lie in (0.5,1)");
  }
  if (root.has("kernel")) c.kernel = parse_kernel(root.string("kernel"));
  if (root.has("K")) {
    c.K = root.count("K");
    require(*c.K >= 1, ErrorCode::InvalidArgument, "config.K must be at least 1");
  }
  if (root.has("K_candidates")) c.K_candidates = root.counts("K_candidates");
  for (std::size_t k : c.K_candidates) require(k >= 1, ErrorCode::InvalidArgument, "K candidates must be >= 1");
  if (root.has("n_validation")) c.n_validation = root.count("n_validation");
  require(c.n_validation >= 1, ErrorCode::InvalidArgument, "config.n_validation must be at least 1");

  if (root.has("analysis")) {
    const ConfigReader a(root.raw("analysis"), "config.analysis");
    a.allow({"features", "irf", "vardecomp", "kmax", "tails"});
    if (a.has("features")) c.analysis.features = a.count("features");
    if (a.has("irf")) c.analysis.irf = a.strings("irf");
    if (a.has("vardecomp")) c.analysis.vardecomp = a.strings("vardecomp");
    if (a.has("kmax")) c.analysis.kmax = a.count("kmax");
    if (a.has("tails")) c.analysis.tails = a.strings("tails");
    require(c.analysis.kmax >= 1 && c.analysis.kmax <= kDefaultMomentCount, ErrorCode::InvalidArgument,
            "config.analysis.kmax must lie in 1..10");
  }
  if (root.has("bootstrap")) {
    const ConfigReader b(root.raw("bootstrap"), "config.bootstrap");
    b.allow({"B", "alpha", "seed"});
    if (b.has("B")) c.bootstrap.B = b.count("B");
    if (b.has("alpha")) c.bootstrap.alpha = b.number("alpha");
    if (b.has("seed")) c.bootstrap.seed = b.count("seed");
    require(c.bootstrap.B == 0 || c.bootstrap.B >= 100, ErrorCode::InvalidArgument,
            "config.bootstrap.B must be 0 (off) or at least 100");
    check_unit_interval(c.bootstrap.alpha, "config.bootstrap.alpha");
  }
  if (root.has("n_test")) c.n_test = root.count("n_test");
  if (root.has("output_dir")) c.output_dir = resolve(base_dir, root.string("output_dir"));
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  return parse_pipeline_config(read_text(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

StudyConfig parse_study_config(const std::string& text, const fs::path& base_dir) {
  const json j = parse_config_json(text);
  const ConfigReader root(j, "config");
  root.allow({"T_values", "N_values", "iterations", "seed", "burn_in", "K", "K_candidates", "n_validation", "kernel",
              "generator"});
  require(root.has("generator"), ErrorCode::InvalidArgument, "config.generator is required");
  const ConfigReader g(root.raw("generator"), "config.generator");
  std::optional<Generator> generator;
  const std::string type = g.has("type") ? g.string("type") : "synthetic";
  if (type == "model") {
    g.allow({"type", "path"});
    require(g.has("path"), ErrorCode::InvalidArgument, "config.generator.path is required for a model generator");
    const fs::path model_path = resolve(base_dir, g.string("path"));
    require(fs::exists(model_path), ErrorCode::IoError, "generator model does not exist: " + model_path.string());
    generator = generator_from_model(load_model(model_path));
  } else if (type == "synthetic") {
    g.allow({"type", "a", "b", "grid_points", "mean_sd", "feature_scale", "operator_coefficients", "noise_sd"});
    SyntheticDesign d = forex_like_design();
    if (g.has("a")) d.a = g.number("a");
    if (g.has("b")) d.b = g.number("b");
    if (g.has("grid_points")) d.grid_points = g.count("grid_points");
    if (g.has("mean_sd")) d.mean_sd = g.number("mean_sd");
    if (g.has("feature_scale")) d.feature_scale = g.number("feature_scale");
    if (g.has("operator_coefficients")) d.operator_coefficients = g.numbers("operator_coefficients");
    if (g.has("noise_sd")) d.noise_sd = g.numbers("noise_sd");
    generator = make_synthetic_generator(d);
  } else {
    fail(ErrorCode::InvalidArgument, "config.generator.type must be 'synthetic' or 'model'");
  }
  StudyConfig c{{}, {}, 1, std::move(*generator), 0, std::nullopt, std::nullopt};
  require(root.has("T_values") && root.has("N_values"), ErrorCode::InvalidArgument,
          "config.T_values and config.N_values are required");
  c.T_values = root.counts("T_values");
  c.N_values = root.counts("N_values");
  if (root.has("iterations")) c.iterations = root.count("iterations");
  if (root.has("seed")) c.seed = root.count("seed");
  if (root.has("burn_in")) c.burn_in = root.count("burn_in");
  if (root.has("K")) c.K = root.count("K");
  if (root.has("K_candidates")) c.K_candidates = root.counts("K_candidates");
  if (root.has("n_validation")) c.n_validation = root.count("n_validation");
  if (root.has("kernel")) c.kernel = parse_kernel(root.string("kernel"));
  require(c.iterations >= 1, ErrorCode::InvalidArgument, "config.iterations must be at least 1");
  for (std::size_t T : c.T_values) require(T >= 10, ErrorCode::InvalidArgument, "config.T_values must all be >= 10");
  for (std::size_t N : c.N_values) require(N >= 10, ErrorCode::InvalidArgument, "config.N_values must all be >= 10");

  return c;
}

StudyConfig load_study_config(const fs::path& path) {
  return parse_study_config(read_text(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

}  // namespace far
