#include "sppa/io.hpp"

#include "sppa/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace sppa {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::parse, path + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(path + "." + key, "missing");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(path, "must be finite");
  return v;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

// Library validation errors keep their code but gain the field path.
template <class F>
auto with_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse) throw;
    fail(ErrorCode::invalid_argument, path + ": " + e.what());
  }
}

}  // namespace

double number_field(const json& j, const std::string& key, const std::string& path) {
  return as_number(require(j, key, path), path + "." + key);
}

std::optional<double> optional_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return std::nullopt;
  return as_number(j.at(key), path + "." + key);
}

std::size_t count_field(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer() && !v.is_number_unsigned()) bad(path + "." + key, "expected a non-negative integer");
  const auto n = v.get<long long>();
  if (n < 0) bad(path + "." + key, "expected a non-negative integer");
  return static_cast<std::size_t>(n);
}

Point point_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  Point p(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    p[static_cast<Index>(i)] = as_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return p;
}

Matrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad(path, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) bad(path + "[0]", "expected a non-empty row");
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) bad(rp, "expected a row of length " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = as_number(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

Metric metric_from_json(const json& j, const std::string& path) {
  if (j.is_null()) return Metric::identity();
  const std::string kind = as_string(require(j, "kind", path), path + ".kind");
  if (kind == "identity") return Metric::identity();
  if (kind == "diagonal") {
    const Point d = point_from_json(require(j, "values", path), path + ".values");
    for (Index i = 0; i < d.size(); ++i) {
      if (!(d[i] > 0.0)) bad(path + ".values[" + std::to_string(i) + "]", "must be positive");
    }
    return Metric::diagonal(d);
  }
  if (kind == "dense") {
    const Matrix m = matrix_from_json(require(j, "rows", path), path + ".rows");
    return with_path(path + ".rows", [&] { return Metric::dense(m); });
  }
  bad(path + ".kind", "unknown metric kind \"" + kind + "\" (identity, diagonal, dense)");
}

Matrix random_spd(Index n, Index rows, double delta, std::uint64_t seed) {
  if (n < 1 || rows < 1) fail(ErrorCode::invalid_argument, "random matrix dimensions must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, n);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < n; ++c) M(r, c) = normal(gen);
  Matrix Q = M.transpose() * M;
  Q.diagonal().array() += delta;
  return 0.5 * (Q + Q.transpose());
}

Objective objective_from_json(const json& j, const std::string& path) {
  const std::string kind = as_string(require(j, "kind", path), path + ".kind");
  if (kind == "quadratic") {
    const Matrix Q = matrix_from_json(require(j, "Q", path), path + ".Q");
    Point b = j.contains("b") ? point_from_json(j["b"], path + ".b") : Point::Zero(Q.rows());
    const double c = optional_number(j, "c", path).value_or(0.0);
    return with_path(path, [&] { return Objective::quadratic(Q, b, c); });
  }
  if (kind == "random_qp") {
    const double nn = number_field(j, "n", path);
    if (nn < 1 || nn != std::floor(nn)) bad(path + ".n", "must be a positive integer");
    const auto n = static_cast<Index>(nn);
    const double seed = number_field(j, "seed", path);
    const auto rows = static_cast<Index>(optional_number(j, "rows", path).value_or(2.0 * nn));
    const double delta = optional_number(j, "delta", path).value_or(1e-3);
    if (!(delta > 0.0)) bad(path + ".delta", "must be positive");
    const Matrix Q = random_spd(n, rows, delta, static_cast<std::uint64_t>(seed));
    Point b = Point::Zero(n);
    if (j.contains("linear") && j["linear"].is_boolean() && j["linear"].get<bool>()) {
      // x* drawn from the stream after M, b = -Q x*
      std::mt19937_64 gen(static_cast<std::uint64_t>(seed) + 1);
      std::normal_distribution<double> normal(0.0, 1.0);
      Point xs(n);
      for (Index i = 0; i < n; ++i) xs[i] = normal(gen);
      b = -(Q * xs);
    }
    return Objective::quadratic(Q, b, 0.0);
  }
  if (kind == "l1") {
    const double w = number_field(j, "weight", path);
    if (!(w > 0.0)) bad(path + ".weight", "must be positive");
    const double n = optional_number(j, "n", path).value_or(0.0);
    return Objective::l1(w, static_cast<Index>(n));
  }
  if (kind == "sum") {
    const Objective q = objective_from_json(require(j, "quadratic", path), path + ".quadratic");
    const Objective l = objective_from_json(require(j, "l1", path), path + ".l1");
    return with_path(path, [&] { return Objective::sum(q, l); });
  }
  if (kind == "affine_indicator") {
    const Matrix A = matrix_from_json(require(j, "A", path), path + ".A");
    const Point rhs = point_from_json(require(j, "rhs", path), path + ".rhs");
    return with_path(path, [&] { return Objective::affine_indicator(A, rhs); });
  }
  bad(path + ".kind", "unknown objective kind \"" + kind +
                          "\" (quadratic, random_qp, l1, sum, affine_indicator)");
}

RhoSequence rhos_from_json(const json& j, const std::string& path) {
  if (j.is_number()) {
    const double r = as_number(j, path);
    if (!(r > 0.0)) bad(path, "must be positive");
    return RhoSequence::constant(r);
  }
  if (j.is_object()) {
    const std::string key = j.contains("const") ? "const" : "constant";
    const double r = number_field(j, key, path);
    if (!(r > 0.0)) bad(path + "." + key, "must be positive");
    return RhoSequence::constant(r);
  }
  if (j.is_array()) {
    if (j.empty()) bad(path, "must not be empty");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string ip = path + "[" + std::to_string(i) + "]";
      const double r = as_number(j[i], ip);
      if (!(r > 0.0)) fail(ErrorCode::parse, ip + " must be positive");
      v.push_back(r);
    }
    return RhoSequence::list(std::move(v));
  }
  bad(path, "expected a number, {\"const\": r} or an array");
}

Schedule schedule_from_json(const json& j, const std::string& path) {
  const std::string fam = as_string(require(j, "family", path), path + ".family");
  auto s = with_path(path, [&]() -> Schedule {
    if (fam == "polynomial") {
      const double p = number_field(j, "p", path);
      if (p < 1 || p != std::floor(p)) bad(path + ".p", "must be an integer >= 1");
      return Schedule::polynomial(static_cast<int>(p), optional_number(j, "d", path).value_or(1.0));
    }
    if (fam == "exponential") {
      return Schedule::exponential(number_field(j, "rho", path), optional_number(j, "d", path).value_or(1.0));
    }
    if (fam == "constant_ratio") {
      const auto c = j.contains("c") ? optional_number(j, "c", path) : optional_number(j, "c0", path);
      return Schedule::constant_ratio(c.value_or(1.0), number_field(j, "r", path));
    }
    if (fam == "guler") {
      return Schedule::guler(rhos_from_json(require(j, "rhos", path), path + ".rhos"));
    }
    bad(path + ".family", "unknown schedule family \"" + fam +
                              "\" (polynomial, exponential, constant_ratio, guler)");
  });
  if (auto f = optional_number(j, "c_scale", path)) {
    if (!(*f > 0.0)) bad(path + ".c_scale", "must be positive");
    s = s.with_c_scaled(*f);
  }
  return s;
}

ContinuousSchedule continuous_schedule_from_json(const json& j, const std::string& path) {
  const std::string fam = as_string(require(j, "family", path), path + ".family");
  return with_path(path, [&]() -> ContinuousSchedule {
    const double d = optional_number(j, "d", path).value_or(1.0);
    if (fam == "polynomial") return ContinuousSchedule::polynomial(number_field(j, "p", path), d);
    if (fam == "exponential") return ContinuousSchedule::exponential(number_field(j, "lambda", path), d);
    bad(path + ".family", "unknown continuous family \"" + fam + "\" (polynomial, exponential)");
  });
}

json parse_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::io, "cannot open " + file);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, file + ": " + e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
  os_ << "\n";
}

void CsvWriter::sep() {
  if (filled_ >= columns_) fail(ErrorCode::invalid_argument, "CSV row has more cells than the header");
  if (filled_++) os_ << ",";
}

CsvWriter& CsvWriter::cell(double v) {
  sep();
  os_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::optional<double> v) {
  sep();
  if (v) os_ << format_number(*v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::size_t v) {
  sep();
  os_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  sep();
  os_ << s;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) fail(ErrorCode::invalid_argument, "CSV row has fewer cells than the header");
  os_ << "\n";
  filled_ = 0;
}

}  // namespace sppa
