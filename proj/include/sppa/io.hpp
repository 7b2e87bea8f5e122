#pragma once

#include "sppa/metric.hpp"
#include "sppa/objective.hpp"
#include "sppa/salm.hpp"
#include "sppa/schedule.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sppa {

using json = nlohmann::json;

/// Config readers. Every error names the offending field by its path, for
/// example "problem.Q[2]" or "rhos[3] must be positive".
Point point_from_json(const json& j, const std::string& path);
Matrix matrix_from_json(const json& j, const std::string& path);
Metric metric_from_json(const json& j, const std::string& path);
Objective objective_from_json(const json& j, const std::string& path);
Schedule schedule_from_json(const json& j, const std::string& path);
ContinuousSchedule continuous_schedule_from_json(const json& j, const std::string& path);
RhoSequence rhos_from_json(const json& j, const std::string& path);

/// Q = M'M + delta I with M of size rows x n filled with standard normal
/// draws from std::mt19937_64 seeded with `seed`.
Matrix random_spd(Index n, Index rows, double delta, std::uint64_t seed);

/// Reads a field, with the path in any error.
double number_field(const json& j, const std::string& key, const std::string& path);
std::optional<double> optional_number(const json& j, const std::string& key, const std::string& path);
std::size_t count_field(const json& j, const std::string& key, const std::string& path);

json parse_json_file(const std::string& file);

/// Writes rows of numbers with 17 significant digits; missing values are
/// left empty.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  CsvWriter& cell(double v);
  CsvWriter& cell(std::optional<double> v);
  CsvWriter& cell(std::size_t v);
  CsvWriter& cell(const std::string& s);
  void end_row();

 private:
  void sep();
  std::ostream& os_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

std::string format_number(double v);

}  // namespace sppa
