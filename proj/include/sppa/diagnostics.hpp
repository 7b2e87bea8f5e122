#pragma once

#include "sppa/salm.hpp"
#include "sppa/schedule.hpp"
#include "sppa/solvers.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sppa {

enum class RateModel { power, exponential };

RateModel parse_rate_model(const std::string& s);
std::string to_string(RateModel m);

/// Least-squares fit of log(gap) against log(k) (power: gap ~ C k^{-p}) or
/// against k (exponential: gap ~ C r^k) over the last half of the samples.
struct RateFit {
  RateModel model = RateModel::power;
  /// p for power fits, r for exponential fits.
  double estimate = 0.0;
  double std_error = 0.0;
  /// Root-mean-square residual of the log-linear fit.
  double residual = 0.0;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  /// Samples raised to the floor 1e2 * eps * |f*| before taking logs.
  std::size_t clamped = 0;
  double floor = 0.0;

  std::string to_json() const;
};

/// Needs at least 20 samples. Negative gaps are an error; zeros are an error
/// unless `fstar` is given, in which case they are clamped to the floor.
RateFit estimate_order(std::span<const double> gaps, std::span<const double> ks, RateModel model,
                       std::optional<double> fstar = std::nullopt);

enum class CheckStatus { pass, fail, na };
std::string to_string(CheckStatus s);

struct CertificateRow {
  std::string name;
  CheckStatus status = CheckStatus::na;
  std::optional<double> worst_slack;
  std::optional<std::size_t> worst_k;
  std::string detail;
};

struct CertificateReport {
  std::string subject;
  std::vector<CertificateRow> rows;
  std::vector<std::string> notes;

  bool passed() const;
  std::string to_text() const;
  std::string to_json() const;
};

/// Aggregated PASS/FAIL/N/A table for a primal run. Rows need the run to have
/// been given a Truth; without one every row is N/A. The schedule is required
/// for SPPA runs and ignored otherwise.
CertificateReport certificate_suite(const SolverRun& run, const std::optional<Schedule>& s);

/// Saddle-point certificates of a dual run, as a report table.
CertificateReport certificate_suite(const DualRun& run, const Schedule& s, const Point& xstar,
                                    const Point& lambda_star);

}  // namespace sppa
