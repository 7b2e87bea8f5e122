#pragma once

#include "sppa/io.hpp"
#include "sppa/salm.hpp"
#include "sppa/solvers.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sppa {

struct ExperimentResult {
  bool certificates_passed = true;
  /// Human-readable certificate tables, one per run.
  std::string report;
  std::filesystem::path output_dir;
  std::vector<std::string> files;
};

/// Output directory precedence: explicit override, then the config's
/// "output_dir", then $SPPA_OUT_DIR, then ./out.
std::filesystem::path resolve_output_dir(const json& config,
                                         const std::optional<std::string>& override_dir);

/// Executes one experiment ("algorithm": ppa, appa, sppa, salm, ode or
/// figure1) and writes its CSV, JSON and SVG files under `out`.
ExperimentResult run_experiment(const json& config, const std::filesystem::path& out);

/// Runs every entry of "algorithms" on the shared problem; one CSV with a gap
/// and a bound column per algorithm, an overlay SVG, per-run directories.
ExperimentResult run_comparison(const json& config, const std::filesystem::path& out);

/// Reads {"schedule": ..., "horizon": N, "theorem": "T4" | "T5" | "T6"}, prints
/// nothing, writes certification.json.
ExperimentResult run_certification(const json& config, const std::filesystem::path& out);

/// Known solution data for built-in objectives, when it can be computed
/// exactly: unconstrained quadratics with positive definite Q, l1, separable
/// quadratic plus l1, and affine indicators (the L-projection of x0).
std::optional<Truth> derive_truth(const Objective& f, const Metric& metric, const Point& x0);

/// Builds the equality-constrained QP of an "eq_qp" or "random_eq_qp" problem.
LinearEqualityProblem eq_qp_from_json(const json& j, const std::string& path);

}  // namespace sppa
