#pragma once

#include "sppa/metric.hpp"
#include "sppa/objective.hpp"
#include "sppa/schedule.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sppa {

/// Known solution data. `minimizers` are representatives of the solution set;
/// the first one plays the role of x* in Lyapunov terms, while distances take
/// the minimum over all of them.
struct Truth {
  std::vector<Point> minimizers;
  std::optional<double> fstar;
};

struct IterateRecord {
  std::size_t k = 0;
  Point x;
  /// z_k for SPPA, v_k for A-PPA, empty for PPA.
  Point aux;
  /// The anchor of the prox step that produced x_k (x_tilde for SPPA, y for
  /// A-PPA, x_{k-1} for PPA); empty at k = 0.
  Point anchor;
  /// The implicit subgradient recovered from that step, an element of the
  /// subdifferential at x_k; empty at k = 0.
  Point tilde_grad;
};

/// Row k describes iterate k; the prefix sums cover steps j < k.
struct TraceRecord {
  std::size_t k = 0;
  double f_value = 0.0;
  /// f(x_k) - f*, or f(x_k) - min_j f(x_j) when the run is relative.
  double f_gap = 0.0;
  std::optional<double> A;
  std::optional<double> E;
  std::optional<double> E_alpha;
  std::optional<double> sum22_prefix;
  std::optional<double> sum23_prefix;
  std::optional<double> tilde_grad_norm_sq;
  std::optional<double> bound21_rhs;
  /// The algorithm's own a-priori bound on f_gap at k.
  std::optional<double> gap_bound;
  /// ||x_k - x_{k-1}||^2_L.
  double step_norm_sq = 0.0;
  /// A-PPA's alpha_{k-1}.
  std::optional<double> alpha;
};

struct SolverRun {
  std::string algorithm;
  std::string parameters;
  std::vector<IterateRecord> iterates;
  std::vector<TraceRecord> trace;
  /// Schedule terms for k = 0..K (SPPA only).
  std::vector<Terms> terms;
  bool relative = false;
  /// E(0) with x* = minimizers[0] (SPPA with truth).
  std::optional<double> E0;
  /// min over minimizers of ||x0 - x||^2_L.
  std::optional<double> dist_sq;
  /// Weight of G in E_alpha.
  std::optional<double> alpha;
};

struct RunOptions {
  std::optional<Truth> truth;
  /// SPPA only: weight of the auxiliary energy. Defaults to half the
  /// admissible upper bound when the schedule has d < 1.
  std::optional<double> alpha;
};

SolverRun run_ppa(const Objective& f, const Metric& metric, const RhoSequence& rhos,
                  const Point& x0, std::size_t K, const RunOptions& opts = {});

/// Accelerated PPA with A_k kept in log space. Requires the identity metric.
SolverRun run_appa(const Objective& f, const RhoSequence& rhos, const Point& x0, double A,
                   std::size_t K, const Metric& metric = Metric::identity(),
                   const RunOptions& opts = {});

SolverRun run_sppa(const Objective& f, const Metric& metric, const Schedule& s, const Point& x0,
                   std::size_t K, const RunOptions& opts = {});

/// (b_k + 1) / c_k * L (x_tilde - x_next).
Point tilde_gradient(const Schedule& s, std::size_t k, const Point& x_tilde, const Point& x_next,
                     const Metric& metric);

/// The SPPA bound dist^2 / (sum_{i<k} sqrt(rho_i))^2 for the Guler schedule.
double guler_sppa_bound(const RhoSequence& rhos, std::size_t k, double dist_sq);
/// The accelerated-PPA bound 4 [f(x0) - f* + A/2 dist^2] / (A (sum_{i<k} sqrt(rho_i))^2).
double appa_bound(const RhoSequence& rhos, std::size_t k, double A, double gap0, double dist_sq);

}  // namespace sppa
