#pragma once

#include "sppa/metric.hpp"
#include "sppa/objective.hpp"
#include "sppa/schedule.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sppa {

struct SubproblemSolution {
  Point x;
  Point u;
};

/// A convex perturbation phi(x, u) with phi(x, 0) = f(x), seen through the
/// oracle of the augmented subproblem
///   argmin_{x,u} phi(x, u) - <lambda_tilde, u> + (w/2) ||u||^2_L.
/// `dual_value` is inf_x L(x, lambda) with L(x, lambda) = inf_u phi(x, u) - <lambda, u>;
/// `lagrangian_value` is phi(x, u) - <lambda, u> at an oracle output. Both are
/// optional.
struct PerturbedProblem {
  Index primal_dim = 0;
  Index dual_dim = 0;
  std::function<SubproblemSolution(const Point& lambda_tilde, double w)> solve;
  std::function<double(const Point& x, const Point& u, const Point& lambda)> lagrangian_value;
  std::function<double(const Point& lambda)> dual_value;
  /// d(lambda_star) - d(lambda), evaluated without cancellation when possible.
  std::function<double(const Point& lambda, const Point& lambda_star)> dual_gap;
};

/// min 1/2 x'Qx + q'x + c subject to Ax = b.
struct LinearEqualityProblem {
  Objective f;
  Matrix A;
  Point b;

  /// Validates shapes, that f is quadratic, and feasibility (least-squares
  /// residual of Ax = b at most 1e-8).
  LinearEqualityProblem(Objective f, Matrix A, Point b);
};

/// Oracle for the equality-constrained QP: x solves
/// (Q + w A'LA) x = -q + A' lambda_tilde + w A'L b and u = Ax - b.
/// Throws "subproblem not strongly convex" when Q + A'LA is not positive
/// definite.
PerturbedProblem linear_equality_oracle(const LinearEqualityProblem& p, const Metric& metric);

struct SaddlePoint {
  Point x;
  Point lambda;
  /// ||KKT residual||_inf.
  double residual = 0.0;
};

/// Direct solve of [Q -A'; A 0] [x; lambda] = [-q; b].
SaddlePoint kkt_saddle_point(const LinearEqualityProblem& p);

struct DualIterate {
  std::size_t k = 0;
  Point lambda;
  Point z;
  /// Produced by step k; empty on the final record.
  Point lambda_tilde;
  Point x_next;
  Point u_next;
};

struct DualTraceRecord {
  std::size_t k = 0;
  /// ||u_k||^2_L from step k-1 (none at k = 0).
  std::optional<double> u_norm_sq_L;
  /// sum_{j<k} (a_j c_j - a_j^2/2) ||u_{j+1}||^2_L.
  double sum_u_prefix = 0.0;
  /// |inf_x L(x, lambda_k) - (phi(x_k, u_k) - <lambda_k, u_k>)| (k >= 1 when computable).
  std::optional<double> lemma2_residual;
  std::optional<double> A;
};

struct DualRun {
  std::vector<DualIterate> iterates;
  std::vector<DualTraceRecord> trace;
  std::vector<Terms> terms;
  PerturbedProblem problem;
  Metric metric = Metric::identity();
  std::string schedule;
};

/// Symplectic augmented Lagrangian iteration: lambda_tilde = (b lambda + z)/(b+1),
/// w = c/(b+1), lambda <- lambda_tilde - w L u and z <- z - a L u. The
/// oracle's failures are rethrown with the iteration index.
DualRun run_salm(const PerturbedProblem& p, const Metric& metric, const Schedule& s,
                 const Point& lambda0, std::size_t K);

struct SaddleCheck {
  std::string name;
  /// "PASS", "FAIL" or "N/A".
  std::string status;
  std::optional<double> worst_slack;
  std::string detail;
};

struct SaddleReport {
  std::vector<SaddleCheck> checks;
  std::vector<std::string> notes;
  double corollary_rhs = 0.0;
  /// Per k: d(lambda*) - d(lambda_k) when the dual function is available.
  std::vector<std::optional<double>> dual_gap;
  bool passed = true;
};

/// Per-k checks of the dual-gap bound A_k [d(lambda*) - d(lambda_k)] <= R and
/// of the residual sums against R, where
/// R = A_0 [d(lambda*) - d(lambda_0)] + 1/2 ||lambda_0 - lambda*||^2_{L^{-1}},
/// plus the fixed-point identity of the subproblem (tolerance 1e-9).
SaddleReport saddle_certificates(const DualRun& run, const Point& xstar, const Point& lambda_star,
                                 const Schedule& s);

}  // namespace sppa
