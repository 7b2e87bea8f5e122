#pragma once

#include "sppa/metric.hpp"
#include "sppa/objective.hpp"
#include "sppa/schedule.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sppa {

struct OdeState {
  double t = 0.0;
  Point X;
  Point Z;
};

struct OdeTrajectory {
  std::vector<OdeState> states;
  double step = 0.0;
  std::string scheme;
};

/// Symplectic Euler for
///   Z = b_t X' + c_t L^{-1} grad f(X) + X,   Z' = -a_t L^{-1} grad f(X),
/// with Z(0) = X(0) = x0. X takes the implicit step (a metric prox of f at
/// x_tilde = (z_k + (b/s) x_k) / (b/s + 1) with weight (b/s + 1) / c) and Z
/// the explicit one; coefficients are frozen at t_k = k s. With s = 1 this is
/// exactly the discrete SPPA recursion.
OdeTrajectory integrate_main_ode(const Objective& f, const Metric& metric,
                                 const ContinuousSchedule& cs, const Point& x0, double s,
                                 double horizon);

/// A monotonicity check of a sampled energy against a per-step budget.
struct EnergySeries {
  std::vector<double> values;
  double max_increase = 0.0;
  std::size_t worst_step = 0;
  double tolerance_per_step = 0.0;
  bool nonincreasing = true;
};

/// E(t) = A_t [f(X) - f(x*)] + 1/2 ||Z - x*||^2_L at every sample. The
/// per-step budget is 10 s.
EnergySeries lyapunov_continuous(const OdeTrajectory& traj, const Objective& f,
                                 const Metric& metric, const ContinuousSchedule& cs,
                                 const Point& xstar);

/// G(t) = c_t [f(X) - f(x*)] + 1/2 ||X - x*||^2_L - <X - x*, Z - x*>_L per sample.
std::vector<double> auxiliary_values(const OdeTrajectory& traj, const Objective& f,
                                     const Metric& metric, const ContinuousSchedule& cs,
                                     const Point& xstar);

struct AuxiliaryReport {
  std::vector<double> G;
  EnergySeries E_alpha;
  double alpha = 0.0;
  /// (1 - d) / (1 + sup c_dot / a) over samples with t >= t_from.
  double alpha_bound = 0.0;
  double t_from = 0.0;
  bool nonnegative = true;
};

/// G and E_alpha = E + alpha G. sup c_dot/a is unbounded near t = 0 for polynomial
/// families, so admissibility and monotonicity are evaluated on t >= t_from.
/// Throws if alpha is outside (0, alpha_bound).
AuxiliaryReport auxiliary_G(const OdeTrajectory& traj, const Objective& f, const Metric& metric,
                            const ContinuousSchedule& cs, const Point& xstar, double alpha,
                            double t_from);

struct IntegralReport {
  /// Trapezoid integral of a_t c_t ||grad f(X)||^2_{L^{-1}}.
  double grad_norm = 0.0;
  /// Trapezoid integral of (a_t - A_dot_t) <grad f(X), X - x*>.
  double value = 0.0;
  /// Trapezoid integral of b_t ||X'||^2_L over [velocity_from, T], central
  /// differences for X'.
  double velocity = 0.0;
  double velocity_from = 0.0;
  double E0 = 0.0;
  /// 10 s T.
  double tolerance = 0.0;
};

IntegralReport integral_bounds(const OdeTrajectory& traj, const Objective& f, const Metric& metric,
                               const ContinuousSchedule& cs, const Point& xstar,
                               double velocity_from = 0.0);

enum class EulerScheme { explicit_euler, symplectic, implicit_euler };

EulerScheme parse_scheme(const std::string& s);
std::string to_string(EulerScheme s);

/// p' = q, q' = -p from p(0) = 0, q(0) = 1; returns n_steps + 1 (p, q) pairs.
std::vector<std::pair<double, double>> hamiltonian_demo(double s, std::size_t n_steps,
                                                        EulerScheme scheme);

}  // namespace sppa
