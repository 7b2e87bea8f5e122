#include "sppa/ode.hpp"

#include "sppa/error.hpp"

#include <cmath>
#include <limits>

namespace sppa {

OdeTrajectory integrate_main_ode(const Objective& f, const Metric& metric,
                                 const ContinuousSchedule& cs, const Point& x0, double s,
                                 double horizon) {
  if (!f.smooth()) fail(ErrorCode::unsupported, "gradient unavailable for " + f.kind_name() + " objective");
  if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::invalid_argument, "step s must be positive");
  if (!(horizon >= s)) fail(ErrorCode::invalid_argument, "horizon T must be at least one step");
  require_finite(x0, "x0");

  const auto n_steps = static_cast<std::size_t>(std::llround(horizon / s));
  OdeTrajectory traj;
  traj.step = s;
  traj.scheme = "symplectic";
  traj.states.reserve(n_steps + 1);
  traj.states.push_back({0.0, x0, x0});

  Point x = x0;
  Point z = x0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * s;
    const ContinuousTerms ct = cs.at(t);
    const double beta = ct.b / s;
    const Point x_tilde = (z + beta * x) / (beta + 1.0);
    // c_t = 0 makes the prox weight infinite: the prox collapses onto x_tilde.
    Point x_next = ct.c > 0.0 ? f.prox(metric, x_tilde, (beta + 1.0) / ct.c).minimizer : x_tilde;
    z -= s * ct.a * metric.solve(f.gradient(x_next));
    x = std::move(x_next);
    traj.states.push_back({static_cast<double>(k + 1) * s, x, z});
  }
  return traj;
}

namespace {

double energy_gap(const Objective& f, const Point& x, const Point& xstar) {
  return f.gap(x, xstar).value();
}

void scan_increases(EnergySeries& e, std::size_t from) {
  e.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = from; k + 1 < e.values.size(); ++k) {
    const double inc = e.values[k + 1] - e.values[k];
    if (inc > e.max_increase) {
      e.max_increase = inc;
      e.worst_step = k;
    }
  }
  if (e.values.size() < 2 + from) e.max_increase = 0.0;
  e.nonincreasing = e.max_increase <= e.tolerance_per_step;
}

}  // namespace

EnergySeries lyapunov_continuous(const OdeTrajectory& traj, const Objective& f,
                                 const Metric& metric, const ContinuousSchedule& cs,
                                 const Point& xstar) {
  EnergySeries e;
  e.tolerance_per_step = 10.0 * traj.step;
  e.values.reserve(traj.states.size());
  for (const auto& st : traj.states) {
    const ContinuousTerms ct = cs.at(st.t);
    const double gap = energy_gap(f, st.X, xstar);
    e.values.push_back((ct.A > 0.0 ? ct.A * gap : 0.0) + 0.5 * metric.norm_sq(st.Z - xstar));
  }
  scan_increases(e, 0);
  return e;
}

std::vector<double> auxiliary_values(const OdeTrajectory& traj, const Objective& f,
                                     const Metric& metric, const ContinuousSchedule& cs,
                                     const Point& xstar) {
  std::vector<double> G;
  G.reserve(traj.states.size());
  for (const auto& st : traj.states) {
    const ContinuousTerms ct = cs.at(st.t);
    const Point dx = st.X - xstar;
    const Point dz = st.Z - xstar;
    G.push_back(ct.c * energy_gap(f, st.X, xstar) + 0.5 * metric.norm_sq(dx) - metric.inner(dx, dz));
  }
  return G;
}

AuxiliaryReport auxiliary_G(const OdeTrajectory& traj, const Objective& f, const Metric& metric,
                            const ContinuousSchedule& cs, const Point& xstar, double alpha,
                            double t_from) {
  if (!(t_from > 0.0)) fail(ErrorCode::invalid_argument, "t_from must be positive");
  AuxiliaryReport rep;
  rep.alpha = alpha;
  rep.t_from = t_from;

  double sup_ratio = -std::numeric_limits<double>::infinity();
  std::size_t first = traj.states.size();
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double t = traj.states[k].t;
    if (t + 1e-12 < t_from) continue;
    first = std::min(first, k);
    const ContinuousTerms ct = cs.at(t);
    sup_ratio = std::max(sup_ratio, ct.c_dot / ct.a);
  }
  if (first == traj.states.size()) fail(ErrorCode::invalid_argument, "t_from lies beyond the trajectory");
  rep.alpha_bound = (1.0 - cs.d()) / (1.0 + std::max(0.0, sup_ratio));
  if (!(alpha > 0.0 && alpha < rep.alpha_bound)) {
    fail(ErrorCode::invalid_argument, "alpha = " + std::to_string(alpha) +
                                          " is outside the admissible interval (0, " +
                                          std::to_string(rep.alpha_bound) + ")");
  }

  rep.E_alpha.tolerance_per_step = 10.0 * traj.step;
  rep.G = auxiliary_values(traj, f, metric, cs, xstar);
  const EnergySeries E = lyapunov_continuous(traj, f, metric, cs, xstar);
  for (std::size_t k = 0; k < rep.G.size(); ++k) {
    rep.E_alpha.values.push_back(E.values[k] + alpha * rep.G[k]);
  }
  scan_increases(rep.E_alpha, first);
  for (double v : rep.E_alpha.values) rep.nonnegative = rep.nonnegative && v >= -1e-12;
  return rep;
}

IntegralReport integral_bounds(const OdeTrajectory& traj, const Objective& f, const Metric& metric,
                               const ContinuousSchedule& cs, const Point& xstar,
                               double velocity_from) {
  IntegralReport r;
  r.velocity_from = velocity_from;
  const auto& st = traj.states;
  const double s = traj.step;
  if (st.size() < 3) fail(ErrorCode::invalid_argument, "trajectory too short for integral diagnostics");
  const ContinuousTerms c0 = cs.at(0.0);
  r.E0 = (c0.A > 0.0 ? c0.A * energy_gap(f, st[0].X, xstar) : 0.0) + 0.5 * metric.norm_sq(st[0].Z - xstar);
  r.tolerance = 10.0 * s * st.back().t;

  std::vector<double> gn(st.size()), val(st.size()), vel(st.size(), 0.0);
  for (std::size_t k = 0; k < st.size(); ++k) {
    const ContinuousTerms ct = cs.at(st[k].t);
    const Point g = f.gradient(st[k].X);
    gn[k] = ct.a * ct.c * metric.dual_norm_sq(g);
    val[k] = (ct.a - ct.A_dot) * g.dot(st[k].X - xstar);
    if (k > 0 && k + 1 < st.size()) {
      const Point xdot = (st[k + 1].X - st[k - 1].X) / (2.0 * s);
      vel[k] = ct.b * metric.norm_sq(xdot);
    }
  }
  auto trapezoid = [&](const std::vector<double>& y, std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t k = lo; k < hi; ++k) acc += 0.5 * s * (y[k] + y[k + 1]);
    return acc;
  };
  r.grad_norm = trapezoid(gn, 0, st.size() - 1);
  r.value = trapezoid(val, 0, st.size() - 1);
  std::size_t v0 = 1;
  while (v0 < st.size() - 2 && st[v0].t + 1e-12 < velocity_from) ++v0;
  r.velocity = trapezoid(vel, v0, st.size() - 2);
  return r;
}

EulerScheme parse_scheme(const std::string& s) {
  if (s == "explicit") return EulerScheme::explicit_euler;
  if (s == "symplectic") return EulerScheme::symplectic;
  if (s == "implicit") return EulerScheme::implicit_euler;
  fail(ErrorCode::invalid_argument, "scheme must be explicit, symplectic or implicit");
}

std::string to_string(EulerScheme s) {
  switch (s) {
    case EulerScheme::explicit_euler: return "explicit";
    case EulerScheme::symplectic: return "symplectic";
    case EulerScheme::implicit_euler: return "implicit";
  }
  return "symplectic";
}

std::vector<std::pair<double, double>> hamiltonian_demo(double s, std::size_t n_steps,
                                                        EulerScheme scheme) {
  if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::invalid_argument, "step s must be positive");
  std::vector<std::pair<double, double>> out;
  out.reserve(n_steps + 1);
  double p = 0.0, q = 1.0;
  out.emplace_back(p, q);
  const double inv = 1.0 / (1.0 + s * s);
  for (std::size_t k = 0; k < n_steps; ++k) {
    switch (scheme) {
      case EulerScheme::explicit_euler: {
        const double pn = p + s * q;
        q = q - s * p;
        p = pn;
        break;
      }
      case EulerScheme::symplectic:
        // q explicit in p_k, then p implicit in q_{k+1}
        q = q - s * p;
        p = p + s * q;
        break;
      case EulerScheme::implicit_euler: {
        const double pn = (p + s * q) * inv;
        q = (q - s * p) * inv;
        p = pn;
        break;
      }
    }
    out.emplace_back(p, q);
  }
  return out;
}

}  // namespace sppa
