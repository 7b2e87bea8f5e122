#include "sppa/solvers.hpp"

#include "sppa/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sppa {

namespace {

struct Reference {
  std::optional<Point> xstar;
  std::optional<double> fstar;
  std::optional<double> dist_sq;
};

Reference make_reference(const Objective& f, const Metric& metric, const Point& x0,
                         const RunOptions& opts) {
  Reference r;
  if (!opts.truth) return r;
  const Truth& t = *opts.truth;
  if (!t.minimizers.empty()) {
    for (const auto& m : t.minimizers) require_dim(m, x0.size(), "minimizer");
    r.xstar = t.minimizers.front();
    r.dist_sq = dist_sq(metric, x0, t.minimizers);
  }
  if (t.fstar) {
    r.fstar = t.fstar;
  } else if (r.xstar) {
    const ExtendedReal v = f.value(*r.xstar);
    if (v.is_infinite()) fail(ErrorCode::invalid_argument, "supplied minimizer is outside the domain");
    r.fstar = v.value();
  }
  return r;
}

// Gap with the best available precision: the objective's own gap when a
// minimizer is known, else a plain difference.
double gap_of(const Objective& f, const Reference& ref, const Point& x, double fx) {
  if (ref.xstar) return f.gap(x, *ref.xstar).value();
  return fx - *ref.fstar;
}

double finite_value(const Objective& f, const Point& x, std::size_t k) {
  const ExtendedReal v = f.value(x);
  if (v.is_infinite()) {
    fail(ErrorCode::numerical, "iterate " + std::to_string(k) + " left the domain of f");
  }
  return v.value();
}

// Turns recorded objective values into gaps relative to the best value seen.
void finish_relative(SolverRun& run) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : run.trace) best = std::min(best, t.f_value);
  for (auto& t : run.trace) t.f_gap = t.f_value - best;
  run.relative = true;
}

// a * c * g2 - a^2/2 * g2 without forming a*c when the factors are huge.
double sum23_term(double a, double c, double g2) {
  if (g2 == 0.0 || a == 0.0) return 0.0;
  const double g = std::sqrt(g2);
  return (a * g) * ((c - 0.5 * a) * g);
}

}  // namespace

SolverRun run_ppa(const Objective& f, const Metric& metric, const RhoSequence& rhos,
                  const Point& x0, std::size_t K, const RunOptions& opts) {
  if (K < 1) fail(ErrorCode::invalid_argument, "K must be at least 1");
  require_finite(x0, "x0");
  const Reference ref = make_reference(f, metric, x0, opts);

  SolverRun run;
  run.algorithm = "ppa";
  run.parameters = rhos.label();
  run.dist_sq = ref.dist_sq;
  run.iterates.reserve(K + 1);
  run.trace.reserve(K + 1);
  run.iterates.push_back({0, x0, Point(), Point(), Point()});

  double rho_sum = 0.0;
  for (std::size_t k = 0;; ++k) {
    const IterateRecord& it = run.iterates.back();
    TraceRecord tr;
    tr.k = k;
    tr.f_value = finite_value(f, it.x, k);
    if (ref.fstar) tr.f_gap = gap_of(f, ref, it.x, tr.f_value);
    if (k > 0) {
      tr.step_norm_sq = metric.norm_sq(it.x - it.anchor);
      tr.tilde_grad_norm_sq = metric.dual_norm_sq(it.tilde_grad);
      if (ref.dist_sq) tr.gap_bound = *ref.dist_sq / (2.0 * rho_sum);
    }
    run.trace.push_back(tr);
    if (k == K) break;

    const double rho = rhos.at(k);
    ProxResult pr = f.prox(metric, it.x, 1.0 / rho);
    rho_sum += rho;
    Point anchor = it.x;
    run.iterates.push_back({k + 1, std::move(pr.minimizer), Point(), std::move(anchor),
                            std::move(pr.tilde_subgradient)});
  }
  if (!ref.fstar) finish_relative(run);
  return run;
}

SolverRun run_appa(const Objective& f, const RhoSequence& rhos, const Point& x0, double A,
                   std::size_t K, const Metric& metric, const RunOptions& opts) {
  if (metric.kind() != Metric::Kind::identity) {
    fail(ErrorCode::unsupported, "A-PPA defined for L = I");
  }
  if (K < 1) fail(ErrorCode::invalid_argument, "K must be at least 1");
  if (!(A > 0.0) || !std::isfinite(A)) fail(ErrorCode::invalid_argument, "A must be positive");
  require_finite(x0, "x0");
  const Reference ref = make_reference(f, metric, x0, opts);
  const double f0 = finite_value(f, x0, 0);

  SolverRun run;
  run.algorithm = "appa";
  run.parameters = rhos.label() + ", A=" + std::to_string(A);
  run.dist_sq = ref.dist_sq;
  run.iterates.reserve(K + 1);
  run.trace.reserve(K + 1);
  run.iterates.push_back({0, x0, x0, Point(), Point()});

  std::optional<double> gap0;
  double log_A = std::log(A);
  double sqrt_sum = 0.0;
  std::optional<double> last_alpha;
  for (std::size_t k = 0;; ++k) {
    const IterateRecord& it = run.iterates.back();
    TraceRecord tr;
    tr.k = k;
    tr.f_value = k == 0 ? f0 : finite_value(f, it.x, k);
    tr.A = std::exp(log_A);
    tr.alpha = last_alpha;
    if (ref.fstar) {
      tr.f_gap = gap_of(f, ref, it.x, tr.f_value);
      if (k == 0) gap0 = tr.f_gap;
    }
    if (k > 0) {
      tr.step_norm_sq = metric.norm_sq(it.x - run.iterates[k - 1].x);
      tr.tilde_grad_norm_sq = metric.dual_norm_sq(it.tilde_grad);
      if (ref.dist_sq && gap0) {
        tr.gap_bound = 4.0 * (*gap0 + 0.5 * A * *ref.dist_sq) / (A * sqrt_sum * sqrt_sum);
      }
    }
    run.trace.push_back(tr);
    if (k == K) break;

    const double rho = rhos.at(k);
    const double Ar = std::exp(log_A + std::log(rho));
    // Rationalized root of alpha^2 + Ar alpha - Ar = 0; no cancellation for small Ar.
    const double alpha = 2.0 * Ar / (std::sqrt(Ar * Ar + 4.0 * Ar) + Ar);
    if (!(alpha > 0.0 && alpha < 1.0)) {
      fail(ErrorCode::numerical, "alpha_" + std::to_string(k) + " left (0, 1)");
    }
    Point y = (1.0 - alpha) * it.x + alpha * it.aux;
    ProxResult pr = f.prox(metric, y, 1.0 / rho);
    Point v = it.aux + (pr.minimizer - y) / alpha;
    log_A += std::log1p(-alpha);
    sqrt_sum += std::sqrt(rho);
    last_alpha = alpha;
    run.iterates.push_back({k + 1, std::move(pr.minimizer), std::move(v), std::move(y),
                            std::move(pr.tilde_subgradient)});
  }
  if (!ref.fstar) finish_relative(run);
  return run;
}

SolverRun run_sppa(const Objective& f, const Metric& metric, const Schedule& s, const Point& x0,
                   std::size_t K, const RunOptions& opts) {
  if (K < 1) fail(ErrorCode::invalid_argument, "K must be at least 1");
  require_finite(x0, "x0");
  const Reference ref = make_reference(f, metric, x0, opts);

  SolverRun run;
  run.algorithm = "sppa";
  run.parameters = s.label();
  run.dist_sq = ref.dist_sq;
  run.iterates.reserve(K + 1);
  run.trace.reserve(K + 1);
  run.terms.reserve(K + 1);
  run.iterates.push_back({0, x0, x0, Point(), Point()});

  if (ref.xstar) {
    run.alpha = opts.alpha;
    if (!run.alpha) {
      if (auto ub = alpha_upper_bound(s, std::max<std::size_t>(K, 2))) run.alpha = 0.5 * *ub;
    }
  }

  double sum22 = 0.0;
  double sum23 = 0.0;
  std::optional<double> rhs21;
  for (std::size_t k = 0;; ++k) {
    const Terms t = s.at(k);
    run.terms.push_back(t);
    const IterateRecord& it = run.iterates.back();
    TraceRecord tr;
    tr.k = k;
    tr.A = t.A;
    tr.f_value = finite_value(f, it.x, k);
    if (ref.fstar) tr.f_gap = gap_of(f, ref, it.x, tr.f_value);
    if (ref.xstar) {
      const double scaled = t.A > 0.0 ? t.A * tr.f_gap : 0.0;
      const Point dz = it.aux - *ref.xstar;
      tr.E = scaled + 0.5 * metric.norm_sq(dz);
      if (k == 0) {
        run.E0 = tr.E;
        rhs21 = scaled + 0.5 * *ref.dist_sq;
      }
      tr.bound21_rhs = rhs21;
      tr.gap_bound = t.A > 0.0 ? *rhs21 / t.A : std::numeric_limits<double>::infinity();
      if (!std::isfinite(*tr.gap_bound)) tr.gap_bound.reset();
      tr.sum22_prefix = sum22;
      tr.sum23_prefix = sum23;
      if (run.alpha) {
        const Point dx = it.x - *ref.xstar;
        const double G = t.c * tr.f_gap + 0.5 * metric.norm_sq(dx) - metric.inner(dx, dz);
        tr.E_alpha = *tr.E + *run.alpha * G;
      }
    }
    if (k > 0) {
      tr.step_norm_sq = metric.norm_sq(it.x - run.iterates[k - 1].x);
      tr.tilde_grad_norm_sq = metric.dual_norm_sq(it.tilde_grad);
    }
    run.trace.push_back(tr);
    if (k == K) break;

    const double w = (t.b + 1.0) / t.c;
    Point x_tilde = (it.aux + t.b * it.x) / (t.b + 1.0);
    ProxResult pr = f.prox(metric, x_tilde, w);
    // a (b+1) / c, through a/c so that c = a families stay exact
    Point z = it.aux + (t.a_over_c * (t.b + 1.0)) * (pr.minimizer - x_tilde);
    if (ref.xstar) {
      const Terms next = s.at(k + 1);
      const double g2 = metric.dual_norm_sq(pr.tilde_subgradient);
      const double weight22 = t.a + t.A - next.A;
      if (weight22 != 0.0) sum22 += weight22 * pr.tilde_subgradient.dot(pr.minimizer - *ref.xstar);
      sum23 += sum23_term(t.a, t.c, g2);
    }
    run.iterates.push_back({k + 1, std::move(pr.minimizer), std::move(z), std::move(x_tilde),
                            std::move(pr.tilde_subgradient)});
  }
  if (!ref.fstar) finish_relative(run);
  return run;
}

Point tilde_gradient(const Schedule& s, std::size_t k, const Point& x_tilde, const Point& x_next,
                     const Metric& metric) {
  if (x_tilde.size() != x_next.size()) {
    fail(ErrorCode::dimension_mismatch, "x_tilde and x_next differ in length");
  }
  const Terms t = s.at(k);
  return ((t.b + 1.0) / t.c) * metric.apply(x_tilde - x_next);
}

namespace {
double sqrt_prefix(const RhoSequence& rhos, std::size_t k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::sqrt(rhos.at(i));
  return acc;
}
}  // namespace

double guler_sppa_bound(const RhoSequence& rhos, std::size_t k, double dist_sq) {
  const double S = sqrt_prefix(rhos, k);
  return dist_sq / (S * S);
}

double appa_bound(const RhoSequence& rhos, std::size_t k, double A, double gap0, double dist_sq) {
  const double S = sqrt_prefix(rhos, k);
  return 4.0 * (gap0 + 0.5 * A * dist_sq) / (A * S * S);
}

}  // namespace sppa
