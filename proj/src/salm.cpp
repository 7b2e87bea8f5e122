#include "sppa/salm.hpp"

#include "sppa/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace sppa {

namespace {

const Objective::Quadratic& quadratic_of(const Objective& f) {
  const auto* q = f.quadratic_part();
  if (!q) fail(ErrorCode::unsupported, "equality-constrained problems need a quadratic objective, got " + f.kind_name());
  return *q;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

LinearEqualityProblem::LinearEqualityProblem(Objective f_, Matrix A_, Point b_)
    : f(std::move(f_)), A(std::move(A_)), b(std::move(b_)) {
  const auto& q = quadratic_of(f);
  if (A.rows() == 0) fail(ErrorCode::invalid_argument, "A must have at least one row");
  if (A.cols() != q.Q.rows()) {
    fail(ErrorCode::dimension_mismatch, "A has " + std::to_string(A.cols()) + " columns but Q is " +
                                            std::to_string(q.Q.rows()) + " x " + std::to_string(q.Q.rows()));
  }
  require_dim(b, A.rows(), "b");
  require_finite(b, "b");
  if (!A.allFinite()) fail(ErrorCode::invalid_argument, "A must be finite");
  const Point xls = A.completeOrthogonalDecomposition().solve(b);
  const double res = (A * xls - b).norm();
  if (res > 1e-8) {
    fail(ErrorCode::invalid_argument, "Ax = b is infeasible (least-squares residual " + fmt(res) + ")");
  }
}

PerturbedProblem linear_equality_oracle(const LinearEqualityProblem& p, const Metric& metric) {
  const auto& quad = quadratic_of(p.f);
  const Index m = p.A.rows();
  const Index n = p.A.cols();
  if (metric.dim() != 0 && metric.dim() != m) {
    fail(ErrorCode::dimension_mismatch, "dual metric has dimension " + std::to_string(metric.dim()) +
                                            ", expected " + std::to_string(m));
  }

  struct Shared {
    Matrix Q;
    Point q;
    double c0;
    Matrix A;
    Point b;
    Matrix AtLA;
    Point AtLb;
    std::optional<Eigen::LLT<Matrix>> Q_llt;
    double feas_tol;
  };
  auto sh = std::make_shared<Shared>();
  sh->Q = quad.Q;
  sh->q = quad.b;
  sh->c0 = quad.c;
  sh->A = p.A;
  sh->b = p.b;
  const Matrix LA = metric.to_dense(m) * p.A;
  sh->AtLA = p.A.transpose() * LA;
  sh->AtLA = 0.5 * (sh->AtLA + sh->AtLA.transpose()).eval();
  sh->AtLb = LA.transpose() * p.b;
  sh->feas_tol = 1e-9 * (1.0 + p.b.lpNorm<Eigen::Infinity>());

  // Q + w A'LA is positive definite for every w > 0 iff it is for w = 1.
  Eigen::LLT<Matrix> probe(sh->Q + sh->AtLA);
  if (probe.info() != Eigen::Success) fail(ErrorCode::numerical, "subproblem not strongly convex");
  Eigen::LLT<Matrix> qllt(sh->Q);
  if (qllt.info() == Eigen::Success) sh->Q_llt = std::move(qllt);

  PerturbedProblem out;
  out.primal_dim = n;
  out.dual_dim = m;
  out.solve = [sh](const Point& lt, double w) {
    if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorCode::invalid_argument, "penalty weight w must be positive");
    require_dim(lt, sh->A.rows(), "lambda_tilde");
    const Matrix H = sh->Q + w * sh->AtLA;
    const Point rhs = -sh->q + sh->A.transpose() * lt + w * sh->AtLb;
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success) fail(ErrorCode::numerical, "subproblem not strongly convex");
    SubproblemSolution s;
    s.x = llt.solve(rhs);
    s.u = sh->A * s.x - sh->b;
    return s;
  };
  out.lagrangian_value = [sh](const Point& x, const Point& u, const Point& lambda) {
    if ((sh->A * x - sh->b - u).lpNorm<Eigen::Infinity>() > sh->feas_tol) {
      return std::numeric_limits<double>::infinity();
    }
    return 0.5 * x.dot(sh->Q * x) + sh->q.dot(x) + sh->c0 - lambda.dot(u);
  };
  if (sh->Q_llt) {
    out.dual_value = [sh](const Point& lambda) {
      const Point x = sh->Q_llt->solve(sh->A.transpose() * lambda - sh->q);
      return 0.5 * x.dot(sh->Q * x) + sh->q.dot(x) + sh->c0 - lambda.dot(sh->A * x - sh->b);
    };
    out.dual_gap = [sh](const Point& lambda, const Point& lambda_star) {
      const Point d = lambda - lambda_star;
      const Point xs = sh->Q_llt->solve(sh->A.transpose() * lambda_star - sh->q);
      const Point Atd = sh->A.transpose() * d;
      const double curvature = Atd.dot(sh->Q_llt->solve(Atd));
      return 0.5 * curvature + (sh->A * xs - sh->b).dot(d);
    };
  }
  return out;
}

SaddlePoint kkt_saddle_point(const LinearEqualityProblem& p) {
  const auto& quad = quadratic_of(p.f);
  const Index n = p.A.cols();
  const Index m = p.A.rows();
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = quad.Q;
  K.topRightCorner(n, m) = -p.A.transpose();
  K.bottomLeftCorner(m, n) = p.A;
  Point rhs(n + m);
  rhs << -quad.b, p.b;
  Eigen::FullPivLU<Matrix> lu(K);
  Point sol;
  if (lu.isInvertible()) {
    sol = lu.solve(rhs);
  } else {
    sol = K.completeOrthogonalDecomposition().solve(rhs);
  }
  SaddlePoint sp;
  sp.x = sol.head(n);
  sp.lambda = sol.tail(m);
  sp.residual = (K * sol - rhs).lpNorm<Eigen::Infinity>();
  return sp;
}

DualRun run_salm(const PerturbedProblem& p, const Metric& metric, const Schedule& s,
                 const Point& lambda0, std::size_t K) {
  if (!p.solve) fail(ErrorCode::invalid_argument, "perturbed problem has no subproblem oracle");
  if (K < 1) fail(ErrorCode::invalid_argument, "K must be at least 1");
  require_dim(lambda0, p.dual_dim, "lambda0");
  require_finite(lambda0, "lambda0");

  DualRun run;
  run.problem = p;
  run.metric = metric;
  run.schedule = s.label();
  run.iterates.reserve(K + 1);
  run.trace.reserve(K + 1);
  run.terms.reserve(K + 1);

  Point lambda = lambda0;
  Point z = lambda0;
  double sum_u = 0.0;
  std::optional<double> u_sq;
  std::optional<double> lemma2;
  for (std::size_t k = 0;; ++k) {
    const Terms t = s.at(k);
    run.terms.push_back(t);
    DualTraceRecord tr;
    tr.k = k;
    tr.A = t.A;
    tr.u_norm_sq_L = u_sq;
    tr.sum_u_prefix = sum_u;
    tr.lemma2_residual = lemma2;
    run.trace.push_back(tr);
    DualIterate it;
    it.k = k;
    it.lambda = lambda;
    it.z = z;
    if (k == K) {
      run.iterates.push_back(std::move(it));
      break;
    }

    it.lambda_tilde = (t.b * lambda + z) / (t.b + 1.0);
    const double w = t.c / (t.b + 1.0);
    SubproblemSolution sol;
    try {
      sol = p.solve(it.lambda_tilde, w);
    } catch (const Error& e) {
      fail(e.code(), "iteration " + std::to_string(k) + ": " + e.what());
    }
    if (sol.u.size() != p.dual_dim || !sol.u.allFinite()) {
      fail(ErrorCode::numerical, "iteration " + std::to_string(k) + ": oracle returned an invalid u");
    }
    const Point Lu = metric.apply(sol.u);
    lambda = it.lambda_tilde - w * Lu;
    z -= t.a * Lu;

    u_sq = metric.norm_sq(sol.u);
    const double g = std::sqrt(*u_sq);
    if (t.a > 0.0 && g > 0.0) sum_u += (t.a * g) * ((t.c - 0.5 * t.a) * g);
    if (p.dual_value && p.lagrangian_value) {
      lemma2 = std::abs(p.dual_value(lambda) - p.lagrangian_value(sol.x, sol.u, lambda));
    }
    it.x_next = std::move(sol.x);
    it.u_next = std::move(sol.u);
    run.iterates.push_back(std::move(it));
  }
  return run;
}

namespace {

SaddleCheck na(std::string name, std::string why) {
  return {std::move(name), "N/A", std::nullopt, std::move(why)};
}

}  // namespace

SaddleReport saddle_certificates(const DualRun& run, const Point& xstar, const Point& lambda_star,
                                 const Schedule& s) {
  SaddleReport rep;
  const auto& p = run.problem;
  require_dim(lambda_star, p.dual_dim, "lambda_star");
  require_dim(xstar, p.primal_dim, "xstar");
  if (s.label() != run.schedule) {
    fail(ErrorCode::invalid_argument, "run used schedule " + run.schedule + ", not " + s.label());
  }
  rep.notes.push_back(
      "distance term uses ||lambda_0 - lambda*||^2 in the L^{-1} metric, with {lambda*} as the "
      "representative of the dual solution set");

  const std::size_t n_rec = run.iterates.size();
  rep.dual_gap.assign(n_rec, std::nullopt);

  if (p.lagrangian_value && p.dual_value) {
    const double fx = p.lagrangian_value(xstar, Point::Zero(p.dual_dim), lambda_star);
    const double dl = p.dual_value(lambda_star);
    const double slack = 1e-8 * (1.0 + std::abs(fx)) - std::abs(fx - dl);
    rep.checks.push_back({"strong duality at the supplied saddle point", slack >= 0.0 ? "PASS" : "FAIL",
                          slack, "f(x*) = " + fmt(fx) + ", d(lambda*) = " + fmt(dl)});
  } else {
    rep.checks.push_back(na("strong duality at the supplied saddle point", "dual function unavailable"));
  }

  if (!p.dual_gap) {
    rep.checks.push_back(na("dual-gap bound", "dual function unavailable"));
    rep.checks.push_back(na("residual sum bound", "dual function unavailable"));
    rep.checks.push_back(na("subproblem fixed-point identity", "dual function unavailable"));
  } else {
    const Terms t0 = run.terms.at(0);
    const double gap0 = p.dual_gap(run.iterates[0].lambda, lambda_star);
    const double dist = run.metric.dual_norm_sq(run.iterates[0].lambda - lambda_star);
    rep.corollary_rhs = (t0.A > 0.0 ? t0.A * gap0 : 0.0) + 0.5 * dist;
    const double scale = std::max(1.0, rep.corollary_rhs);

    double worst_gap = std::numeric_limits<double>::infinity();
    std::size_t worst_gap_k = 0;
    double worst_sum = std::numeric_limits<double>::infinity();
    std::size_t worst_sum_k = 0;
    for (std::size_t k = 0; k < n_rec; ++k) {
      const double g = p.dual_gap(run.iterates[k].lambda, lambda_star);
      rep.dual_gap[k] = g;
      const double A = run.terms[k].A;
      const double sg = (rep.corollary_rhs - (A > 0.0 ? A * g : 0.0)) / scale;
      if (sg < worst_gap) {
        worst_gap = sg;
        worst_gap_k = k;
      }
      const double ss = (rep.corollary_rhs - run.trace[k].sum_u_prefix) / scale;
      if (ss < worst_sum) {
        worst_sum = ss;
        worst_sum_k = k;
      }
    }
    rep.checks.push_back({"dual-gap bound A_k [d(lambda*) - d(lambda_k)] <= R",
                          worst_gap >= -1e-9 ? "PASS" : "FAIL", worst_gap,
                          "R = " + fmt(rep.corollary_rhs) + ", worst relative slack at k=" +
                              std::to_string(worst_gap_k)});
    rep.checks.push_back({"residual sum bound sum (a c - a^2/2) ||u||^2_L <= R",
                          worst_sum >= -1e-9 ? "PASS" : "FAIL", worst_sum,
                          "worst relative slack at k=" + std::to_string(worst_sum_k)});

    double worst = 0.0;
    std::size_t worst_k = 0;
    bool any = false;
    for (const auto& tr : run.trace) {
      if (!tr.lemma2_residual) continue;
      any = true;
      if (!(*tr.lemma2_residual <= worst)) {
        worst = *tr.lemma2_residual;
        worst_k = tr.k;
      }
    }
    if (any) {
      rep.checks.push_back({"subproblem fixed-point identity", worst <= 1e-9 ? "PASS" : "FAIL",
                            1e-9 - worst,
                            "max |inf_x L(x, lambda_k) - L(x_k, lambda_k)| = " + fmt(worst) +
                                " at k=" + std::to_string(worst_k)});
    } else {
      rep.checks.push_back(na("subproblem fixed-point identity", "no iterations recorded"));
    }
  }
  for (const auto& c : rep.checks) rep.passed = rep.passed && c.status != "FAIL";
  return rep;
}

}  // namespace sppa
