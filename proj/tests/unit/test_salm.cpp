#include "helpers.hpp"

#include "sppa/error.hpp"
#include "sppa/salm.hpp"
#include "sppa/solvers.hpp"

#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <vector>
#include <string>

using namespace sppa;
using testing::mat;
using testing::vec;

namespace {

struct EqQp {
  Matrix Q;
  Point q;
  Matrix A;
  Point b;
};

EqQp make_eq_qp(std::uint64_t seed, Eigen::Index n, Eigen::Index m) {
  testing::Rng rng(seed);
  EqQp e{rng.spd(n), rng.point(n), rng.matrix(m, n), Point()};
  e.b = e.A * rng.point(n);
  return e;
}

LinearEqualityProblem problem_of(const EqQp& e) {
  return LinearEqualityProblem(Objective::quadratic(e.Q, e.q), e.A, e.b);
}

// inf_x 1/2 x'Qx + q'x - lambda'(Ax - b), via the normal equations.
double dual_oracle(const EqQp& e, const Point& lambda) {
  const Point x = e.Q.llt().solve(e.A.transpose() * lambda - e.q);
  return 0.5 * x.dot(e.Q * x) + e.q.dot(x) - lambda.dot(e.A * x - e.b);
}

double subproblem_value(const EqQp& e, const Matrix& L, const Point& x, const Point& lt, double w) {
  const Point u = e.A * x - e.b;
  return 0.5 * x.dot(e.Q * x) + e.q.dot(x) - lt.dot(u) + 0.5 * w * u.dot(L * u);
}

std::string status_of(const SaddleReport& r, const std::string& prefix) {
  for (const auto& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) return c.status;
  return "missing";
}

}  // namespace

TEST_CASE("subproblem oracle minimises the augmented Lagrangian") {
  const EqQp e = make_eq_qp(1, 6, 2);
  testing::Rng rng(10);
  const Matrix L = rng.spd(2);
  const PerturbedProblem p = linear_equality_oracle(problem_of(e), Metric::dense(L));
  CHECK(p.primal_dim == 6);
  CHECK(p.dual_dim == 2);
  const Point lt = rng.point(2);
  const double w = 0.7;
  const SubproblemSolution sol = p.solve(lt, w);
  CHECK((sol.u - (e.A * sol.x - e.b)).norm() < 1e-12);
  const Point grad = e.Q * sol.x + e.q - e.A.transpose() * lt + w * e.A.transpose() * L * sol.u;
  CHECK(grad.norm() < 1e-10);
  const double v = subproblem_value(e, L, sol.x, lt, w);
  for (int i = 0; i < 50; ++i) {
    CHECK(v <= subproblem_value(e, L, sol.x + 0.1 * rng.point(6), lt, w) + 1e-12);
  }
  CHECK(p.lagrangian_value(sol.x, sol.u, lt) ==
        doctest::Approx(0.5 * sol.x.dot(e.Q * sol.x) + e.q.dot(sol.x) - lt.dot(sol.u)));
  // u inconsistent with x: outside the domain of phi
  CHECK(std::isinf(p.lagrangian_value(sol.x, sol.u + vec({1.0, 0.0}), lt)));
  CHECK_THROWS_AS(p.solve(lt, 0.0), Error);
}

TEST_CASE("dual function and dual gap") {
  const EqQp e = make_eq_qp(2, 5, 3);
  const PerturbedProblem p = linear_equality_oracle(problem_of(e), Metric::identity());
  const SaddlePoint sp = kkt_saddle_point(problem_of(e));
  CHECK(sp.residual < 1e-10);
  CHECK((e.Q * sp.x + e.q - e.A.transpose() * sp.lambda).norm() < 1e-10);
  CHECK((e.A * sp.x - e.b).norm() < 1e-10);

  testing::Rng rng(20);
  for (int i = 0; i < 10; ++i) {
    const Point lambda = rng.point(3);
    CHECK(p.dual_value(lambda) == doctest::Approx(dual_oracle(e, lambda)).epsilon(1e-10));
    const double gap = dual_oracle(e, sp.lambda) - dual_oracle(e, lambda);
    CHECK(p.dual_gap(lambda, sp.lambda) == doctest::Approx(gap).epsilon(1e-8).scale(1.0));
    CHECK(p.dual_gap(lambda, sp.lambda) >= -1e-12);
  }
  // strong duality
  const double fx = 0.5 * sp.x.dot(e.Q * sp.x) + e.q.dot(sp.x);
  CHECK(p.dual_value(sp.lambda) == doctest::Approx(fx).epsilon(1e-10));
}

TEST_CASE("SALM steps by hand") {
  const EqQp e = make_eq_qp(3, 4, 2);
  const Metric metric = Metric::diagonal(vec({2.0, 0.5}));
  const Matrix L = metric.to_dense(2);
  const Schedule s = Schedule::constant_ratio(1.0, 4.0);
  const PerturbedProblem p = linear_equality_oracle(problem_of(e), metric);
  const Point lambda0 = vec({0.3, -0.2});
  const DualRun run = run_salm(p, metric, s, lambda0, 5);
  REQUIRE(run.iterates.size() == 6);
  REQUIRE(run.trace.size() == 6);

  Point lambda = lambda0, z = lambda0;
  double sum = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const double kk = static_cast<double>(k);
    const double a = (kk + 4) / 4, b = kk / 4, c = a;
    const Point lt = (b * lambda + z) / (b + 1);
    const double w = c / (b + 1);
    const Matrix H = e.Q + w * e.A.transpose() * L * e.A;
    const Point x = H.llt().solve(-e.q + e.A.transpose() * lt + w * e.A.transpose() * L * e.b);
    const Point u = e.A * x - e.b;
    lambda = lt - w * L * u;
    z = z - a * L * u;
    sum += (a * c - 0.5 * a * a) * u.dot(L * u);
    CHECK((run.iterates[k].lambda_tilde - lt).norm() < 1e-12);
    CHECK((run.iterates[k].x_next - x).norm() < 1e-10);
    CHECK((run.iterates[k + 1].lambda - lambda).norm() < 1e-10);
    CHECK((run.iterates[k + 1].z - z).norm() < 1e-10);
    CHECK(*run.trace[k + 1].u_norm_sq_L == doctest::Approx(u.dot(L * u)));
    CHECK(run.trace[k + 1].sum_u_prefix == doctest::Approx(sum));
    // x_{k+1} minimises L(., lambda_{k+1}): the dual value equals the Lagrangian there
    CHECK(*run.trace[k + 1].lemma2_residual < 1e-9 * (1 + std::abs(dual_oracle(e, lambda))));
  }
  CHECK_FALSE(run.trace[0].u_norm_sq_L.has_value());
}

TEST_CASE("SALM converges and certifies on a random equality QP") {
  const EqQp e = make_eq_qp(11, 10, 3);
  const LinearEqualityProblem prob = problem_of(e);
  const SaddlePoint sp = kkt_saddle_point(prob);
  const Schedule s = Schedule::constant_ratio(1.0, 4.0);
  const PerturbedProblem p = linear_equality_oracle(prob, Metric::identity());
  const DualRun run = run_salm(p, Metric::identity(), s, Point::Zero(3), 500);
  CHECK((run.iterates.back().lambda - sp.lambda).norm() < 1e-4 * (1 + sp.lambda.norm()));
  CHECK((run.iterates[499].x_next - sp.x).norm() < 1e-3 * (1 + sp.x.norm()));

  const SaddleReport rep = saddle_certificates(run, sp.x, sp.lambda, s);
  CHECK(rep.passed);
  CHECK(status_of(rep, "strong duality") == "PASS");
  CHECK(status_of(rep, "dual-gap bound") == "PASS");
  CHECK(status_of(rep, "residual sum bound") == "PASS");
  CHECK(status_of(rep, "subproblem fixed-point identity") == "PASS");
  const double R = 0.5 * sp.lambda.squaredNorm();  // A_0 = 0, lambda_0 = 0
  CHECK(rep.corollary_rhs == doctest::Approx(R));
  REQUIRE(rep.dual_gap.size() == run.trace.size());
  for (std::size_t k = 1; k < run.trace.size(); ++k) {
    // the plain difference cancels, so compare with an absolute tolerance
    const double dstar = dual_oracle(e, sp.lambda);
    const double dg = dstar - dual_oracle(e, run.iterates[k].lambda);
    CHECK(std::abs(*rep.dual_gap[k] - dg) <= 1e-12 * (1 + std::abs(dstar)));
    CHECK(*run.trace[k].A * *rep.dual_gap[k] <= R * (1 + 1e-9) + 1e-12);
    CHECK(run.trace[k].sum_u_prefix <= R * (1 + 1e-9));
  }

  // a wrong multiplier breaks strong duality or the bound
  const SaddleReport bad = saddle_certificates(run, sp.x, sp.lambda + Point::Constant(3, 0.5), s);
  CHECK_FALSE(bad.passed);
  CHECK_THROWS_AS(saddle_certificates(run, sp.x, sp.lambda, Schedule::constant_ratio(1.0, 3.0)), Error);
}

TEST_CASE("SALM error paths") {
  // Q = 0 with one constraint in R^2: Q + A'A is singular
  const Objective zero = Objective::quadratic(Matrix::Zero(2, 2), vec({1.0, 0.0}));
  const LinearEqualityProblem flat(zero, mat({{1.0, 1.0}}), vec({1.0}));
  try {
    linear_equality_oracle(flat, Metric::identity());
    FAIL("singular subproblem accepted");
  } catch (const Error& err) {
    CHECK(std::string(err.what()).find("subproblem not strongly convex") != std::string::npos);
  }
  // positive semidefinite Q is fine when A fills the null space; then no dual function
  const Objective semi = Objective::quadratic(mat({{1.0, 0.0}, {0.0, 0.0}}), vec({0.0, 0.0}));
  const PerturbedProblem ok = linear_equality_oracle(
      LinearEqualityProblem(semi, mat({{0.0, 1.0}}), vec({2.0})), Metric::identity());
  CHECK_FALSE(static_cast<bool>(ok.dual_value));

  CHECK_THROWS_AS(LinearEqualityProblem(Objective::quadratic(Matrix::Identity(2, 2), vec({0, 0})),
                                        mat({{1.0, 0.0}, {1.0, 0.0}}), vec({1.0, 2.0})),
                  Error);
  CHECK_THROWS_AS(LinearEqualityProblem(Objective::l1(1.0, 2), mat({{1.0, 0.0}}), vec({1.0})), Error);
  CHECK_THROWS_AS(LinearEqualityProblem(Objective::quadratic(Matrix::Identity(2, 2), vec({0, 0})),
                                        mat({{1.0, 0.0, 0.0}}), vec({1.0})),
                  Error);

  const EqQp e = make_eq_qp(5, 3, 1);
  const PerturbedProblem p = linear_equality_oracle(problem_of(e), Metric::identity());
  CHECK_THROWS_AS(run_salm(p, Metric::identity(), Schedule::constant_ratio(1.0, 4.0), vec({0.0, 0.0}), 3), Error);

  PerturbedProblem throwing = p;
  throwing.solve = [](const Point&, double) -> SubproblemSolution {
    fail(ErrorCode::numerical, "boom");
  };
  try {
    run_salm(throwing, Metric::identity(), Schedule::constant_ratio(1.0, 4.0), vec({0.0}), 3);
    FAIL("oracle failure swallowed");
  } catch (const Error& err) {
    CHECK(std::string(err.what()) == "iteration 0: boom");
    CHECK(err.code() == ErrorCode::numerical);
  }
}

TEST_CASE("SALM is SPPA on the negative dual function with the inverse metric") {
  const EqQp e = make_eq_qp(8, 7, 3);
  testing::Rng rng(80);
  const Matrix L = rng.spd(3);
  const Matrix Qinv = e.Q.inverse();
  // -d(lambda) = 1/2 lambda' (A Q^-1 A') lambda - (A Q^-1 q + b)' lambda + const
  const Matrix H = e.A * Qinv * e.A.transpose();
  const Objective neg_dual = Objective::quadratic(0.5 * (H + H.transpose()), -(e.A * Qinv * e.q + e.b));
  const Point lambda0 = rng.point(3);
  // Under a geometric schedule the two formulations' rounding differences grow by roughly 1.6x per
  // step, so that case is compared over a shorter horizon.
  const std::vector<std::pair<Schedule, std::size_t>> cases = {
      {Schedule::constant_ratio(1.0, 4.0), 60}, {Schedule::polynomial(2, 1.0), 60},
      {Schedule::guler(RhoSequence::constant(0.5)), 60}, {Schedule::exponential(1.5, 1.0), 35}};
  for (const auto& [s, K] : cases) {
    const DualRun dual = run_salm(linear_equality_oracle(problem_of(e), Metric::dense(L)), Metric::dense(L), s,
                                  lambda0, K);
    const SolverRun primal = run_sppa(neg_dual, Metric::dense(L.inverse()), s, lambda0, K);
    double worst = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
      const Point& a = dual.iterates[k].lambda;
      worst = std::max(worst, (a - primal.iterates[k].x).norm() / (1.0 + a.norm()));
      worst = std::max(worst, (dual.iterates[k].z - primal.iterates[k].aux).norm() / (1.0 + dual.iterates[k].z.norm()));
    }
    CHECK_MESSAGE(worst <= 1e-9, s.label() << ": " << worst);
  }
}
