#include "helpers.hpp"

#include "sppa/error.hpp"
#include "sppa/objective.hpp"

#include <doctest.h>

#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <string>
#include <vector>

using namespace sppa;
using testing::mat;
using testing::vec;

namespace {

// f(p) >= f(x) + <g, p - x> - 1e-9 for every probe.
double worst_subgradient_slack(const Objective& f, const Point& x, const Point& g,
                               const std::vector<Point>& probes) {
  double worst = 1e300;
  const double fx = f.value(x).value();
  for (const auto& p : probes) {
    const ExtendedReal fp = f.value(p);
    if (fp.is_infinite()) continue;
    worst = std::min(worst, fp.value() - fx - g.dot(p - x));
  }
  return worst;
}

std::vector<Point> probes_around(testing::Rng& rng, const Point& x, int count, double scale) {
  std::vector<Point> out;
  for (int i = 0; i < count; ++i) out.push_back(x + scale * rng.point(x.size()));
  return out;
}

}  // namespace

TEST_CASE("objective values") {
  const Objective q = Objective::quadratic(Matrix::Identity(2, 2), Point::Zero(2));
  CHECK(q.value(vec({3, 4})).value() == doctest::Approx(12.5));
  CHECK(Objective::l1(2.0).value(vec({1, -2})).value() == doctest::Approx(6.0));
  const Objective ind = Objective::affine_indicator(mat({{1, 1}}), vec({2}));
  CHECK(ind.value(vec({1, 1})) == ExtendedReal::finite(0.0));
  CHECK(ind.value(vec({0, 0})).is_infinite());
  CHECK_THROWS_AS(ind.value(vec({0, 0})).value(), Error);
  CHECK_THROWS_AS(q.value(vec({1, 2, 3})), Error);
}

TEST_CASE("quadratic validation") {
  CHECK_THROWS_AS(Objective::quadratic(mat({{1, 2}, {2, 1}}), Point::Zero(2)), Error);
  CHECK_THROWS_AS(Objective::quadratic(mat({{1, 1}, {0, 1}}), Point::Zero(2)), Error);
  CHECK_THROWS_AS(Objective::quadratic(Matrix::Identity(2, 2), Point::Zero(3)), Error);
  CHECK_NOTHROW(Objective::quadratic(mat({{1, 1}, {1, 1}}), Point::Zero(2)));
  CHECK_THROWS_AS(Objective::l1(0.0), Error);
}

TEST_CASE("metric prox closed forms") {
  SUBCASE("quadratic with identity metric") {
    const Objective q = Objective::quadratic(Matrix::Identity(2, 2), Point::Zero(2));
    const ProxResult r = q.prox(Metric::identity(), vec({2, 2}), 1.0);
    CHECK(r.minimizer.isApprox(vec({1, 1}), 1e-15));
    CHECK(r.inner_iterations == 0);
  }
  SUBCASE("l1 soft threshold") {
    const Objective l = Objective::l1(1.0);
    const Point y = vec({3, -0.5, 2});
    const ProxResult r = l.prox(Metric::identity(), y, 1.0);
    CHECK(r.minimizer.isApprox(vec({2, 0, 1}), 1e-15));
    // inclusion: g_i = sign(x_i) where x_i != 0, |g_i| <= 1 otherwise
    const Point g = r.tilde_subgradient;
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(std::abs(g[1]) <= 1.0);
    CHECK(g[2] == doctest::Approx(1.0));
  }
  SUBCASE("quadratic with diagonal metric: stationarity residual") {
    const Matrix Q = mat({{2, 0}, {0, 4}});
    const Point b = vec({-2, -4});
    const Metric L = Metric::diagonal(vec({1, 2}));
    const Point y = vec({0, 0});
    const double w = 2.0;
    const Objective q = Objective::quadratic(Q, b);
    const Point x = q.prox(L, y, w).minimizer;
    const Point residual = Q * x + b + w * L.apply(x - y);
    CHECK(residual.norm() <= 1e-12);
  }
  SUBCASE("l1 with diagonal metric uses per-coordinate thresholds") {
    const Objective l = Objective::l1(1.0);
    const Metric L = Metric::diagonal(vec({2, 0.5}));
    const Point x = l.prox(L, vec({1, 1}), 1.0).minimizer;
    // thresholds 1/(1*2) = 0.5 and 1/(1*0.5) = 2
    CHECK(x.isApprox(vec({0.5, 0.0}), 1e-15));
  }
}

TEST_CASE("prox errors") {
  const Objective l = Objective::l1(1.0);
  try {
    l.prox(Metric::dense(mat({{2, 1}, {1, 2}})), vec({1, 1}), 1.0);
    FAIL("expected unsupported pairing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported);
    CHECK(std::string(e.what()).find("l1") != std::string::npos);
    CHECK(std::string(e.what()).find("dense") != std::string::npos);
  }
  CHECK_THROWS_AS(l.prox(Metric::identity(), vec({1, 1}), 0.0), Error);
  CHECK_THROWS_AS(l.prox(Metric::identity(), vec({1, 1}), -1.0), Error);
  const Objective s = Objective::sum(Objective::quadratic(mat({{2, 1}, {1, 2}}), Point::Zero(2)), l);
  CHECK_THROWS_AS(s.prox(Metric::identity(), vec({1, 1}), 1.0), Error);
}

TEST_CASE("gradients") {
  const Objective q1 = Objective::quadratic(Matrix::Identity(2, 2), Point::Zero(2));
  CHECK(q1.gradient(vec({1, 2})).isApprox(vec({1, 2})));
  const Objective q2 = Objective::quadratic(mat({{2, 0}, {0, 3}}), vec({1, 0}));
  CHECK(q2.gradient(vec({1, 1})).isApprox(vec({3, 3})));
  try {
    Objective::l1(1.0).gradient(vec({1}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("gradient unavailable") != std::string::npos);
  }
  testing::Rng rng(5);
  const Objective q = Objective::quadratic(rng.spd(5), rng.point(5), 0.3);
  const Point x = rng.point(5);
  const Point g = q.gradient(x);
  const double h = 1e-6;
  for (Index i = 0; i < 5; ++i) {
    Point e = Point::Zero(5);
    e[i] = h;
    const double fd = (q.value(x + e).value() - q.value(x - e).value()) / (2 * h);
    CHECK(std::abs(fd - g[i]) <= 1e-6);
  }
}

TEST_CASE("affine indicator prox is the metric projection") {
  testing::Rng rng(9);
  const Matrix A = rng.matrix(2, 5);
  const Point rhs = rng.point(2);
  const Objective ind = Objective::affine_indicator(A, rhs);
  const Matrix Lm = rng.spd(5);
  const Metric L = Metric::dense(Lm);
  const Point y = rng.point(5);
  const Point x = ind.prox(L, y, 3.0).minimizer;
  // y - L^{-1} A' (A L^{-1} A')^{-1} (A y - rhs)
  const Matrix Linv = Lm.inverse();
  const Matrix S = A * Linv * A.transpose();
  const Point expected = y - Linv * A.transpose() * S.ldlt().solve(A * y - rhs);
  CHECK((x - expected).norm() <= 1e-10);
  CHECK((A * x - rhs).norm() <= 1e-10);
  CHECK(ind.value(x).is_finite());
  CHECK_THROWS_AS(Objective::affine_indicator(mat({{1, 1}, {1, 1}}), vec({1, 2})).prox(Metric::identity(), vec({0, 0}), 1.0), Error);
}

TEST_CASE("prox output is a subgradient at the minimizer") {
  testing::Rng rng(17);
  const Index n = 6;
  const Point diag_q = rng.point(n).cwiseAbs().array() + 0.2;
  const std::vector<Objective> fs{
      Objective::quadratic(rng.spd(n), rng.point(n)),
      Objective::l1(0.7),
      Objective::sum(Objective::quadratic(Matrix(diag_q.asDiagonal()), rng.point(n)), Objective::l1(0.4)),
  };
  const Metric L = Metric::diagonal(rng.point(n).cwiseAbs().array() + 0.5);
  for (const auto& f : fs) {
    for (int trial = 0; trial < 10; ++trial) {
      const Point y = 2.0 * rng.point(n);
      const double w = rng.uniform(0.1, 5.0);
      const ProxResult r = f.prox(L, y, w);
      const auto probes = probes_around(rng, r.minimizer, 50, 1.5);
      CHECK(worst_subgradient_slack(f, r.minimizer, r.tilde_subgradient, probes) >= -1e-9);
    }
  }
  // Affine indicator: the subgradient lies in range(A'), so probes on the set give zero slack.
  const Matrix A = rng.matrix(2, n);
  const Objective ind = Objective::affine_indicator(A, rng.point(2));
  const ProxResult r = ind.prox(L, rng.point(n), 2.0);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  const Matrix N = cod.matrixZ().bottomRows(n - 2).transpose();
  std::vector<Point> probes;
  for (int i = 0; i < 50; ++i) probes.push_back(r.minimizer + N * rng.point(n - 2));
  CHECK(worst_subgradient_slack(ind, r.minimizer, r.tilde_subgradient, probes) >= -1e-9);
}

TEST_CASE("prox is nonexpansive in the metric and tends to the identity for large weights") {
  testing::Rng rng(23);
  const Index n = 5;
  const Metric L = Metric::diagonal(rng.point(n).cwiseAbs().array() + 0.5);
  const std::vector<Objective> fs{Objective::quadratic(rng.spd(n), rng.point(n)), Objective::l1(1.3)};
  for (const auto& f : fs) {
    for (int trial = 0; trial < 50; ++trial) {
      const Point y1 = rng.point(n);
      const Point y2 = rng.point(n);
      const Point p1 = f.prox(L, y1, 0.8).minimizer;
      const Point p2 = f.prox(L, y2, 0.8).minimizer;
      CHECK(L.norm_sq(p1 - p2) <= L.norm_sq(y1 - y2) * (1 + 1e-12));
    }
  }
  const Objective l1 = Objective::l1(1.0);
  const Point y = rng.point(n);
  CHECK(std::sqrt(L.norm_sq(l1.prox(L, y, 1e8).minimizer - y)) <= 1e-6);
}

TEST_CASE("custom objectives trust the oracle and report inner iterations") {
  CustomOracles o;
  o.name = "half-squared";
  o.dim = 2;
  o.value = [](const Point& x) { return ExtendedReal::finite(0.5 * x.squaredNorm()); };
  o.prox = [](const Point& y, double w, const Metric&) { return CustomProx{w * y / (1.0 + w), 7}; };
  const Objective f = Objective::custom(o);
  const ProxResult r = f.prox(Metric::identity(), vec({2, 2}), 1.0);
  CHECK(r.inner_iterations == 7);
  CHECK(r.minimizer.isApprox(vec({1, 1})));
  CHECK(r.tilde_subgradient.isApprox(vec({1, 1})));
  CHECK_FALSE(f.smooth());
  CHECK_THROWS_AS(f.gradient(vec({1, 1})), Error);
}

TEST_CASE("gap keeps precision near the minimizer") {
  const Objective q = Objective::quadratic(mat({{2, 0}, {0, 1}}), vec({-2, -1}), 3.0);
  const Point xs = vec({1, 1});
  const Point x = xs + vec({1e-9, -2e-9});
  // f(x) - f(x*) = 1/2 d'Qd for the minimizer x*
  const double expected = 0.5 * (2 * 1e-18 + 4e-18);
  CHECK(q.gap(x, xs).value() == doctest::Approx(expected).epsilon(1e-10));
}
