#include "helpers.hpp"

#include "sppa/error.hpp"
#include "sppa/schedule.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace sppa;

namespace {

void check_terms(const Terms& t, double A, double a, double b, double c) {
  CHECK(t.A == doctest::Approx(A));
  CHECK(t.a == doctest::Approx(a));
  CHECK(t.b == doctest::Approx(b));
  CHECK(t.c == doctest::Approx(c));
}

double rel(double x, double y) { return std::abs(x - y) / std::max(1.0, std::max(std::abs(x), std::abs(y))); }

bool has_failed(const CertificationReport& r, const std::string& fragment) {
  for (const auto& c : r.checks)
    if (!c.passed && c.name.find(fragment) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("polynomial schedule values") {
  check_terms(Schedule::polynomial(1, 1.0).at(3), 3, 1, 3, 1);
  check_terms(Schedule::polynomial(2, 1.0).at(2), 2 * 3, 2 * 3, 1, 6);
  CHECK_THROWS_AS(Schedule::polynomial(0, 1.0), Error);
  CHECK_THROWS_AS(Schedule::polynomial(2, 0.0), Error);
  CHECK_THROWS_AS(Schedule::polynomial(2, 1.5), Error);
  for (int p : {1, 2, 3}) {
    for (double d : {1.0, 0.9, 0.5}) {
      const Schedule s = Schedule::polynomial(p, d);
      for (std::size_t k = 0; k < 10000; ++k) {
        const Terms t = s.at(k);
        const Terms n = s.at(k + 1);
        CHECK_MESSAGE(n.A - t.A <= d * t.a * (1 + 1e-12), "p=" << p << " d=" << d << " k=" << k);
        if (k >= 1) CHECK(rel(t.A, t.a * t.b) <= 1e-12);
      }
    }
  }
}

TEST_CASE("exponential schedule values") {
  check_terms(Schedule::exponential(2.0, 1.0).at(3), 8, 8, 1, 8);
  check_terms(Schedule::exponential(2.0, 0.5).at(0), 1, 2, 0.5, 2);
  CHECK_THROWS_AS(Schedule::exponential(1.0, 1.0), Error);
  CHECK_THROWS_AS(Schedule::exponential(0.5, 1.0), Error);
  const double rho = 1.2, d = 0.8;
  const Schedule s = Schedule::exponential(rho, d);
  for (std::size_t k = 0; k < 500; ++k) {
    const Terms t = s.at(k);
    CHECK(t.a >= (rho - 1) / d * t.A * (1 - 1e-12));
    CHECK(t.log_A == doctest::Approx(static_cast<double>(k) * std::log(rho)));
  }
}

TEST_CASE("exponential overflow is reported, not silently infinite") {
  const Schedule s = Schedule::exponential(2.0, 1.0);
  CHECK_NOTHROW(s.at(1000));
  try {
    s.at(1100);
    FAIL("expected an overflow error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numerical);
  }
}

TEST_CASE("constant ratio schedule") {
  // A_k = a_k b_k with a = c0 (k+r)/r and b = k/r.
  check_terms(Schedule::constant_ratio(1.0, 2.0).at(2), 2.0 * 1.0, 2, 1, 2);
  CHECK_THROWS_AS(Schedule::constant_ratio(1.0, 1.5), Error);
  CHECK_THROWS_AS(Schedule::constant_ratio(0.0, 4.0), Error);
  for (double c0 : {0.5, 1.0, 3.0}) {
    for (double r : {2.0, 3.0, 4.0, 7.5}) {
      const Schedule s = Schedule::constant_ratio(c0, r);
      for (std::size_t k = 0; k < 2000; ++k) {
        const Terms t = s.at(k);
        const Terms n = s.at(k + 1);
        CHECK(rel(t.c / (t.b + 1.0), c0) <= 1e-12);
        const double kk = static_cast<double>(k);
        CHECK(rel(n.A - t.A, c0 * (2 * kk + r + 1) / (r * r)) <= 1e-12);
        CHECK(n.A - t.A <= 2.0 / r * t.a * (1 + 1e-12));
      }
      CHECK(certify(s, 1000, Theorem::T4).passed);
    }
  }
}

TEST_CASE("guler schedule") {
  const Schedule s = Schedule::guler(RhoSequence::constant(1.0));
  // S_1 = 1
  check_terms(s.at(1), 0.5, 1.5, 1.0 / 3.0, 4.0 / 3.0);
  const Terms t1 = s.at(1);
  CHECK(t1.c / (t1.b + 1) == doctest::Approx(1.0));
  const Schedule s2 = Schedule::guler(RhoSequence::constant(2.5));
  check_terms(s2.at(0), 0.0, 1.25, 0.0, 2.5);

  testing::Rng rng(3);
  std::vector<double> rhos;
  for (int i = 0; i < 600; ++i) rhos.push_back(std::exp(rng.uniform(-2, 2)));
  const Schedule g = Schedule::guler(RhoSequence::list(rhos));
  double S = 0.0;
  for (std::size_t k = 0; k <= 500; ++k) {
    const Terms t = g.at(k);
    CHECK(rel(t.c / (t.b + 1.0), rhos[k]) <= 1e-12);
    CHECK(rel(t.A, 0.5 * S * S) <= 1e-12);
    CHECK(t.c >= 0.5 * t.a);
    if (k >= 1) CHECK(rel(t.A, t.a * t.b) <= 1e-12);
    S += std::sqrt(rhos[k]);
  }
  CHECK_THROWS_AS(RhoSequence::list({1.0, -1.0}), Error);
  CHECK_THROWS_AS(RhoSequence::constant(0.0), Error);
  try {
    RhoSequence::list({1.0, 1.0, 1.0, -0.5});
    FAIL("negative rho accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("rhos[3] must be positive") != std::string::npos);
  }
}

TEST_CASE("certification scans") {
  const auto p2 = certify(Schedule::polynomial(2, 1.0), 1000, Theorem::T4);
  CHECK(p2.passed);
  const auto p2t6 = certify(Schedule::polynomial(2, 1.0), 1000, Theorem::T6);
  CHECK_FALSE(p2t6.passed);
  CHECK(has_failed(p2t6, "d < 1"));
  CHECK(p2t6.to_text().find("d < 1") != std::string::npos);

  const auto cr = certify(Schedule::constant_ratio(1.0, 4.0), 1000, Theorem::T6);
  CHECK(cr.passed);
  CHECK(estimate_d(Schedule::constant_ratio(1.0, 4.0), 1000) <= 0.5 + 1e-12);
  CHECK(certify(Schedule::guler(RhoSequence::constant(1.0)), 1000, Theorem::T4).passed);
  CHECK(certify(Schedule::exponential(2.0, 0.5), 500, Theorem::T5).passed);
  CHECK_FALSE(certify(Schedule::polynomial(2, 0.9), 1000, Theorem::T5).passed);
  CHECK(certify(Schedule::polynomial(2, 0.9), 1000, Theorem::T6).passed);

  const auto bad = certify(Schedule::polynomial(2, 1.0).with_c_scaled(0.25), 100, Theorem::T4);
  CHECK_FALSE(bad.passed);
  CHECK(has_failed(bad, "c_k >= a_k / 2"));
  CHECK(bad.to_json().find("\"result\": \"FAIL\"") != std::string::npos);
  CHECK_THROWS_AS(parse_theorem("T7"), Error);
}

TEST_CASE("alpha upper bound") {
  CHECK_FALSE(alpha_upper_bound(Schedule::polynomial(2, 1.0), 100).has_value());
  const auto ub = alpha_upper_bound(Schedule::constant_ratio(1.0, 4.0), 1000);
  REQUIRE(ub.has_value());
  // Over k < H the increment ratio (2k+r+1)/(r(k+r)) peaks at k = H-1, and
  // (c_{k+1} - c_k)/a_k = 1/(k+r) peaks at k = 1.
  const double r = 4.0, H = 1000.0;
  const double d = (2 * (H - 1) + r + 1) / (r * (H - 1 + r));
  CHECK(*ub == doctest::Approx((1.0 - d) / (1.0 + 1.0 / (1.0 + r))).epsilon(1e-12));
}

TEST_CASE("continuous schedules") {
  const auto p = ContinuousSchedule::polynomial(2, 1.0).at(3.0);
  CHECK(p.A == doctest::Approx(9));
  CHECK(p.a == doctest::Approx(6));
  CHECK(p.b == doctest::Approx(1.5));
  CHECK(p.c == doctest::Approx(6));
  const auto e = ContinuousSchedule::exponential(1.0, 1.0).at(0.0);
  CHECK(e.A == doctest::Approx(1));
  CHECK(e.a == doctest::Approx(1));
  CHECK(e.b == doctest::Approx(1));
  CHECK(e.c == doctest::Approx(1));
  const auto h = ContinuousSchedule::polynomial(2, 0.5).at(2.0);
  CHECK(h.a == doctest::Approx(8));
  CHECK(h.b == doctest::Approx(0.5));
  CHECK(h.a * h.b == doctest::Approx(h.A));
  CHECK(h.A == doctest::Approx(4));

  const double hstep = 1e-6;
  for (const auto& cs : {ContinuousSchedule::polynomial(1, 1.0), ContinuousSchedule::polynomial(3, 0.7),
                         ContinuousSchedule::exponential(0.5, 1.0), ContinuousSchedule::exponential(2.0, 0.6)}) {
    for (int i = 1; i <= 1000; ++i) {
      const double t = 0.01 * i;
      const double Adot = (cs.at(t + hstep).A - cs.at(t - hstep).A) / (2 * hstep);
      CHECK(Adot <= cs.at(t).a * (1 + 1e-6) + 1e-9);
      CHECK(cs.at(t).A_dot == doctest::Approx(Adot).epsilon(1e-5));
    }
  }
  CHECK_THROWS_AS(ContinuousSchedule::polynomial(0.5, 1.0), Error);
  CHECK_THROWS_AS(ContinuousSchedule::exponential(0.0, 1.0), Error);
}
