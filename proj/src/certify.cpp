#include "sppa/error.hpp"
#include "sppa/schedule.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sppa {

Theorem parse_theorem(const std::string& s) {
  if (s == "T4" || s == "t4") return Theorem::T4;
  if (s == "T5" || s == "t5") return Theorem::T5;
  if (s == "T6" || s == "t6") return Theorem::T6;
  fail(ErrorCode::invalid_argument, "theorem must be one of T4, T5, T6 (got '" + s + "')");
}

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::T4: return "T4";
    case Theorem::T5: return "T5";
    case Theorem::T6: return "T6";
  }
  return "T4";
}

namespace {

// Margins for limit-type hypotheses judged on a finite tail.
constexpr double kRelTol = 1e-12;
constexpr double kStrictMargin = 1e-6;   // d < 1 means d_hat <= 1 - margin
constexpr double kGamma1Margin = 1e-3;   // gamma_1 > 0.5 means min c/a >= 0.5 + margin
constexpr double kDecaySlope = -0.1;     // log-log slope below this = ratio decays to zero
constexpr double kLimitSpread = 0.05;    // relative spread of k/b_k over the tail
constexpr double kSupGrowth = 1.01;      // tail sup may exceed head sup by 1%

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::size_t tail_begin(std::size_t horizon) {
  const std::size_t width = std::max<std::size_t>(1, horizon / 10);
  return std::max<std::size_t>(1, horizon - width);
}

double loglog_slope(const std::vector<double>& ks, const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ys[i] > 0.0) || !(ks[i] > 0.0)) continue;
    const double x = std::log(ks[i]);
    const double y = std::log(ys[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

struct Scan {
  std::vector<Terms> t;  // k = 0 .. horizon (inclusive, for A_{k+1})
};

Scan scan(const Schedule& s, std::size_t horizon) {
  Scan out;
  out.t.reserve(horizon + 1);
  for (std::size_t k = 0; k <= horizon; ++k) out.t.push_back(s.at(k));
  return out;
}

void record(ConditionCheck& c, std::size_t k, double slack) {
  if (slack < c.value) c.value = slack;
  if (slack < 0.0 && c.passed) {
    c.passed = false;
    c.first_violation = k;
  }
}

ConditionCheck check_product(const Scan& sc, std::size_t horizon) {
  ConditionCheck c{"A_k = a_k b_k", true, std::nullopt, 0.0, ""};
  for (std::size_t k = 1; k < horizon; ++k) {
    const Terms& t = sc.t[k];
    const double ab = t.a * t.b;
    const double scale = std::max(std::abs(t.A), std::abs(ab));
    record(c, k, kRelTol * scale - std::abs(t.A - ab));
  }
  c.detail = "relative tolerance 1e-12, k >= 1";
  return c;
}

ConditionCheck check_monotone(const Scan& sc, std::size_t horizon) {
  ConditionCheck c{"0 <= A_{k+1} - A_k", true, std::nullopt, 0.0, ""};
  for (std::size_t k = 0; k < horizon; ++k) {
    const double dA = sc.t[k + 1].A - sc.t[k].A;
    record(c, k, dA + kRelTol * sc.t[k + 1].A);
  }
  return c;
}

ConditionCheck check_increment(const Scan& sc, std::size_t horizon) {
  ConditionCheck c{"A_{k+1} - A_k <= a_k", true, std::nullopt, 0.0, ""};
  for (std::size_t k = 0; k < horizon; ++k) {
    const double dA = sc.t[k + 1].A - sc.t[k].A;
    record(c, k, sc.t[k].a * (1.0 + kRelTol) - dA);
  }
  return c;
}

ConditionCheck check_c_half_a(const Scan& sc, std::size_t horizon) {
  ConditionCheck c{"c_k >= a_k / 2", true, std::nullopt, 0.0, ""};
  for (std::size_t k = 0; k < horizon; ++k) {
    const Terms& t = sc.t[k];
    // Compare through a/c so overflowing families stay exact.
    record(c, k, (0.5 * t.a_over_c <= 1.0 + kRelTol) ? 0.0 : -(0.5 * t.a_over_c - 1.0));
  }
  return c;
}

double d_hat(const Scan& sc, std::size_t horizon) {
  double d = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const double a = sc.t[k].a;
    if (a > 0.0) d = std::max(d, (sc.t[k + 1].A - sc.t[k].A) / a);
  }
  return d;
}

ConditionCheck check_d_below_one(const Scan& sc, std::size_t horizon) {
  ConditionCheck c{"0 <= A_{k+1} - A_k <= d a_k with d < 1", true, std::nullopt, 0.0, ""};
  const double d = d_hat(sc, horizon);
  c.value = d;
  if (d > 1.0 - kStrictMargin) {
    c.passed = false;
    for (std::size_t k = 0; k < horizon; ++k) {
      const double a = sc.t[k].a;
      if (a > 0.0 && (sc.t[k + 1].A - sc.t[k].A) / a > 1.0 - kStrictMargin) {
        c.first_violation = k;
        break;
      }
    }
  }
  for (std::size_t k = 0; k < horizon && c.passed; ++k) {
    if (sc.t[k + 1].A - sc.t[k].A < -kRelTol * sc.t[k + 1].A) {
      c.passed = false;
      c.first_violation = k;
    }
  }
  c.detail = "estimated d = " + num(d) + " (requires d <= 1 - " + num(kStrictMargin) + ")";
  return c;
}

}  // namespace

double estimate_d(const Schedule& s, std::size_t horizon) {
  if (horizon < 1) fail(ErrorCode::invalid_argument, "horizon must be >= 1");
  return d_hat(scan(s, horizon), horizon);
}

std::optional<double> alpha_upper_bound(const Schedule& s, std::size_t horizon) {
  if (horizon < 2) fail(ErrorCode::invalid_argument, "horizon must be >= 2");
  const Scan sc = scan(s, horizon);
  const double d = d_hat(sc, horizon);
  if (d >= 1.0 - kStrictMargin) return std::nullopt;
  double sup = 0.0;
  for (std::size_t k = 1; k < horizon; ++k) {
    sup = std::max(sup, (sc.t[k + 1].c - sc.t[k].c) / sc.t[k].a);
  }
  return (1.0 - d) / (1.0 + sup);
}

CertificationReport certify(const Schedule& s, std::size_t horizon, Theorem theorem) {
  if (horizon < 2) fail(ErrorCode::invalid_argument, "horizon must be >= 2");
  CertificationReport rep;
  rep.schedule = s.label();
  rep.theorem = theorem;
  rep.horizon = horizon;
  const Scan sc = scan(s, horizon);
  const std::size_t tb = tail_begin(horizon);

  rep.checks.push_back(check_product(sc, horizon));
  if (theorem == Theorem::T4) {
    rep.checks.push_back(check_monotone(sc, horizon));
    rep.checks.push_back(check_increment(sc, horizon));
    rep.checks.push_back(check_c_half_a(sc, horizon));
    rep.notes.push_back("growth condition checked as c_k >= a_k/2; the variant c_k >= c_k/2 is vacuous");
  } else {
    rep.checks.push_back(check_d_below_one(sc, horizon));
  }

  if (theorem == Theorem::T5) {
    ConditionCheck c{"a_k >= gamma A_k with gamma > 0", true, std::nullopt, 0.0, ""};
    std::vector<double> ks, ratios;
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = tb; k < horizon; ++k) {
      const Terms& t = sc.t[k];
      // a/A computed from logs so exponential families never overflow here.
      const double r = t.A > 0.0 ? std::exp(std::log(t.a) - t.log_A) : std::numeric_limits<double>::infinity();
      ks.push_back(static_cast<double>(k));
      ratios.push_back(r);
      gmin = std::min(gmin, r);
    }
    const double slope = loglog_slope(ks, ratios);
    c.value = gmin;
    c.passed = gmin > 0.0 && slope >= kDecaySlope;
    if (!c.passed) c.first_violation = tb;
    c.detail = "tail min a_k/A_k = " + num(gmin) + ", log-log slope " + num(slope) +
               " (decay flagged below " + num(kDecaySlope) + ")";
    rep.checks.push_back(c);
  }

  if (theorem == Theorem::T6) {
    {
      ConditionCheck c{"sup (c_{k+1} - c_k)/a_k < inf", true, std::nullopt, 0.0, ""};
      double head = -std::numeric_limits<double>::infinity();
      double tail = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < horizon; ++k) {
        const double v = (sc.t[k + 1].c - sc.t[k].c) / sc.t[k].a;
        if (k < tb) head = std::max(head, v);
        else tail = std::max(tail, v);
      }
      const double sup = std::max(head, tail);
      c.value = sup;
      c.passed = std::isfinite(sup) && tail <= kSupGrowth * std::max(head, 0.0) + kRelTol;
      if (!c.passed) c.first_violation = tb;
      c.detail = "sup = " + num(sup) + ", tail sup " + num(tail) + " vs head sup " + num(head);
      rep.checks.push_back(c);
    }
    {
      ConditionCheck c{"beta = lim k/b_k in (1, inf)", true, std::nullopt, 0.0, ""};
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t k = tb; k < horizon; ++k) {
        const double v = static_cast<double>(k) / sc.t[k].b;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double last = static_cast<double>(horizon - 1) / sc.t[horizon - 1].b;
      const double spread = std::isfinite(hi) && hi > 0.0 ? (hi - lo) / hi : std::numeric_limits<double>::infinity();
      c.value = last;
      c.passed = std::isfinite(last) && spread <= kLimitSpread && last > 1.0 + kStrictMargin;
      if (!c.passed) c.first_violation = tb;
      c.detail = "tail k/b_k in [" + num(lo) + ", " + num(hi) + "], estimated beta = " + num(last);
      rep.checks.push_back(c);
    }
    {
      ConditionCheck c{"gamma1 a_k <= c_k <= gamma2 a_k, gamma1 > 0.5", true, std::nullopt, 0.0, ""};
      double g1 = std::numeric_limits<double>::infinity(), g2 = 0.0;
      for (std::size_t k = tb; k < horizon; ++k) {
        const double ratio = 1.0 / sc.t[k].a_over_c;
        g1 = std::min(g1, ratio);
        g2 = std::max(g2, ratio);
      }
      c.value = g1;
      c.passed = g1 >= 0.5 + kGamma1Margin && std::isfinite(g2);
      if (!c.passed) c.first_violation = tb;
      c.detail = "tail gamma1 = " + num(g1) + ", gamma2 = " + num(g2) + " (gamma1 must be >= " +
                 num(0.5 + kGamma1Margin) + ")";
      rep.checks.push_back(c);
    }
    rep.notes.push_back("beta must lie in (1, inf) for the discrete o-rate; the continuous analogue accepts (0, inf)");
  }

  if (theorem != Theorem::T4) {
    rep.notes.push_back("limit hypotheses judged on k in [" + std::to_string(tb) + ", " +
                        std::to_string(horizon) + "); estimates are empirical, not proofs");
  }
  for (const auto& c : rep.checks) rep.passed = rep.passed && c.passed;
  return rep;
}

std::string CertificationReport::to_text() const {
  std::ostringstream os;
  os << "certify " << to_string(theorem) << " for " << schedule << " over k < " << horizon << "\n";
  for (const auto& c : checks) {
    os << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name;
    if (c.first_violation) os << "  (first violation at k=" << *c.first_violation << ")";
    if (!c.detail.empty()) os << "  -- " << c.detail;
    os << "\n";
  }
  for (const auto& n : notes) os << "  note: " << n << "\n";
  os << "result: " << (passed ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string CertificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["schedule"] = schedule;
  j["theorem"] = to_string(theorem);
  j["horizon"] = horizon;
  j["result"] = passed ? "PASS" : "FAIL";
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["status"] = c.passed ? "PASS" : "FAIL";
    if (c.first_violation) cj["first_violation"] = *c.first_violation;
    else cj["first_violation"] = nullptr;
    cj["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json(nullptr);
    cj["detail"] = c.detail;
    j["checks"].push_back(cj);
  }
  j["notes"] = notes;
  return j.dump(2);
}

}  // namespace sppa
