#include "sppa/diagnostics.hpp"

#include "sppa/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace sppa {

using ojson = nlohmann::ordered_json;

RateModel parse_rate_model(const std::string& s) {
  if (s == "power") return RateModel::power;
  if (s == "exponential") return RateModel::exponential;
  fail(ErrorCode::invalid_argument, "rate model must be power or exponential");
}

std::string to_string(RateModel m) { return m == RateModel::power ? "power" : "exponential"; }

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::na: return "N/A";
  }
  return "N/A";
}

std::string RateFit::to_json() const {
  ojson j;
  j["model"] = to_string(model);
  j[model == RateModel::power ? "p_hat" : "r_hat"] = estimate;
  j["std_error"] = std_error;
  j["residual_rms"] = residual;
  j["window"] = {window_begin, window_end};
  j["clamped"] = clamped;
  j["floor"] = floor;
  return j.dump();
}

RateFit estimate_order(std::span<const double> gaps, std::span<const double> ks, RateModel model,
                       std::optional<double> fstar) {
  if (gaps.size() != ks.size()) fail(ErrorCode::dimension_mismatch, "gaps and ks differ in length");
  if (gaps.size() < 20) fail(ErrorCode::invalid_argument, "rate fit needs at least 20 samples");
  RateFit fit;
  fit.model = model;
  fit.floor = fstar ? 1e2 * std::numeric_limits<double>::epsilon() * std::abs(*fstar) : 0.0;
  fit.window_begin = gaps.size() / 2;
  fit.window_end = gaps.size();

  std::vector<double> xs, ys;
  for (std::size_t i = fit.window_begin; i < fit.window_end; ++i) {
    double g = gaps[i];
    if (!std::isfinite(g) || g < 0.0) {
      fail(ErrorCode::invalid_argument, "gap[" + std::to_string(i) + "] is negative or not finite; supply f* more precisely");
    }
    if (g < fit.floor || g == 0.0) {
      if (fit.floor == 0.0) {
        fail(ErrorCode::invalid_argument, "gap[" + std::to_string(i) + "] is zero; supply f* more precisely");
      }
      g = fit.floor;
      ++fit.clamped;
    }
    const double k = ks[i];
    if (model == RateModel::power && !(k > 0.0)) {
      fail(ErrorCode::invalid_argument, "power fits need positive k");
    }
    xs.push_back(model == RateModel::power ? std::log(k) : k);
    ys.push_back(std::log(g));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::invalid_argument, "rate fit window has no spread in k");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (icpt + slope * xs[i]);
    sse += r * r;
  }
  fit.residual = std::sqrt(sse / n);
  const double se_slope = std::sqrt(sse / (n - 2.0) / sxx);
  if (model == RateModel::power) {
    fit.estimate = -slope;
    fit.std_error = se_slope;
  } else {
    fit.estimate = std::exp(slope);
    fit.std_error = fit.estimate * se_slope;
  }
  return fit;
}

bool CertificateReport::passed() const {
  return std::none_of(rows.begin(), rows.end(),
                      [](const CertificateRow& r) { return r.status == CheckStatus::fail; });
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

CertificateRow na_row(std::string name, std::string why) {
  return {std::move(name), CheckStatus::na, std::nullopt, std::nullopt, std::move(why)};
}

CertificateRow judged(std::string name, double slack, std::size_t k, std::string detail) {
  return {std::move(name), slack >= 0.0 ? CheckStatus::pass : CheckStatus::fail, slack, k,
          std::move(detail)};
}

constexpr const char* kEnergy = "Lyapunov energy nonincreasing";
constexpr const char* kRate = "rate bound A_k gap_k <= A_0 gap_0 + dist^2/2";
constexpr const char* kSum22 = "prefix sums of (a_k + A_k - A_{k+1}) <g, x - x*>";
constexpr const char* kSum23 = "prefix sums of (a_k c_k - a_k^2/2) ||g||^2";
constexpr const char* kPerturbed = "perturbed energy E + alpha G nonincreasing (k >= 1)";
constexpr const char* kTrend = "o(1/A_k) trend of A_k gap_k";
constexpr const char* kGapBound = "a-priori gap bound";

// Tail of A_k gap_k is judged on the last 20% of the run: no increase beyond
// noise, and the final value below 1% of the run's maximum.
CertificateRow trend_row(const SolverRun& run) {
  const std::size_t n = run.trace.size();
  if (n < 50) return na_row(kTrend, "run too short for a tail window (need at least 50 records)");
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& t = run.trace[k];
    v[k] = *t.A > 0.0 ? *t.A * t.f_gap : 0.0;
  }
  const double vmax = *std::max_element(v.begin(), v.end());
  const double noise = 1e-12 * std::max(1.0, vmax);
  const std::size_t from = n - n / 5;
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_k = from;
  for (std::size_t k = from; k + 1 < n; ++k) {
    const double slack = noise - (v[k + 1] - v[k]);
    if (slack < worst) {
      worst = slack;
      worst_k = k + 1;
    }
  }
  const double level_slack = 0.01 * vmax - v.back();
  const bool ok = worst >= 0.0 && level_slack >= 0.0;
  CertificateRow r;
  r.name = kTrend;
  r.status = ok ? CheckStatus::pass : CheckStatus::fail;
  r.worst_slack = std::min(worst, level_slack);
  r.worst_k = level_slack < worst ? n - 1 : worst_k;
  r.detail = "window k >= " + std::to_string(from) + ", noise " + sci(noise) + ", final " +
             sci(v.back()) + " vs 1% of max " + sci(0.01 * vmax);
  return r;
}

}  // namespace

CertificateReport certificate_suite(const SolverRun& run, const std::optional<Schedule>& s) {
  CertificateReport rep;
  rep.subject = run.algorithm + " " + run.parameters;
  const std::size_t n = run.trace.size();

  if (run.algorithm != "sppa") {
    if (run.relative || n == 0) {
      rep.rows.push_back(na_row(kGapBound, "no truth supplied"));
      return rep;
    }
    double worst = std::numeric_limits<double>::infinity();
    std::size_t worst_k = 0;
    bool any = false;
    for (const auto& t : run.trace) {
      if (!t.gap_bound) continue;
      any = true;
      const double slack = (*t.gap_bound - t.f_gap) / std::max(1.0, *t.gap_bound) + 1e-12;
      if (slack < worst) {
        worst = slack;
        worst_k = t.k;
      }
    }
    if (!any) {
      rep.rows.push_back(na_row(kGapBound, "distance to the solution set unknown"));
    } else {
      rep.rows.push_back(judged(kGapBound, worst, worst_k,
                                run.algorithm == "ppa" ? "dist^2 / (2 sum rho_i)"
                                                       : "4 [gap_0 + A/2 dist^2] / (A (sum sqrt(rho_i))^2)"));
    }
    return rep;
  }

  if (!s) fail(ErrorCode::invalid_argument, "SPPA certificates need the schedule");
  if (s->label() != run.parameters) {
    fail(ErrorCode::invalid_argument, "run used schedule " + run.parameters + ", not " + s->label());
  }
  if (run.relative || !run.E0 || n == 0) {
    for (const char* name : {kEnergy, kRate, kSum22, kSum23, kPerturbed, kTrend}) {
      rep.rows.push_back(na_row(name, "no minimizer supplied"));
    }
    return rep;
  }
  const double E0 = *run.E0;
  const double tol = 1e-10 * (1.0 + E0);

  {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t wk = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double slack = tol - (*run.trace[k + 1].E - *run.trace[k].E);
      if (slack < worst) {
        worst = slack;
        wk = k + 1;
      }
    }
    if (n < 2) worst = tol;
    rep.rows.push_back(judged(kEnergy, worst, wk, "E(k+1) <= E(k) + " + sci(tol)));
  }
  {
    const double rhs = *run.trace[0].bound21_rhs;
    const double scale = std::max(1.0, rhs);
    double worst = std::numeric_limits<double>::infinity();
    std::size_t wk = 0;
    for (const auto& t : run.trace) {
      const double lhs = *t.A > 0.0 ? *t.A * t.f_gap : 0.0;
      const double slack = (rhs - lhs) / scale + 1e-9;
      if (slack < worst) {
        worst = slack;
        wk = t.k;
      }
    }
    rep.rows.push_back(judged(kRate, worst, wk, "rhs " + sci(rhs) + ", relative tolerance 1e-9"));
  }
  for (int which = 0; which < 2; ++which) {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t wk = 0;
    for (const auto& t : run.trace) {
      const double v = which == 0 ? *t.sum22_prefix : *t.sum23_prefix;
      const double slack = E0 + 1e-9 - v;
      if (slack < worst) {
        worst = slack;
        wk = t.k;
      }
    }
    rep.rows.push_back(judged(which == 0 ? kSum22 : kSum23, worst, wk, "bounded by E(0) = " + sci(E0) + " + 1e-9"));
  }

  const std::size_t horizon = std::max<std::size_t>(n, 2);
  const bool t6 = certify(*s, horizon, Theorem::T6).passed;
  const bool t5 = t6 || certify(*s, horizon, Theorem::T5).passed;
  if (!run.alpha) {
    rep.rows.push_back(na_row(kPerturbed, "no admissible alpha (schedule has d = 1)"));
  } else if (!t6) {
    rep.rows.push_back(na_row(kPerturbed, "schedule does not certify the perturbed-energy hypotheses"));
  } else {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t wk = 1;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double slack = tol - (*run.trace[k + 1].E_alpha - *run.trace[k].E_alpha);
      if (slack < worst) {
        worst = slack;
        wk = k + 1;
      }
    }
    if (n < 3) worst = tol;
    rep.rows.push_back(judged(kPerturbed, worst, wk, "alpha = " + sci(*run.alpha) + ", tolerance " + sci(tol)));
  }
  if (!t5) {
    rep.rows.push_back(na_row(kTrend, "schedule does not certify an o(1/A_k) rate (needs d < 1)"));
  } else {
    rep.rows.push_back(trend_row(run));
    rep.notes.push_back(
        "the o(1/A_k) limit is checked through a proxy: A_k gap_k is nonincreasing on the last 20% "
        "of the run and ends below 1% of its maximum");
  }
  return rep;
}

CertificateReport certificate_suite(const DualRun& run, const Schedule& s, const Point& xstar,
                                    const Point& lambda_star) {
  const SaddleReport sr = saddle_certificates(run, xstar, lambda_star, s);
  CertificateReport rep;
  rep.subject = "salm " + run.schedule;
  for (const auto& c : sr.checks) {
    CertificateRow r;
    r.name = c.name;
    r.status = c.status == "PASS" ? CheckStatus::pass : c.status == "FAIL" ? CheckStatus::fail : CheckStatus::na;
    r.worst_slack = c.worst_slack;
    r.detail = c.detail;
    rep.rows.push_back(std::move(r));
  }
  rep.notes = sr.notes;
  return rep;
}

std::string CertificateReport::to_text() const {
  std::ostringstream os;
  os << "certificates: " << subject << "\n";
  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.name.size());
  for (const auto& r : rows) {
    os << "  " << r.name << std::string(w - r.name.size() + 2, ' ');
    const std::string st = to_string(r.status);
    os << st << std::string(6 - st.size(), ' ');
    os << (r.worst_slack ? "slack " + sci(*r.worst_slack) : std::string(15, ' '));
    if (r.worst_k) os << " at k=" << *r.worst_k;
    if (!r.detail.empty()) os << "  (" << r.detail << ")";
    os << "\n";
  }
  for (const auto& n : notes) os << "  note: " << n << "\n";
  os << "overall: " << (passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string CertificateReport::to_json() const {
  ojson j;
  j["subject"] = subject;
  j["passed"] = passed();
  ojson arr = ojson::array();
  for (const auto& r : rows) {
    ojson o;
    o["name"] = r.name;
    o["status"] = to_string(r.status);
    o["worst_slack"] = r.worst_slack ? ojson(*r.worst_slack) : ojson(nullptr);
    o["worst_k"] = r.worst_k ? ojson(*r.worst_k) : ojson(nullptr);
    o["detail"] = r.detail;
    arr.push_back(std::move(o));
  }
  j["checks"] = std::move(arr);
  j["notes"] = notes;
  return j.dump(2);
}

}  // namespace sppa
