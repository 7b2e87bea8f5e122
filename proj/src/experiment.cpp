#include "sppa/experiment.hpp"

#include "sppa/diagnostics.hpp"
#include "sppa/error.hpp"
#include "sppa/ode.hpp"
#include "sppa/plot.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace sppa {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::uint64_t top_seed(const json& cfg) {
  if (!cfg.contains("seed")) return 0;
  const double s = number_field(cfg, "seed", "config");
  if (s < 0 || s != std::floor(s)) fail(ErrorCode::parse, "seed: must be a non-negative integer");
  return static_cast<std::uint64_t>(s);
}

// The problem block, with the top-level seed filled in for random kinds.
json problem_block(const json& cfg) {
  if (!cfg.contains("problem")) fail(ErrorCode::parse, "problem: missing");
  json p = cfg.at("problem");
  if (p.is_object() && p.contains("kind") && p["kind"].is_string()) {
    const std::string kind = p["kind"].get<std::string>();
    if (kind.rfind("random_", 0) == 0 && !p.contains("seed")) p["seed"] = top_seed(cfg);
  }
  return p;
}

Point vector_or_fill(const json& cfg, const std::string& key, Index n, double fill) {
  if (!cfg.contains(key)) return Point::Constant(n, fill);
  const json& v = cfg.at(key);
  if (v.is_number()) return Point::Constant(n, number_field(cfg, key, "config"));
  Point p = point_from_json(v, key);
  if (p.size() != n) {
    fail(ErrorCode::parse, key + ": expected " + std::to_string(n) + " entries, got " + std::to_string(p.size()));
  }
  return p;
}

std::size_t iterations(const json& cfg) {
  const std::size_t K = count_field(cfg, "K", "config");
  if (K < 1) fail(ErrorCode::parse, "K: must be at least 1");
  return K;
}

std::string algorithm_of(const json& cfg) {
  if (!cfg.contains("algorithm") || !cfg["algorithm"].is_string()) fail(ErrorCode::parse, "algorithm: missing");
  return cfg["algorithm"].get<std::string>();
}

Index problem_dim(const Objective& f, const json& cfg) {
  if (f.dim() > 0) return f.dim();
  if (cfg.contains("x0") && cfg["x0"].is_array()) return static_cast<Index>(cfg["x0"].size());
  fail(ErrorCode::parse, "x0: required as an array when the objective has no fixed dimension");
}

void write_file(const fs::path& p, const std::string& content, ExperimentResult& res) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + p.string());
  out << content;
  if (!out) fail(ErrorCode::io, "cannot write " + p.string());
  res.files.push_back(p.string());
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + p.string() + ": " + ec.message());
}

ojson parsed(const std::string& s) { return ojson::parse(s); }

std::optional<Truth> truth_from_config(const json& cfg, const Objective& f, const Metric& metric,
                                       const Point& x0) {
  if (!cfg.contains("truth")) return derive_truth(f, metric, x0);
  const json& t = cfg.at("truth");
  Truth truth;
  if (t.contains("xstar")) truth.minimizers.push_back(point_from_json(t["xstar"], "truth.xstar"));
  if (t.contains("minimizers")) {
    const json& ms = t["minimizers"];
    if (!ms.is_array() || ms.empty()) fail(ErrorCode::parse, "truth.minimizers: expected a non-empty array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      truth.minimizers.push_back(point_from_json(ms[i], "truth.minimizers[" + std::to_string(i) + "]"));
    }
  }
  truth.fstar = optional_number(t, "fstar", "truth");
  for (std::size_t i = 0; i < truth.minimizers.size(); ++i) {
    if (truth.minimizers[i].size() != x0.size()) {
      fail(ErrorCode::parse, "truth: minimizer " + std::to_string(i) + " has the wrong dimension");
    }
  }
  if (truth.minimizers.empty() && !truth.fstar) return std::nullopt;
  return truth;
}

// ---------------------------------------------------------------------------
// Primal runs

struct PrimalOutcome {
  SolverRun run;
  std::optional<Schedule> schedule;
  CertificateReport report;
};

PrimalOutcome execute_primal(const std::string& algo, const json& acfg, const json& shared,
                             const Objective& f, const Metric& metric, const Point& x0,
                             std::size_t K, const std::optional<Truth>& truth) {
  auto pick = [&](const std::string& key) -> const json& {
    if (acfg.contains(key)) return acfg.at(key);
    if (shared.contains(key)) return shared.at(key);
    fail(ErrorCode::parse, key + ": missing for algorithm " + algo);
  };
  RunOptions opts;
  opts.truth = truth;
  PrimalOutcome out;
  if (algo == "ppa") {
    out.run = run_ppa(f, metric, rhos_from_json(pick("rhos"), "rhos"), x0, K, opts);
  } else if (algo == "appa") {
    const double A = acfg.contains("A") ? number_field(acfg, "A", algo)
                                        : (shared.contains("A") ? number_field(shared, "A", "config") : 1.0);
    out.run = run_appa(f, rhos_from_json(pick("rhos"), "rhos"), x0, A, K, metric, opts);
  } else if (algo == "sppa") {
    out.schedule = schedule_from_json(pick("schedule"), "schedule");
    if (acfg.contains("alpha")) opts.alpha = number_field(acfg, "alpha", algo);
    else if (shared.contains("alpha")) opts.alpha = number_field(shared, "alpha", "config");
    out.run = run_sppa(f, metric, *out.schedule, x0, K, opts);
  } else {
    fail(ErrorCode::parse, "algorithm: unknown primal algorithm \"" + algo + "\"");
  }
  out.report = certificate_suite(out.run, out.schedule);
  return out;
}

void write_trace(const SolverRun& run, const fs::path& p, ExperimentResult& res) {
  std::ostringstream os;
  CsvWriter w(os, {"k", "f_gap", "E", "E_alpha", "sum22_prefix", "sum23_prefix", "tilde_grad_norm_sq",
                   "bound21_rhs", "f_value", "A", "scaled_gap", "gap_bound", "step_norm_sq", "alpha"});
  for (const auto& t : run.trace) {
    std::optional<double> scaled;
    if (t.A && !run.relative) scaled = *t.A > 0.0 ? *t.A * t.f_gap : 0.0;
    w.cell(t.k).cell(t.f_gap).cell(t.E).cell(t.E_alpha).cell(t.sum22_prefix).cell(t.sum23_prefix)
        .cell(t.tilde_grad_norm_sq).cell(t.bound21_rhs).cell(t.f_value).cell(t.A).cell(scaled)
        .cell(t.gap_bound).cell(t.step_norm_sq).cell(t.alpha);
    w.end_row();
  }
  write_file(p, os.str(), res);
}

std::optional<RateFit> try_fit(const SolverRun& run, RateModel model, std::optional<double> fstar,
                               std::string& error) {
  std::vector<double> gaps, ks;
  for (const auto& t : run.trace) {
    if (t.k == 0) continue;
    gaps.push_back(t.f_gap);
    ks.push_back(static_cast<double>(t.k));
  }
  try {
    return estimate_order(gaps, ks, model, fstar);
  } catch (const Error& e) {
    error = e.what();
    return std::nullopt;
  }
}

ojson primal_summary(const PrimalOutcome& o, const json& cfg, const std::string& problem_kind,
                     RateModel model) {
  const SolverRun& run = o.run;
  ojson s;
  s["algorithm"] = run.algorithm;
  s["parameters"] = run.parameters;
  s["problem"] = problem_kind;
  s["dimension"] = run.iterates.front().x.size();
  s["K"] = run.trace.size() - 1;
  s["seed"] = top_seed(cfg);
  s["relative"] = run.relative;
  if (run.dist_sq) s["dist_sq"] = *run.dist_sq;
  if (run.E0) s["E0"] = *run.E0;
  if (run.alpha) s["alpha"] = *run.alpha;
  const auto& last = run.trace.back();
  ojson fin;
  fin["f_value"] = last.f_value;
  fin["f_gap"] = last.f_gap;
  if (last.E) fin["E"] = *last.E;
  if (last.gap_bound) fin["gap_bound"] = *last.gap_bound;
  s["final"] = fin;
  std::string err;
  std::optional<double> fstar;
  if (!run.relative) fstar = last.f_value - last.f_gap;
  if (auto fit = try_fit(run, model, fstar, err)) {
    s["rate_fit"] = parsed(fit->to_json());
  } else {
    s["rate_fit"] = {{"error", err}};
  }
  s["certificates"] = parsed(o.report.to_json());
  return s;
}

void primal_plots(const SolverRun& run, const fs::path& dir, ExperimentResult& res) {
  std::vector<double> k, gap, bound_k, bound, E, scaled, ak;
  for (const auto& t : run.trace) {
    const double kk = static_cast<double>(t.k);
    if (t.k > 0) {
      k.push_back(kk);
      gap.push_back(t.f_gap);
      if (t.gap_bound) {
        bound_k.push_back(kk);
        bound.push_back(*t.gap_bound);
      }
    }
    if (t.E) E.push_back(*t.E);
    if (t.A && !run.relative) {
      ak.push_back(kk);
      scaled.push_back(*t.A > 0.0 ? *t.A * t.f_gap : 0.0);
    }
  }
  std::vector<PlotSeries> gs{{"f(x_k) - f*", k, gap, "", false}};
  if (!bound.empty()) gs.push_back({"a-priori bound", bound_k, bound, "", true});
  write_file(dir / "gap.svg",
             svg_line_plot(gs, {run.algorithm + " objective gap", "k", run.relative ? "f - best f" : "f - f*", true, true, false}),
             res);
  if (!E.empty()) {
    std::vector<double> kE;
    for (std::size_t i = 0; i < E.size(); ++i) kE.push_back(static_cast<double>(i));
    write_file(dir / "lyapunov.svg",
               svg_line_plot({{"E(k)", kE, E, "", false}}, {run.algorithm + " Lyapunov energy", "k", "E(k)", false, false, false}),
               res);
  }
  if (!scaled.empty()) {
    write_file(dir / "scaled_gap.svg",
               svg_line_plot({{"A_k gap", ak, scaled, "", false}}, {run.algorithm + " scaled gap", "k", "A_k (f - f*)", false, false, false}),
               res);
  }
}

RateModel default_model(const json& cfg, const std::optional<Schedule>& s) {
  if (cfg.contains("rate_model")) {
    if (!cfg["rate_model"].is_string()) fail(ErrorCode::parse, "rate_model: expected a string");
    return parse_rate_model(cfg["rate_model"].get<std::string>());
  }
  if (s && s->meta().family == Family::exponential) return RateModel::exponential;
  return RateModel::power;
}

ExperimentResult primal_experiment(const json& cfg, const fs::path& out, const std::string& algo) {
  ExperimentResult res;
  res.output_dir = out;
  const json pb = problem_block(cfg);
  const Objective f = objective_from_json(pb, "problem");
  const Index n = problem_dim(f, cfg);
  const Metric metric = metric_from_json(cfg.value("metric", json()), "metric");
  const Point x0 = vector_or_fill(cfg, "x0", n, 1.0);
  const std::size_t K = iterations(cfg);
  const auto truth = truth_from_config(cfg, f, metric, x0);

  const PrimalOutcome o = execute_primal(algo, json::object(), cfg, f, metric, x0, K, truth);
  make_dir(out);
  write_trace(o.run, out / "trace.csv", res);
  primal_plots(o.run, out, res);
  const std::string kind = pb.value("kind", "");
  const ojson summary = primal_summary(o, cfg, kind, default_model(cfg, o.schedule));
  write_file(out / "summary.json", summary.dump(2) + "\n", res);
  write_file(out / "certificates.txt", o.report.to_text(), res);
  res.report = o.report.to_text();
  res.certificates_passed = o.report.passed();
  return res;
}

// ---------------------------------------------------------------------------
// SALM

ExperimentResult salm_experiment(const json& cfg, const fs::path& out) {
  ExperimentResult res;
  res.output_dir = out;
  const LinearEqualityProblem prob = eq_qp_from_json(problem_block(cfg), "problem");
  const Index m = prob.A.rows();
  const Metric metric = metric_from_json(cfg.value("metric", json()), "metric");
  if (!cfg.contains("schedule")) fail(ErrorCode::parse, "schedule: missing");
  const Schedule s = schedule_from_json(cfg["schedule"], "schedule");
  const Point lambda0 = vector_or_fill(cfg, "lambda0", m, 0.0);
  const std::size_t K = iterations(cfg);

  const PerturbedProblem oracle = linear_equality_oracle(prob, metric);
  const DualRun run = run_salm(oracle, metric, s, lambda0, K);
  const SaddlePoint sp = kkt_saddle_point(prob);
  const SaddleReport sr = saddle_certificates(run, sp.x, sp.lambda, s);
  const CertificateReport rep = certificate_suite(run, s, sp.x, sp.lambda);

  make_dir(out);
  std::ostringstream os;
  CsvWriter w(os, {"k", "dual_gap", "u_norm_sq_L", "sum_u_prefix", "corollary_rhs", "lemma2_residual", "A",
                   "scaled_dual_gap", "lambda_error"});
  std::vector<double> ks, gaps, scaled, uk, us;
  for (std::size_t k = 0; k < run.trace.size(); ++k) {
    const auto& t = run.trace[k];
    const auto& g = sr.dual_gap[k];
    std::optional<double> sc;
    if (g) sc = *t.A > 0.0 ? *t.A * *g : 0.0;
    const double lerr = (run.iterates[k].lambda - sp.lambda).norm();
    w.cell(k).cell(g).cell(t.u_norm_sq_L).cell(t.sum_u_prefix).cell(sr.corollary_rhs).cell(t.lemma2_residual)
        .cell(t.A).cell(sc).cell(lerr);
    w.end_row();
    if (k > 0 && g) {
      ks.push_back(static_cast<double>(k));
      gaps.push_back(*g);
      if (t.u_norm_sq_L) {
        uk.push_back(static_cast<double>(k));
        us.push_back(*t.u_norm_sq_L);
      }
    }
    if (sc) scaled.push_back(*sc);
  }
  write_file(out / "trace.csv", os.str(), res);
  write_file(out / "dual_gap.svg",
             svg_line_plot({{"d(lambda*) - d(lambda_k)", ks, gaps, "", false}}, {"SALM dual gap", "k", "dual gap", true, true, false}),
             res);
  write_file(out / "residual.svg",
             svg_line_plot({{"||u_k||^2_L", uk, us, "", false}}, {"SALM primal residual", "k", "||Ax - b||^2_L", true, true, false}),
             res);
  if (!scaled.empty()) {
    std::vector<double> k0;
    for (std::size_t i = 0; i < scaled.size(); ++i) k0.push_back(static_cast<double>(i));
    write_file(out / "scaled_gap.svg",
               svg_line_plot({{"A_k dual gap", k0, scaled, "", false}}, {"SALM scaled dual gap", "k", "A_k gap", false, false, false}),
               res);
  }

  ojson sum;
  sum["algorithm"] = "salm";
  sum["schedule"] = s.label();
  sum["problem"] = problem_block(cfg).value("kind", "");
  sum["primal_dimension"] = prob.A.cols();
  sum["dual_dimension"] = m;
  sum["K"] = K;
  sum["seed"] = top_seed(cfg);
  sum["kkt_residual"] = sp.residual;
  sum["corollary_rhs"] = sr.corollary_rhs;
  sum["final"] = {{"lambda_error", (run.iterates.back().lambda - sp.lambda).norm()},
                  {"dual_gap", sr.dual_gap.back() ? ojson(*sr.dual_gap.back()) : ojson(nullptr)}};
  sum["certificates"] = parsed(rep.to_json());
  write_file(out / "summary.json", sum.dump(2) + "\n", res);
  write_file(out / "certificates.txt", rep.to_text(), res);
  res.report = rep.to_text();
  res.certificates_passed = rep.passed();
  return res;
}

// ---------------------------------------------------------------------------
// ODE lab

CertificateRow bound_row(std::string name, double slack, std::string detail) {
  return {std::move(name), slack >= 0.0 ? CheckStatus::pass : CheckStatus::fail, slack, std::nullopt,
          std::move(detail)};
}

ExperimentResult ode_experiment(const json& cfg, const fs::path& out) {
  ExperimentResult res;
  res.output_dir = out;
  const json pb = problem_block(cfg);
  const Objective f = objective_from_json(pb, "problem");
  const Index n = problem_dim(f, cfg);
  const Metric metric = metric_from_json(cfg.value("metric", json()), "metric");
  if (!cfg.contains("schedule")) fail(ErrorCode::parse, "schedule: missing");
  const ContinuousSchedule cs = continuous_schedule_from_json(cfg["schedule"], "schedule");
  const Point x0 = vector_or_fill(cfg, "x0", n, 1.0);
  const double s = optional_number(cfg, "s", "config").value_or(1e-3);
  const double T = number_field(cfg, "T", "config");
  const auto truth = truth_from_config(cfg, f, metric, x0);
  if (!truth || truth->minimizers.empty()) fail(ErrorCode::parse, "truth: the ODE lab needs a known minimizer");
  const Point& xstar = truth->minimizers.front();

  const OdeTrajectory traj = integrate_main_ode(f, metric, cs, x0, s, T);
  const EnergySeries E = lyapunov_continuous(traj, f, metric, cs, xstar);
  const std::vector<double> G = auxiliary_values(traj, f, metric, cs, xstar);
  std::optional<AuxiliaryReport> aux;
  const auto alpha = optional_number(cfg, "alpha", "config");
  const double t_from = optional_number(cfg, "t_from", "config").value_or(1.0);
  if (alpha) aux = auxiliary_G(traj, f, metric, cs, xstar, *alpha, t_from);
  const IntegralReport ints = integral_bounds(traj, f, metric, cs, xstar, aux ? t_from : 0.0);

  CertificateReport rep;
  rep.subject = "ode " + cs.label() + ", s=" + format_number(s) + ", T=" + format_number(T);
  rep.rows.push_back({"E(t) nonincreasing within 10 s per step",
                      E.nonincreasing ? CheckStatus::pass : CheckStatus::fail,
                      E.tolerance_per_step - E.max_increase, E.worst_step,
                      "max increase " + format_number(E.max_increase)});
  const auto& last = traj.states.back();
  const ContinuousTerms cT = cs.at(last.t);
  const double scaled_T = cT.A * f.gap(last.X, xstar).value();
  const double E0 = E.values.front();
  rep.rows.push_back(bound_row("A_T gap(T) <= E(0) (1 + 50 s)", E0 * (1.0 + 50.0 * s) - scaled_T,
                               "A_T gap(T) = " + format_number(scaled_T)));
  rep.rows.push_back(bound_row("integral of a c ||grad f||^2 <= E(0) + 10 s T",
                               E0 + ints.tolerance - ints.grad_norm, "integral " + format_number(ints.grad_norm)));
  rep.rows.push_back(bound_row("integral of (a - A_dot) <grad f, X - x*> <= E(0) + 10 s T",
                               E0 + ints.tolerance - ints.value, "integral " + format_number(ints.value)));
  if (aux) {
    rep.rows.push_back({"E_alpha nonincreasing for t >= t_from",
                        aux->E_alpha.nonincreasing ? CheckStatus::pass : CheckStatus::fail,
                        aux->E_alpha.tolerance_per_step - aux->E_alpha.max_increase, aux->E_alpha.worst_step,
                        "alpha " + format_number(*alpha) + " < " + format_number(aux->alpha_bound)});
    rep.rows.push_back({"E_alpha nonnegative", aux->nonnegative ? CheckStatus::pass : CheckStatus::fail,
                        std::nullopt, std::nullopt, ""});
    std::size_t i0 = 0;
    while (i0 + 1 < traj.states.size() && traj.states[i0].t + 1e-12 < t_from) ++i0;
    const double budget = aux->E_alpha.values[i0] + ints.tolerance;
    rep.rows.push_back(bound_row("alpha * integral of b ||X'||^2 <= E_alpha(t_from) + 10 s T",
                                 budget - *alpha * ints.velocity,
                                 "integral " + format_number(ints.velocity)));
    rep.notes.push_back("sup c_dot / a is taken over t >= " + format_number(t_from));
  } else {
    rep.rows.push_back({"E_alpha nonincreasing for t >= t_from", CheckStatus::na, std::nullopt, std::nullopt,
                        "no alpha supplied"});
  }

  make_dir(out);
  std::vector<std::string> header{"t"};
  for (Index i = 0; i < n; ++i) header.push_back("X" + std::to_string(i));
  for (Index i = 0; i < n; ++i) header.push_back("Z" + std::to_string(i));
  header.insert(header.end(), {"E", "G", "E_alpha"});
  std::ostringstream os;
  CsvWriter w(os, header);
  std::vector<double> ts;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& st = traj.states[k];
    ts.push_back(st.t);
    w.cell(st.t);
    for (Index i = 0; i < n; ++i) w.cell(st.X[i]);
    for (Index i = 0; i < n; ++i) w.cell(st.Z[i]);
    w.cell(E.values[k]).cell(G[k]);
    w.cell(aux ? std::optional<double>(aux->E_alpha.values[k]) : std::nullopt);
    w.end_row();
  }
  write_file(out / "trajectory.csv", os.str(), res);
  std::vector<PlotSeries> es{{"E(t)", ts, E.values, "", false}};
  if (aux) es.push_back({"E_alpha(t)", ts, aux->E_alpha.values, "", true});
  write_file(out / "energy.svg", svg_line_plot(es, {"ODE energies", "t", "energy", false, false, false}), res);

  ojson sum;
  sum["algorithm"] = "ode";
  sum["schedule"] = cs.label();
  sum["problem"] = pb.value("kind", "");
  sum["s"] = s;
  sum["T"] = T;
  sum["steps"] = traj.states.size() - 1;
  sum["E0"] = E0;
  sum["scaled_gap_T"] = scaled_T;
  sum["integrals"] = {{"grad_norm", ints.grad_norm}, {"value", ints.value}, {"velocity", ints.velocity},
                      {"velocity_from", ints.velocity_from}, {"tolerance", ints.tolerance}};
  if (aux) sum["alpha_bound"] = aux->alpha_bound;
  sum["certificates"] = parsed(rep.to_json());
  write_file(out / "summary.json", sum.dump(2) + "\n", res);
  write_file(out / "certificates.txt", rep.to_text(), res);
  res.report = rep.to_text();
  res.certificates_passed = rep.passed();
  return res;
}

// ---------------------------------------------------------------------------
// Hamiltonian demo

ExperimentResult figure1_experiment(const json& cfg, const fs::path& out) {
  ExperimentResult res;
  res.output_dir = out;
  const double s = optional_number(cfg, "s", "config").value_or(0.1);
  const std::size_t steps = cfg.contains("steps") ? count_field(cfg, "steps", "config") : 1000;
  make_dir(out);

  CertificateReport rep;
  rep.subject = "hamiltonian demo, s=" + format_number(s) + ", " + std::to_string(steps) + " steps";
  std::vector<PlotSeries> phase;
  ojson sum;
  sum["algorithm"] = "figure1";
  sum["s"] = s;
  sum["steps"] = steps;
  const double sym_budget = 1.2 * s;
  std::size_t ci = 0;
  for (EulerScheme sc : {EulerScheme::explicit_euler, EulerScheme::symplectic, EulerScheme::implicit_euler}) {
    const auto traj = hamiltonian_demo(s, steps, sc);
    const std::string name = to_string(sc);
    std::ostringstream os;
    CsvWriter w(os, {"k", "t", "p", "q", "energy"});
    PlotSeries ps{name, {}, {}, palette(ci++), false};
    double worst = 0.0;
    const double growth = std::log1p(s * s);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto [p, q] = traj[k];
      const double e = p * p + q * q;
      w.cell(k).cell(static_cast<double>(k) * s).cell(p).cell(q).cell(e);
      w.end_row();
      ps.x.push_back(q);
      ps.y.push_back(p);
      if (sc == EulerScheme::symplectic) {
        worst = std::max(worst, std::abs(e - 1.0));
      } else {
        const double sign = sc == EulerScheme::explicit_euler ? 1.0 : -1.0;
        const double expect = std::exp(sign * static_cast<double>(k) * growth);
        worst = std::max(worst, std::abs(e - expect) / expect);
      }
    }
    write_file(out / (name + ".csv"), os.str(), res);
    phase.push_back(std::move(ps));
    if (sc == EulerScheme::symplectic) {
      rep.rows.push_back(bound_row("symplectic energy stays within 1.2 s of 1", sym_budget - worst,
                                   "max |p^2 + q^2 - 1| = " + format_number(worst)));
    } else {
      rep.rows.push_back(bound_row(name + " energy follows (1+s^2)^" + (sc == EulerScheme::explicit_euler ? "k" : "-k"),
                                   1e-9 - worst, "max relative deviation " + format_number(worst)));
    }
    sum[name] = {{"max_deviation", worst}};
  }
  PlotSeries circle{"exact (unit circle)", {}, {}, "#000000", true};
  for (int i = 0; i <= 360; ++i) {
    const double t = 2.0 * std::numbers::pi * i / 360.0;
    circle.x.push_back(std::cos(t));
    circle.y.push_back(std::sin(t));
  }
  phase.push_back(std::move(circle));
  write_file(out / "figure1.svg",
             svg_line_plot(phase, {"p' = q, q' = -p from (p, q) = (0, 1)", "q", "p", false, false, true}), res);
  sum["certificates"] = parsed(rep.to_json());
  write_file(out / "summary.json", sum.dump(2) + "\n", res);
  res.report = rep.to_text();
  res.certificates_passed = rep.passed();
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------

fs::path resolve_output_dir(const json& config, const std::optional<std::string>& override_dir) {
  if (override_dir && !override_dir->empty()) return *override_dir;
  if (config.is_object() && config.contains("output_dir")) {
    if (!config["output_dir"].is_string()) fail(ErrorCode::parse, "output_dir: expected a string");
    return config["output_dir"].get<std::string>();
  }
  if (const char* env = std::getenv("SPPA_OUT_DIR"); env && *env) return env;
  return "out";
}

std::optional<Truth> derive_truth(const Objective& f, const Metric& metric, const Point& x0) {
  Truth t;
  switch (f.kind()) {
    case Objective::Kind::quadratic: {
      const auto& q = *f.quadratic_part();
      Eigen::SelfAdjointEigenSolver<Matrix> es(q.Q);
      const double top = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      if (es.eigenvalues().minCoeff() <= 1e-12 * top) return std::nullopt;
      t.minimizers.push_back(q.Q.llt().solve(-q.b));
      return t;
    }
    case Objective::Kind::l1:
      t.minimizers.push_back(Point::Zero(x0.size()));
      t.fstar = 0.0;
      return t;
    case Objective::Kind::sum: {
      const auto& q = *f.quadratic_part();
      if (!q.diagonal_Q) return std::nullopt;
      const double lam = f.l1_part()->weight;
      Point x(q.Q.rows());
      for (Index i = 0; i < x.size(); ++i) {
        const double qi = q.Q(i, i);
        const double v = -q.b[i];
        const double shrunk = std::copysign(std::max(std::abs(v) - lam, 0.0), v);
        if (qi > 0.0) x[i] = shrunk / qi;
        else if (shrunk == 0.0) x[i] = 0.0;
        else return std::nullopt;
      }
      t.minimizers.push_back(x);
      return t;
    }
    case Objective::Kind::affine_indicator:
      // The metric projection of x0 is the closest minimizer in the L-norm.
      t.minimizers.push_back(f.prox(metric, x0, 1.0).minimizer);
      t.fstar = 0.0;
      return t;
    case Objective::Kind::custom:
      return std::nullopt;
  }
  return std::nullopt;
}

LinearEqualityProblem eq_qp_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) fail(ErrorCode::parse, path + ".kind: missing");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "eq_qp") {
    const Matrix Q = matrix_from_json(j.at("Q"), path + ".Q");
    const Point q = j.contains("q") ? point_from_json(j["q"], path + ".q") : Point::Zero(Q.rows());
    if (!j.contains("A")) fail(ErrorCode::parse, path + ".A: missing");
    if (!j.contains("b")) fail(ErrorCode::parse, path + ".b: missing");
    const Matrix A = matrix_from_json(j["A"], path + ".A");
    const Point b = point_from_json(j["b"], path + ".b");
    try {
      return LinearEqualityProblem(Objective::quadratic(Q, q), A, b);
    } catch (const Error& e) {
      fail(ErrorCode::invalid_argument, path + ": " + e.what());
    }
  }
  if (kind == "random_eq_qp") {
    const std::size_t n = count_field(j, "n", path);
    const std::size_t m = count_field(j, "m", path);
    if (n < 1 || m < 1 || m > n) fail(ErrorCode::parse, path + ": need 1 <= m <= n");
    const auto seed = static_cast<std::uint64_t>(number_field(j, "seed", path));
    const double delta = optional_number(j, "delta", path).value_or(1e-3);
    const auto N = static_cast<Index>(n);
    const auto M = static_cast<Index>(m);
    const Matrix Q = random_spd(N, 2 * N, delta, seed);
    std::mt19937_64 gen(seed + 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    Point q(N);
    for (Index i = 0; i < N; ++i) q[i] = normal(gen);
    Matrix A(M, N);
    for (Index r = 0; r < M; ++r)
      for (Index c = 0; c < N; ++c) A(r, c) = normal(gen);
    Point xf(N);
    for (Index i = 0; i < N; ++i) xf[i] = normal(gen);
    return LinearEqualityProblem(Objective::quadratic(Q, q), A, A * xf);
  }
  fail(ErrorCode::parse, path + ".kind: expected eq_qp or random_eq_qp for salm, got \"" + kind + "\"");
}

ExperimentResult run_experiment(const json& config, const fs::path& out) {
  if (!config.is_object()) fail(ErrorCode::parse, "config: expected a JSON object");
  const std::string algo = algorithm_of(config);
  if (algo == "ppa" || algo == "appa" || algo == "sppa") return primal_experiment(config, out, algo);
  if (algo == "salm") return salm_experiment(config, out);
  if (algo == "ode") return ode_experiment(config, out);
  if (algo == "figure1") return figure1_experiment(config, out);
  fail(ErrorCode::parse, "algorithm: unknown value \"" + algo + "\" (ppa, appa, sppa, salm, ode, figure1)");
}

ExperimentResult run_comparison(const json& config, const fs::path& out) {
  if (!config.is_object()) fail(ErrorCode::parse, "config: expected a JSON object");
  if (!config.contains("algorithms") || !config["algorithms"].is_array()) {
    fail(ErrorCode::parse, "algorithms: expected an array");
  }
  const json& algos = config["algorithms"];
  if (algos.empty()) fail(ErrorCode::parse, "algorithms: must not be empty");

  ExperimentResult res;
  res.output_dir = out;
  const json pb = problem_block(config);
  const Objective f = objective_from_json(pb, "problem");
  const Index n = problem_dim(f, config);
  const Metric metric = metric_from_json(config.value("metric", json()), "metric");
  const Point x0 = vector_or_fill(config, "x0", n, 1.0);
  const std::size_t K = iterations(config);
  const auto truth = truth_from_config(config, f, metric, x0);

  std::vector<std::string> labels;
  std::vector<PrimalOutcome> runs;
  for (std::size_t i = 0; i < algos.size(); ++i) {
    const json& a = algos[i];
    const std::string path = "algorithms[" + std::to_string(i) + "]";
    if (!a.is_object() || !a.contains("algorithm") || !a["algorithm"].is_string()) {
      fail(ErrorCode::parse, path + ".algorithm: missing");
    }
    const std::string algo = a["algorithm"].get<std::string>();
    if (algo != "ppa" && algo != "appa" && algo != "sppa") {
      fail(ErrorCode::parse, path + ".algorithm: compare supports ppa, appa and sppa");
    }
    std::string label = a.contains("label") && a["label"].is_string() ? a["label"].get<std::string>() : algo;
    std::size_t dup = 1;
    for (const auto& l : labels) dup += (l == label || l.rfind(label + "_", 0) == 0) ? 1 : 0;
    if (dup > 1) label += "_" + std::to_string(dup);
    labels.push_back(label);
    runs.push_back(execute_primal(algo, a, config, f, metric, x0, K, truth));
  }

  make_dir(out);
  std::vector<std::string> header{"k"};
  for (const auto& l : labels) {
    header.push_back("gap_" + l);
    header.push_back("bound_" + l);
  }
  std::ostringstream os;
  CsvWriter w(os, header);
  for (std::size_t k = 0; k <= K; ++k) {
    w.cell(k);
    for (const auto& r : runs) w.cell(r.run.trace[k].f_gap).cell(r.run.trace[k].gap_bound);
    w.end_row();
  }
  write_file(out / "compare.csv", os.str(), res);

  std::vector<PlotSeries> series;
  ojson sum;
  sum["problem"] = pb.value("kind", "");
  sum["K"] = K;
  sum["seed"] = top_seed(config);
  ojson per = ojson::object();
  bool all = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SolverRun& r = runs[i].run;
    PlotSeries g{labels[i] + " gap", {}, {}, palette(i), false};
    PlotSeries b{labels[i] + " bound", {}, {}, palette(i), true};
    for (const auto& t : r.trace) {
      if (t.k == 0) continue;
      g.x.push_back(static_cast<double>(t.k));
      g.y.push_back(t.f_gap);
      if (t.gap_bound) {
        b.x.push_back(static_cast<double>(t.k));
        b.y.push_back(*t.gap_bound);
      }
    }
    series.push_back(std::move(g));
    if (!b.x.empty()) series.push_back(std::move(b));

    const fs::path sub = out / labels[i];
    make_dir(sub);
    write_trace(r, sub / "trace.csv", res);
    ojson one = primal_summary(runs[i], config, pb.value("kind", ""), default_model(config, runs[i].schedule));
    write_file(sub / "summary.json", one.dump(2) + "\n", res);
    ojson brief;
    brief["parameters"] = r.parameters;
    brief["final_gap"] = r.trace.back().f_gap;
    brief["final_bound"] = r.trace.back().gap_bound ? ojson(*r.trace.back().gap_bound) : ojson(nullptr);
    brief["certificates_passed"] = runs[i].report.passed();
    per[labels[i]] = brief;
    all = all && runs[i].report.passed();
    res.report += runs[i].report.to_text();
  }
  sum["runs"] = per;

  // Bound columns side by side: for every pair, does one bound sit below the
  // other at every k >= 1?
  ojson pairs = ojson::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = 0; j < runs.size(); ++j) {
      if (i == j) continue;
      bool have = true, le = true;
      std::size_t first_violation = 0;
      for (std::size_t k = 1; k <= K && have; ++k) {
        const auto& bi = runs[i].run.trace[k].gap_bound;
        const auto& bj = runs[j].run.trace[k].gap_bound;
        if (!bi || !bj) {
          have = false;
          break;
        }
        if (le && *bi > *bj * (1.0 + 1e-12)) {
          le = false;
          first_violation = k;
        }
      }
      if (!have) continue;
      ojson pr;
      pr["bound"] = labels[i];
      pr["below"] = labels[j];
      pr["holds_for_all_k"] = le;
      pr["first_violation"] = le ? ojson(nullptr) : ojson(first_violation);
      pairs.push_back(pr);
    }
  }
  sum["bound_comparison"] = pairs;
  write_file(out / "compare.svg",
             svg_line_plot(series, {"objective gap and a-priori bounds", "k", "f - f*", true, true, false}), res);
  write_file(out / "summary.json", sum.dump(2) + "\n", res);
  res.certificates_passed = all;
  return res;
}

ExperimentResult run_certification(const json& config, const fs::path& out) {
  if (!config.is_object()) fail(ErrorCode::parse, "config: expected a JSON object");
  if (!config.contains("schedule")) fail(ErrorCode::parse, "schedule: missing");
  const Schedule s = schedule_from_json(config["schedule"], "schedule");
  const std::size_t horizon = count_field(config, "horizon", "config");
  if (horizon < 2) fail(ErrorCode::parse, "horizon: must be at least 2");
  if (!config.contains("theorem") || !config["theorem"].is_string()) fail(ErrorCode::parse, "theorem: missing");
  Theorem th;
  try {
    th = parse_theorem(config["theorem"].get<std::string>());
  } catch (const Error& e) {
    fail(ErrorCode::parse, std::string("theorem: ") + e.what());
  }
  const CertificationReport rep = certify(s, horizon, th);
  ExperimentResult res;
  res.output_dir = out;
  make_dir(out);
  write_file(out / "certification.json", rep.to_json() + "\n", res);
  res.report = rep.to_text();
  res.certificates_passed = rep.passed;
  return res;
}

}  // namespace sppa
