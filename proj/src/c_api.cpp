#include "sppa/sppa_c.h"

#include "sppa/diagnostics.hpp"
#include "sppa/error.hpp"
#include "sppa/experiment.hpp"
#include "sppa/io.hpp"
#include "sppa/solvers.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

struct sppa_metric {
  sppa::Metric value;
};
struct sppa_objective {
  sppa::Objective value;
};
struct sppa_schedule {
  sppa::Schedule value;
};
struct sppa_run {
  sppa::SolverRun value;
};
struct sppa_experiment {
  sppa::ExperimentResult value;
  std::string dir;
};

namespace {

thread_local std::string g_last_error;

sppa_status code_of(sppa::ErrorCode c) {
  switch (c) {
    case sppa::ErrorCode::invalid_argument: return SPPA_ERR_INVALID_ARGUMENT;
    case sppa::ErrorCode::dimension_mismatch: return SPPA_ERR_DIMENSION;
    case sppa::ErrorCode::unsupported: return SPPA_ERR_UNSUPPORTED;
    case sppa::ErrorCode::numerical: return SPPA_ERR_NUMERICAL;
    case sppa::ErrorCode::parse: return SPPA_ERR_PARSE;
    case sppa::ErrorCode::io: return SPPA_ERR_IO;
  }
  return SPPA_ERR_INTERNAL;
}

template <class F>
sppa_status guarded(F&& f) {
  try {
    f();
    return SPPA_OK;
  } catch (const sppa::Error& e) {
    g_last_error = e.what();
    return code_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return SPPA_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SPPA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPPA_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) sppa::fail(sppa::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

sppa::Point vec(const double* v, size_t n, const char* what) {
  need(v, what);
  return Eigen::Map<const Eigen::VectorXd>(v, static_cast<Eigen::Index>(n));
}

void copy_out(const sppa::Point& p, double* out) {
  need(out, "output buffer");
  std::memcpy(out, p.data(), sizeof(double) * static_cast<size_t>(p.size()));
}

char* dup_string(const std::string& s) {
  char* c = new char[s.size() + 1];
  std::memcpy(c, s.c_str(), s.size() + 1);
  return c;
}

sppa::Matrix mat(const double* m, size_t n, const char* what) {
  need(m, what);
  const auto N = static_cast<Eigen::Index>(n);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(m, N, N);
}

std::optional<sppa::Truth> truth_of(const double* xstar, size_t n) {
  if (!xstar) return std::nullopt;
  sppa::Truth t;
  t.minimizers.push_back(vec(xstar, n, "xstar"));
  return t;
}

double or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

extern "C" {

const char* sppa_last_error(void) { return g_last_error.c_str(); }
const char* sppa_version(void) { return SPPA_VERSION_STRING; }
void sppa_string_free(char* s) { delete[] s; }

sppa_status sppa_metric_identity(size_t n, sppa_metric** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_metric{sppa::Metric::identity(n ? std::optional<sppa::Index>(static_cast<sppa::Index>(n))
                                                    : std::nullopt)};
  });
}

sppa_status sppa_metric_diagonal(const double* d, size_t n, sppa_metric** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_metric{sppa::Metric::diagonal(vec(d, n, "d"))};
  });
}

sppa_status sppa_metric_dense(const double* m, size_t n, sppa_metric** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_metric{sppa::Metric::dense(mat(m, n, "m"))};
  });
}

void sppa_metric_free(sppa_metric* m) { delete m; }

sppa_status sppa_metric_apply(const sppa_metric* m, const double* v, size_t n, double* out) {
  return guarded([&] {
    need(m, "metric");
    copy_out(m->value.apply(vec(v, n, "v")), out);
  });
}

sppa_status sppa_metric_solve(const sppa_metric* m, const double* v, size_t n, double* out) {
  return guarded([&] {
    need(m, "metric");
    copy_out(m->value.solve(vec(v, n, "v")), out);
  });
}

sppa_status sppa_metric_norm_sq(const sppa_metric* m, const double* v, size_t n, double* out) {
  return guarded([&] {
    need(m, "metric");
    need(out, "out");
    *out = m->value.norm_sq(vec(v, n, "v"));
  });
}

sppa_status sppa_objective_quadratic(const double* Q, const double* b, size_t n, double c, sppa_objective** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_objective{sppa::Objective::quadratic(mat(Q, n, "Q"), vec(b, n, "b"), c)};
  });
}

sppa_status sppa_objective_l1(double weight, size_t n, sppa_objective** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_objective{sppa::Objective::l1(weight, static_cast<sppa::Index>(n))};
  });
}

sppa_status sppa_objective_from_json(const char* json_text, sppa_objective** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    const auto j = nlohmann::json::parse(json_text);
    *out = new sppa_objective{sppa::objective_from_json(j, "problem")};
  });
}

void sppa_objective_free(sppa_objective* f) { delete f; }

size_t sppa_objective_dim(const sppa_objective* f) { return f ? static_cast<size_t>(f->value.dim()) : 0; }

sppa_status sppa_objective_value(const sppa_objective* f, const double* x, size_t n, double* value,
                                 int* is_infinite) {
  return guarded([&] {
    need(f, "objective");
    need(value, "value");
    need(is_infinite, "is_infinite");
    const sppa::ExtendedReal v = f->value.value(vec(x, n, "x"));
    *is_infinite = v.is_infinite() ? 1 : 0;
    if (v.is_finite()) *value = v.value();
  });
}

sppa_status sppa_objective_prox(const sppa_objective* f, const sppa_metric* m, const double* y, size_t n,
                                double weight, double* minimizer, double* subgradient) {
  return guarded([&] {
    need(f, "objective");
    need(m, "metric");
    const sppa::ProxResult r = f->value.prox(m->value, vec(y, n, "y"), weight);
    copy_out(r.minimizer, minimizer);
    if (subgradient) copy_out(r.tilde_subgradient, subgradient);
  });
}

sppa_status sppa_schedule_polynomial(int p, double d, sppa_schedule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_schedule{sppa::Schedule::polynomial(p, d)};
  });
}

sppa_status sppa_schedule_exponential(double rho, double d, sppa_schedule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_schedule{sppa::Schedule::exponential(rho, d)};
  });
}

sppa_status sppa_schedule_constant_ratio(double c0, double r, sppa_schedule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_schedule{sppa::Schedule::constant_ratio(c0, r)};
  });
}

sppa_status sppa_schedule_guler(const double* rhos, size_t count, sppa_schedule** out) {
  return guarded([&] {
    need(out, "out");
    need(rhos, "rhos");
    *out = new sppa_schedule{sppa::Schedule::guler(sppa::RhoSequence::list(std::vector<double>(rhos, rhos + count)))};
  });
}

sppa_status sppa_schedule_guler_constant(double rho, sppa_schedule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sppa_schedule{sppa::Schedule::guler(sppa::RhoSequence::constant(rho))};
  });
}

sppa_status sppa_schedule_from_json(const char* json_text, sppa_schedule** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    const auto j = nlohmann::json::parse(json_text);
    *out = new sppa_schedule{sppa::schedule_from_json(j, "schedule")};
  });
}

void sppa_schedule_free(sppa_schedule* s) { delete s; }

sppa_status sppa_schedule_terms(const sppa_schedule* s, size_t k, double terms[4]) {
  return guarded([&] {
    need(s, "schedule");
    need(terms, "terms");
    const sppa::Terms t = s->value.at(k);
    terms[0] = t.a;
    terms[1] = t.b;
    terms[2] = t.c;
    terms[3] = t.A;
  });
}

sppa_status sppa_schedule_certify(const sppa_schedule* s, size_t horizon, const char* theorem, int* passed,
                                  char** report) {
  return guarded([&] {
    need(s, "schedule");
    need(theorem, "theorem");
    need(passed, "passed");
    const auto rep = sppa::certify(s->value, horizon, sppa::parse_theorem(theorem));
    *passed = rep.passed ? 1 : 0;
    if (report) *report = dup_string(rep.to_text());
  });
}

sppa_status sppa_run_ppa(const sppa_objective* f, const sppa_metric* m, double rho, const double* x0, size_t n,
                         size_t K, const double* xstar, sppa_run** out) {
  return guarded([&] {
    need(f, "objective");
    need(m, "metric");
    need(out, "out");
    sppa::RunOptions o;
    o.truth = truth_of(xstar, n);
    *out = new sppa_run{sppa::run_ppa(f->value, m->value, sppa::RhoSequence::constant(rho), vec(x0, n, "x0"), K, o)};
  });
}

sppa_status sppa_run_appa(const sppa_objective* f, double rho, double A, const double* x0, size_t n, size_t K,
                          const double* xstar, sppa_run** out) {
  return guarded([&] {
    need(f, "objective");
    need(out, "out");
    sppa::RunOptions o;
    o.truth = truth_of(xstar, n);
    *out = new sppa_run{sppa::run_appa(f->value, sppa::RhoSequence::constant(rho), vec(x0, n, "x0"), A, K,
                                       sppa::Metric::identity(), o)};
  });
}

sppa_status sppa_run_sppa(const sppa_objective* f, const sppa_metric* m, const sppa_schedule* s, const double* x0,
                          size_t n, size_t K, const double* xstar, sppa_run** out) {
  return guarded([&] {
    need(f, "objective");
    need(m, "metric");
    need(s, "schedule");
    need(out, "out");
    sppa::RunOptions o;
    o.truth = truth_of(xstar, n);
    *out = new sppa_run{sppa::run_sppa(f->value, m->value, s->value, vec(x0, n, "x0"), K, o)};
  });
}

void sppa_run_free(sppa_run* r) { delete r; }

size_t sppa_run_length(const sppa_run* r) { return r ? r->value.trace.size() : 0; }

size_t sppa_run_dim(const sppa_run* r) {
  return r && !r->value.iterates.empty() ? static_cast<size_t>(r->value.iterates.front().x.size()) : 0;
}

sppa_status sppa_run_iterate(const sppa_run* r, size_t k, double* x) {
  return guarded([&] {
    need(r, "run");
    if (k >= r->value.iterates.size()) sppa::fail(sppa::ErrorCode::invalid_argument, "k out of range");
    copy_out(r->value.iterates[k].x, x);
  });
}

sppa_status sppa_run_trace(const sppa_run* r, size_t k, sppa_trace_row* row) {
  return guarded([&] {
    need(r, "run");
    need(row, "row");
    if (k >= r->value.trace.size()) sppa::fail(sppa::ErrorCode::invalid_argument, "k out of range");
    const sppa::TraceRecord& t = r->value.trace[k];
    row->k = t.k;
    row->f_gap = t.f_gap;
    row->E = or_nan(t.E);
    row->E_alpha = or_nan(t.E_alpha);
    row->sum22_prefix = or_nan(t.sum22_prefix);
    row->sum23_prefix = or_nan(t.sum23_prefix);
    row->tilde_grad_norm_sq = or_nan(t.tilde_grad_norm_sq);
    row->bound21_rhs = or_nan(t.bound21_rhs);
    row->gap_bound = or_nan(t.gap_bound);
  });
}

sppa_status sppa_run_certificates(const sppa_run* r, const sppa_schedule* s, int* passed, char** report) {
  return guarded([&] {
    need(r, "run");
    need(passed, "passed");
    std::optional<sppa::Schedule> sched;
    if (s) sched = s->value;
    const auto rep = sppa::certificate_suite(r->value, sched);
    *passed = rep.passed() ? 1 : 0;
    if (report) *report = dup_string(rep.to_text());
  });
}

sppa_status sppa_experiment_execute(const char* command, const char* config_path, const char* out_dir,
                                    sppa_experiment** out) {
  return guarded([&] {
    need(command, "command");
    need(config_path, "config_path");
    need(out, "out");
    const std::string cmd = command;
    if (cmd != "run" && cmd != "compare" && cmd != "certify") {
      sppa::fail(sppa::ErrorCode::invalid_argument, "unknown command \"" + cmd + "\"");
    }
    const auto cfg = sppa::parse_json_file(config_path);
    std::optional<std::string> over;
    if (out_dir) over = std::string(out_dir);
    const auto dir = sppa::resolve_output_dir(cfg, over);
    auto* e = new sppa_experiment{};
    try {
      if (cmd == "run") e->value = sppa::run_experiment(cfg, dir);
      else if (cmd == "compare") e->value = sppa::run_comparison(cfg, dir);
      else e->value = sppa::run_certification(cfg, dir);
    } catch (...) {
      delete e;
      throw;
    }
    e->dir = dir.string();
    *out = e;
  });
}

void sppa_experiment_free(sppa_experiment* e) { delete e; }

int sppa_experiment_passed(const sppa_experiment* e) { return e && e->value.certificates_passed ? 1 : 0; }

const char* sppa_experiment_report(const sppa_experiment* e) { return e ? e->value.report.c_str() : ""; }

const char* sppa_experiment_output_dir(const sppa_experiment* e) { return e ? e->dir.c_str() : ""; }

}  // extern "C"
