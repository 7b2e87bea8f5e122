#include "sppa/schedule.hpp"

#include "sppa/error.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

namespace sppa {

std::string to_string(Family f) {
  switch (f) {
    case Family::polynomial: return "polynomial";
    case Family::exponential: return "exponential";
    case Family::constant_ratio: return "constant_ratio";
    case Family::guler: return "guler";
    case Family::custom: return "custom";
  }
  return "custom";
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double safe_log(double v) {
  return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

// k (k+1) ... (k+p-1); the empty product is 1.
double rising(double k, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= k + i;
  return r;
}

void require_d(double d) {
  if (!(d > 0.0 && d <= 1.0)) fail(ErrorCode::invalid_argument, "d must lie in (0, 1]");
}

}  // namespace

// ---------------------------------------------------------------------------

RhoSequence RhoSequence::constant(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) fail(ErrorCode::invalid_argument, "rho must be positive");
  RhoSequence s;
  s.constant_ = rho;
  return s;
}

RhoSequence RhoSequence::list(std::vector<double> rhos) {
  if (rhos.empty()) fail(ErrorCode::invalid_argument, "rhos must not be empty");
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] > 0.0) || !std::isfinite(rhos[i])) {
      fail(ErrorCode::invalid_argument, "rhos[" + std::to_string(i) + "] must be positive");
    }
  }
  RhoSequence s;
  s.values_ = std::move(rhos);
  return s;
}

double RhoSequence::at(std::size_t k) const {
  if (!values_) return constant_;
  if (k >= values_->size()) {
    fail(ErrorCode::invalid_argument, "rhos has " + std::to_string(values_->size()) +
                                          " entries; iteration " + std::to_string(k) +
                                          " needs rhos[" + std::to_string(k) + "]");
  }
  return (*values_)[k];
}

std::optional<std::size_t> RhoSequence::length() const {
  if (!values_) return std::nullopt;
  return values_->size();
}

std::string RhoSequence::label() const {
  if (!values_) return "const " + fmt(constant_);
  return "list of " + std::to_string(values_->size());
}

// ---------------------------------------------------------------------------

struct Schedule::Impl {
  ScheduleMeta meta;
  virtual ~Impl() = default;
  virtual Terms terms(std::size_t k) const = 0;
};

namespace {

struct PolynomialImpl final : Schedule::Impl {
  int p;
  double d;
  Terms terms(std::size_t kk) const override {
    const double k = static_cast<double>(kk);
    Terms t;
    t.A = rising(k, p);
    t.a = p / d * rising(k + 1, p - 1);
    t.b = d * k / p;
    t.c = t.a;
    t.log_A = safe_log(t.A);
    t.a_over_c = 1.0;
    return t;
  }
};

struct ExponentialImpl final : Schedule::Impl {
  double rho;
  double d;
  Terms terms(std::size_t kk) const override {
    const double k = static_cast<double>(kk);
    Terms t;
    t.log_A = k * std::log(rho);
    t.A = std::exp(t.log_A);
    t.a = (rho - 1.0) / d * t.A;
    t.b = d / (rho - 1.0);
    t.c = t.a;
    t.a_over_c = 1.0;
    return t;
  }
};

struct ConstantRatioImpl final : Schedule::Impl {
  double c0;
  double r;
  Terms terms(std::size_t kk) const override {
    const double k = static_cast<double>(kk);
    Terms t;
    t.a = c0 * (k + r) / r;
    t.b = k / r;
    t.c = t.a;
    t.A = c0 * k * (k + r) / (r * r);
    t.log_A = safe_log(t.A);
    t.a_over_c = 1.0;
    return t;
  }
};

struct GulerImpl final : Schedule::Impl {
  explicit GulerImpl(RhoSequence r) : rhos(std::move(r)) {}
  RhoSequence rhos;
  // prefix[k] = sum_{i<k} sqrt(rho_i), grown on demand.
  mutable std::mutex mu;
  mutable std::vector<double> prefix{0.0};

  double prefix_sum(std::size_t k) const {
    if (rhos.is_constant()) return static_cast<double>(k) * std::sqrt(rhos.at(0));
    std::lock_guard<std::mutex> lock(mu);
    while (prefix.size() <= k) {
      const std::size_t i = prefix.size() - 1;
      prefix.push_back(prefix.back() + std::sqrt(rhos.at(i)));
    }
    return prefix[k];
  }

  Terms terms(std::size_t k) const override {
    const double rho = rhos.at(k);
    const double sr = std::sqrt(rho);
    const double S = prefix_sum(k);
    const double S1 = S + sr;
    const double denom = sr + 2.0 * S;
    Terms t;
    t.A = 0.5 * S * S;
    t.a = 0.5 * sr * denom;
    t.b = S * S / (sr * denom);
    t.c = sr * S1 * S1 / denom;
    t.log_A = safe_log(t.A);
    // a/c = denom^2 / (2 S1^2)
    t.a_over_c = denom * denom / (2.0 * S1 * S1);
    return t;
  }
};

struct CustomImpl final : Schedule::Impl {
  std::function<Terms(std::size_t)> fn;
  Terms terms(std::size_t k) const override { return fn(k); }
};

struct ScaledImpl final : Schedule::Impl {
  std::shared_ptr<const Schedule::Impl> base;
  double factor;
  Terms terms(std::size_t k) const override {
    Terms t = base->terms(k);
    t.c *= factor;
    t.a_over_c /= factor;
    return t;
  }
};

}  // namespace

Schedule Schedule::polynomial(int p, double d) {
  if (p < 1) fail(ErrorCode::invalid_argument, "polynomial order p must be >= 1");
  require_d(d);
  auto impl = std::make_shared<PolynomialImpl>();
  impl->p = p;
  impl->d = d;
  impl->meta = {Family::polynomial, d, std::nullopt, std::pair{1.0, 1.0}, p / d,
                "polynomial(p=" + std::to_string(p) + ", d=" + fmt(d) + ")"};
  return Schedule(impl);
}

Schedule Schedule::exponential(double rho, double d) {
  if (!(rho > 1.0) || !std::isfinite(rho)) fail(ErrorCode::invalid_argument, "rho must be > 1");
  require_d(d);
  auto impl = std::make_shared<ExponentialImpl>();
  impl->rho = rho;
  impl->d = d;
  impl->meta = {Family::exponential, d, (rho - 1.0) / d, std::pair{1.0, 1.0}, std::nullopt,
                "exponential(rho=" + fmt(rho) + ", d=" + fmt(d) + ")"};
  return Schedule(impl);
}

Schedule Schedule::constant_ratio(double c0, double r) {
  if (!(c0 > 0.0) || !std::isfinite(c0)) fail(ErrorCode::invalid_argument, "c must be positive");
  if (!(r >= 2.0) || !std::isfinite(r)) fail(ErrorCode::invalid_argument, "r must be >= 2");
  auto impl = std::make_shared<ConstantRatioImpl>();
  impl->c0 = c0;
  impl->r = r;
  impl->meta = {Family::constant_ratio, 2.0 / r, std::nullopt, std::pair{1.0, 1.0}, r,
                "constant_ratio(c=" + fmt(c0) + ", r=" + fmt(r) + ")"};
  return Schedule(impl);
}

Schedule Schedule::guler(RhoSequence rhos) {
  const std::string label = "guler(rhos=" + rhos.label() + ")";
  auto impl = std::make_shared<GulerImpl>(std::move(rhos));
  impl->meta = {Family::guler, 1.0, std::nullopt, std::nullopt, std::nullopt, label};
  return Schedule(impl);
}

Schedule Schedule::custom(std::function<Terms(std::size_t)> terms, ScheduleMeta meta) {
  if (!terms) fail(ErrorCode::invalid_argument, "custom schedule needs a terms function");
  auto impl = std::make_shared<CustomImpl>();
  impl->fn = std::move(terms);
  meta.family = Family::custom;
  if (meta.label.empty()) meta.label = "custom";
  impl->meta = std::move(meta);
  return Schedule(impl);
}

Schedule Schedule::with_c_scaled(double factor) const {
  if (!(factor > 0.0)) fail(ErrorCode::invalid_argument, "c scale factor must be positive");
  auto impl = std::make_shared<ScaledImpl>();
  impl->base = impl_;
  impl->factor = factor;
  impl->meta = impl_->meta;
  impl->meta.family = Family::custom;
  impl->meta.gamma_pair.reset();
  impl->meta.label = impl_->meta.label + " with c scaled by " + fmt(factor);
  return Schedule(impl);
}

Terms Schedule::at(std::size_t k) const {
  Terms t = impl_->terms(k);
  if (!(t.c > 0.0) || !std::isfinite(t.c)) {
    fail(ErrorCode::numerical, label() + ": c_" + std::to_string(k) + " = " + fmt(t.c) +
                                   " is not a positive finite number");
  }
  if (!(t.a >= 0.0) || !(t.b >= 0.0) || !(t.A >= 0.0) || std::isnan(t.a_over_c)) {
    fail(ErrorCode::numerical, label() + ": invalid terms at k=" + std::to_string(k));
  }
  return t;
}

const ScheduleMeta& Schedule::meta() const { return impl_->meta; }

// ---------------------------------------------------------------------------

ContinuousSchedule ContinuousSchedule::polynomial(double p, double d) {
  if (!(p >= 1.0) || !std::isfinite(p)) fail(ErrorCode::invalid_argument, "polynomial order p must be >= 1");
  require_d(d);
  ContinuousSchedule s;
  s.family_ = Family::polynomial;
  s.param_ = p;
  s.d_ = d;
  s.label_ = "polynomial(p=" + fmt(p) + ", d=" + fmt(d) + ")";
  return s;
}

ContinuousSchedule ContinuousSchedule::exponential(double lambda, double d) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::invalid_argument, "lambda must be positive");
  require_d(d);
  ContinuousSchedule s;
  s.family_ = Family::exponential;
  s.param_ = lambda;
  s.d_ = d;
  s.label_ = "exponential(lambda=" + fmt(lambda) + ", d=" + fmt(d) + ")";
  return s;
}

ContinuousTerms ContinuousSchedule::at(double t) const {
  if (!(t >= 0.0)) fail(ErrorCode::invalid_argument, "time must be non-negative");
  ContinuousTerms out;
  if (family_ == Family::polynomial) {
    const double p = param_;
    const double tp1 = p == 1.0 ? 1.0 : std::pow(t, p - 1.0);
    out.A = std::pow(t, p);
    out.A_dot = p * tp1;
    out.a = out.A_dot / d_;
    out.b = d_ * t / p;
    out.c = out.a;
    const double tp2 = p == 1.0 ? 0.0 : (p == 2.0 ? 1.0 : std::pow(t, p - 2.0));
    out.c_dot = p * (p - 1.0) * tp2 / d_;
  } else {
    const double e = std::exp(param_ * t);
    out.A = e;
    out.A_dot = param_ * e;
    out.a = out.A_dot / d_;
    out.b = d_ / param_;
    out.c = out.a;
    out.c_dot = param_ * out.a;
  }
  return out;
}

}  // namespace sppa
