#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sppa {

/// One step of a parameter schedule. `log_A` is -inf when A = 0; `a_over_c`
/// is exact for families with c = a so callers never form inf/inf.
struct Terms {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double A = 0.0;
  double log_A = 0.0;
  double a_over_c = 0.0;
};

enum class Family { polynomial, exponential, constant_ratio, guler, custom };

std::string to_string(Family f);

struct ScheduleMeta {
  Family family = Family::custom;
  std::optional<double> d;
  std::optional<double> gamma;
  std::optional<std::pair<double, double>> gamma_pair;
  std::optional<double> beta;
  std::string label;
};

/// Positive step sizes rho_k: a constant or an explicit finite list.
class RhoSequence {
 public:
  static RhoSequence constant(double rho);
  static RhoSequence list(std::vector<double> rhos);

  double at(std::size_t k) const;
  /// nullopt for a constant sequence.
  std::optional<std::size_t> length() const;
  bool is_constant() const { return !values_.has_value(); }
  std::string label() const;

 private:
  RhoSequence() = default;
  double constant_ = 1.0;
  std::optional<std::vector<double>> values_;
};

/// Parameter sequences (a_k, b_k, c_k, A_k). Families are pure functions of k
/// plus metadata; nothing is precomputed, so horizons are unbounded. Copies
/// share one immutable implementation and are safe to use across threads.
class Schedule {
 public:
  /// A_k = k(k+1)...(k+p-1), a_k = p/d (k+1)...(k+p-1), b_k = d k / p, c_k = a_k.
  static Schedule polynomial(int p, double d);
  /// A_k = rho^k, a_k = (rho-1) rho^k / d, b_k = d / (rho-1), c_k = a_k.
  static Schedule exponential(double rho, double d);
  /// a_k = c_k = c0 (k+r)/r, b_k = k/r, A_k = a_k b_k; c_k/(b_k+1) = c0.
  static Schedule constant_ratio(double c0, double r);
  /// Reproduces accelerated PPA step sizes: c_k/(b_k+1) = rho_k.
  static Schedule guler(RhoSequence rhos);
  static Schedule custom(std::function<Terms(std::size_t)> terms, ScheduleMeta meta);

  /// Throws if c_k is not a positive finite number.
  Terms at(std::size_t k) const;
  const ScheduleMeta& meta() const;
  std::string label() const { return meta().label; }

  /// A copy whose c_k is multiplied by `factor`; A, a, b unchanged.
  Schedule with_c_scaled(double factor) const;

  struct Impl;

 private:
  explicit Schedule(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct ContinuousTerms {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double A = 0.0;
  double A_dot = 0.0;
  double c_dot = 0.0;
};

/// Time-continuous coefficients a_t, b_t, c_t with A_t = a_t b_t.
class ContinuousSchedule {
 public:
  /// A_t = t^p, a_t = p t^{p-1} / d, b_t = d t / p, c_t = a_t.
  static ContinuousSchedule polynomial(double p, double d);
  /// A_t = exp(lambda t), a_t = lambda exp(lambda t) / d, b_t = d / lambda, c_t = a_t.
  static ContinuousSchedule exponential(double lambda, double d);

  ContinuousTerms at(double t) const;
  Family family() const { return family_; }
  double d() const { return d_; }
  const std::string& label() const { return label_; }

 private:
  ContinuousSchedule() = default;
  Family family_ = Family::polynomial;
  double param_ = 1.0;
  double d_ = 1.0;
  std::string label_;
};

// ---------------------------------------------------------------------------
// Certification

enum class Theorem { T4, T5, T6 };

Theorem parse_theorem(const std::string& s);
std::string to_string(Theorem t);

struct ConditionCheck {
  std::string name;
  bool passed = true;
  std::optional<std::size_t> first_violation;
  /// Estimated constant or smallest slack, depending on the condition.
  double value = 0.0;
  std::string detail;
};

struct CertificationReport {
  std::string schedule;
  Theorem theorem = Theorem::T4;
  std::size_t horizon = 0;
  std::vector<ConditionCheck> checks;
  std::vector<std::string> notes;
  bool passed = true;

  std::string to_text() const;
  std::string to_json() const;
};

/// Scans k in [0, horizon). Limit-type hypotheses are judged on the last 10%
/// of the horizon; the report carries the estimates and margins used.
CertificationReport certify(const Schedule& s, std::size_t horizon, Theorem theorem);

/// Largest observed (A_{k+1} - A_k) / a_k over [0, horizon).
double estimate_d(const Schedule& s, std::size_t horizon);

/// Upper end of the admissible interval for the perturbed energy
/// E + alpha G: (1 - d) / (1 + sup_{k>=1} (c_{k+1} - c_k) / a_k), with d and
/// the sup estimated over the horizon. nullopt when d >= 1.
std::optional<double> alpha_upper_bound(const Schedule& s, std::size_t horizon);

}  // namespace sppa
