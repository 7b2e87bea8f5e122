#pragma once

#include "sppa/metric.hpp"

#include <functional>
#include <memory>
#include <string>

namespace sppa {

/// A real number or +infinity. Indicator objectives return the infinite
/// marker off their domain; it is never encoded as a float special.
class ExtendedReal {
 public:
  static ExtendedReal finite(double v);
  static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  /// Throws if infinite.
  double value() const;

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

struct ProxResult {
  Point minimizer;
  /// weight * L (y - minimizer); an element of the subdifferential at the
  /// minimizer by first-order optimality.
  Point tilde_subgradient;
  int inner_iterations = 0;
};

/// Output of a user-supplied prox oracle.
struct CustomProx {
  Point minimizer;
  int inner_iterations = 0;
};

struct CustomOracles {
  std::string name = "custom";
  Index dim = 0;
  std::function<ExtendedReal(const Point&)> value;
  /// argmin f(x) + (weight/2) ||x - y||^2_L.
  std::function<CustomProx(const Point& y, double weight, const Metric& metric)> prox;
  /// Optional; its presence marks the objective smooth.
  std::function<Point(const Point&)> gradient;
};

/// Closed proper convex objective, exposed through value and metric-prox
/// oracles. Immutable and cheap to copy.
class Objective {
 public:
  enum class Kind { quadratic, l1, sum, affine_indicator, custom };

  struct Quadratic {
    Matrix Q;
    Point b;
    double c = 0.0;
    bool diagonal_Q = false;
  };
  struct L1 {
    double weight = 1.0;
    Index dim = 0;
  };
  struct AffineIndicator {
    Matrix A;
    Point rhs;
  };

  /// 1/2 x'Qx + b'x + c with Q symmetric positive semidefinite.
  static Objective quadratic(Matrix Q, Point b, double c = 0.0);
  /// weight * ||x||_1; dim 0 accepts any length.
  static Objective l1(double weight, Index dim = 0);
  /// quadratic + weight * ||x||_1.
  static Objective sum(const Objective& quadratic, const Objective& l1);
  /// Indicator of { x : A x = rhs }.
  static Objective affine_indicator(Matrix A, Point rhs);
  static Objective custom(CustomOracles oracles);

  Kind kind() const;
  std::string kind_name() const;
  bool smooth() const;
  /// 0 when any dimension is accepted.
  Index dim() const;

  ExtendedReal value(const Point& x) const;
  /// argmin f(x) + (weight/2) ||x - y||^2_L.
  ProxResult prox(const Metric& metric, const Point& y, double weight) const;
  Point gradient(const Point& x) const;
  /// f(x) - f(xstar). Quadratic parts are expanded around xstar so the result
  /// keeps relative accuracy when x is close to xstar.
  ExtendedReal gap(const Point& x, const Point& xstar) const;

  const Quadratic* quadratic_part() const;
  const L1* l1_part() const;
  const AffineIndicator* affine_part() const;

 private:
  struct State;
  explicit Objective(std::shared_ptr<const State> s) : state_(std::move(s)) {}
  void check(const Point& x) const;

  std::shared_ptr<const State> state_;
};

}  // namespace sppa
