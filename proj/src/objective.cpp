#include "sppa/objective.hpp"

#include "sppa/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <variant>

namespace sppa {

ExtendedReal ExtendedReal::finite(double v) {
  if (!std::isfinite(v)) fail(ErrorCode::numerical, "objective value is not finite");
  return ExtendedReal(v, false);
}

double ExtendedReal::value() const {
  if (infinite_) fail(ErrorCode::numerical, "value is +infinity");
  return value_;
}

namespace {

struct Sum {
  Objective::Quadratic quad;
  Objective::L1 l1;
};

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

bool is_diagonal(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

double quad_value(const Objective::Quadratic& q, const Point& x) {
  return 0.5 * x.dot(q.Q * x) + q.b.dot(x) + q.c;
}

double quad_gap(const Objective::Quadratic& q, const Point& x, const Point& xs) {
  const Point d = x - xs;
  return 0.5 * d.dot(q.Q * d) + (q.Q * xs + q.b).dot(d);
}

// Diagonal of L as a vector, or nullopt for a dense metric.
std::optional<Point> metric_diagonal(const Metric& metric, Index n) {
  switch (metric.kind()) {
    case Metric::Kind::identity: return Point::Ones(n);
    case Metric::Kind::diagonal: return metric.diagonal_values();
    case Metric::Kind::dense: return std::nullopt;
  }
  return std::nullopt;
}

Point solve_spd(Matrix K, const Point& rhs) {
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  Eigen::LDLT<Matrix> ldlt(K);
  if (ldlt.info() != Eigen::Success) fail(ErrorCode::numerical, "prox subproblem is singular");
  return ldlt.solve(rhs);
}

}  // namespace

struct Objective::State {
  std::variant<Quadratic, L1, Sum, AffineIndicator, CustomOracles> body;
};

Objective Objective::quadratic(Matrix Q, Point b, double c) {
  if (Q.rows() == 0 || Q.rows() != Q.cols()) {
    fail(ErrorCode::invalid_argument, "quadratic Q must be a non-empty square matrix");
  }
  require_dim(b, Q.rows(), "quadratic b");
  if (!Q.allFinite() || !b.allFinite() || !std::isfinite(c)) {
    fail(ErrorCode::invalid_argument, "quadratic objective has non-finite data");
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(ErrorCode::invalid_argument, "quadratic Q is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    fail(ErrorCode::invalid_argument, "quadratic Q is not positive semidefinite");
  }
  Quadratic q{std::move(Q), std::move(b), c, false};
  q.diagonal_Q = is_diagonal(q.Q);
  return Objective(std::make_shared<State>(State{std::move(q)}));
}

Objective Objective::l1(double weight, Index dim) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    fail(ErrorCode::invalid_argument, "l1 weight must be positive");
  }
  return Objective(std::make_shared<State>(State{L1{weight, dim}}));
}

Objective Objective::sum(const Objective& quadratic, const Objective& l1) {
  const Quadratic* q = quadratic.quadratic_part();
  const L1* r = l1.l1_part();
  if (quadratic.kind() != Kind::quadratic || l1.kind() != Kind::l1 || !q || !r) {
    fail(ErrorCode::invalid_argument, "sum objective takes a quadratic and an l1 term");
  }
  if (r->dim != 0 && r->dim != q->Q.rows()) {
    fail(ErrorCode::dimension_mismatch, "sum objective terms have different dimensions");
  }
  return Objective(std::make_shared<State>(State{Sum{*q, L1{r->weight, q->Q.rows()}}}));
}

Objective Objective::affine_indicator(Matrix A, Point rhs) {
  if (A.rows() == 0 || A.cols() == 0) fail(ErrorCode::invalid_argument, "affine A is empty");
  require_dim(rhs, A.rows(), "affine rhs");
  if (!A.allFinite() || !rhs.allFinite()) {
    fail(ErrorCode::invalid_argument, "affine constraint has non-finite data");
  }
  return Objective(std::make_shared<State>(State{AffineIndicator{std::move(A), std::move(rhs)}}));
}

Objective Objective::custom(CustomOracles oracles) {
  if (!oracles.value || !oracles.prox) {
    fail(ErrorCode::invalid_argument, "custom objective needs value and prox oracles");
  }
  return Objective(std::make_shared<State>(State{std::move(oracles)}));
}

Objective::Kind Objective::kind() const {
  return static_cast<Kind>(state_->body.index());
}

std::string Objective::kind_name() const {
  switch (kind()) {
    case Kind::quadratic: return "quadratic";
    case Kind::l1: return "l1";
    case Kind::sum: return "sum";
    case Kind::affine_indicator: return "affine_indicator";
    case Kind::custom: return std::get<CustomOracles>(state_->body).name;
  }
  return "unknown";
}

bool Objective::smooth() const {
  if (kind() == Kind::quadratic) return true;
  if (kind() == Kind::custom) return static_cast<bool>(std::get<CustomOracles>(state_->body).gradient);
  return false;
}

Index Objective::dim() const {
  return std::visit(
      [](const auto& b) -> Index {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Quadratic>) return b.Q.rows();
        else if constexpr (std::is_same_v<T, L1>) return b.dim;
        else if constexpr (std::is_same_v<T, Sum>) return b.quad.Q.rows();
        else if constexpr (std::is_same_v<T, AffineIndicator>) return b.A.cols();
        else return b.dim;
      },
      state_->body);
}

const Objective::Quadratic* Objective::quadratic_part() const {
  if (auto* q = std::get_if<Quadratic>(&state_->body)) return q;
  if (auto* s = std::get_if<Sum>(&state_->body)) return &s->quad;
  return nullptr;
}

const Objective::L1* Objective::l1_part() const {
  if (auto* r = std::get_if<L1>(&state_->body)) return r;
  if (auto* s = std::get_if<Sum>(&state_->body)) return &s->l1;
  return nullptr;
}

const Objective::AffineIndicator* Objective::affine_part() const {
  return std::get_if<AffineIndicator>(&state_->body);
}

void Objective::check(const Point& x) const {
  const Index n = dim();
  if (n != 0) require_dim(x, n, "point");
}

ExtendedReal Objective::value(const Point& x) const {
  check(x);
  return std::visit(
      [&](const auto& b) -> ExtendedReal {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return ExtendedReal::finite(quad_value(b, x));
        } else if constexpr (std::is_same_v<T, L1>) {
          return ExtendedReal::finite(b.weight * x.lpNorm<1>());
        } else if constexpr (std::is_same_v<T, Sum>) {
          return ExtendedReal::finite(quad_value(b.quad, x) + b.l1.weight * x.lpNorm<1>());
        } else if constexpr (std::is_same_v<T, AffineIndicator>) {
          const double tol = 1e-9 * (1.0 + b.rhs.cwiseAbs().maxCoeff());
          const double resid = (b.A * x - b.rhs).cwiseAbs().maxCoeff();
          return resid <= tol ? ExtendedReal::finite(0.0) : ExtendedReal::infinity();
        } else {
          return b.value(x);
        }
      },
      state_->body);
}

ExtendedReal Objective::gap(const Point& x, const Point& xstar) const {
  check(x);
  check(xstar);
  if (auto* q = std::get_if<Quadratic>(&state_->body)) {
    return ExtendedReal::finite(quad_gap(*q, x, xstar));
  }
  if (auto* s = std::get_if<Sum>(&state_->body)) {
    return ExtendedReal::finite(quad_gap(s->quad, x, xstar) +
                                s->l1.weight * (x.lpNorm<1>() - xstar.lpNorm<1>()));
  }
  const ExtendedReal fx = value(x);
  const ExtendedReal fs = value(xstar);
  if (fs.is_infinite()) fail(ErrorCode::invalid_argument, "reference point is outside the domain");
  if (fx.is_infinite()) return fx;
  return ExtendedReal::finite(fx.value() - fs.value());
}

Point Objective::gradient(const Point& x) const {
  check(x);
  if (auto* q = std::get_if<Quadratic>(&state_->body)) return q->Q * x + q->b;
  if (auto* c = std::get_if<CustomOracles>(&state_->body); c && c->gradient) return c->gradient(x);
  fail(ErrorCode::unsupported, "gradient unavailable for " + kind_name() + " objective");
}

ProxResult Objective::prox(const Metric& metric, const Point& y, double weight) const {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    fail(ErrorCode::invalid_argument, "prox weight must be positive");
  }
  check(y);
  require_finite(y, "prox anchor");
  const Index n = y.size();
  if (metric.dim() != 0) require_dim(y, metric.dim(), "prox anchor");

  ProxResult out;
  auto unsupported = [&](const char* why) {
    fail(ErrorCode::unsupported, "prox of " + kind_name() + " objective under a " +
                                     (metric.kind() == Metric::Kind::dense ? "dense" : "diagonal") +
                                     " metric is not supported: " + why);
  };

  if (auto* q = std::get_if<Quadratic>(&state_->body)) {
    // (Q + wL) x = wLy - b
    Matrix K = q->Q;
    if (auto d = metric_diagonal(metric, n)) {
      K.diagonal() += weight * *d;
    } else {
      K += weight * metric.dense_matrix();
    }
    out.minimizer = solve_spd(std::move(K), weight * metric.apply(y) - q->b);
  } else if (auto* r = std::get_if<L1>(&state_->body)) {
    auto d = metric_diagonal(metric, n);
    if (!d) unsupported("needs identity or diagonal L");
    out.minimizer.resize(n);
    for (Index i = 0; i < n; ++i) {
      out.minimizer[i] = soft_threshold(y[i], r->weight / (weight * (*d)[i]));
    }
  } else if (auto* s = std::get_if<Sum>(&state_->body)) {
    auto d = metric_diagonal(metric, n);
    if (!d) unsupported("needs identity or diagonal L");
    if (!s->quad.diagonal_Q) unsupported("needs a diagonal quadratic term");
    // Per coordinate: (q_i + w l_i) x = soft(w l_i y_i - b_i, lambda).
    out.minimizer.resize(n);
    for (Index i = 0; i < n; ++i) {
      const double wl = weight * (*d)[i];
      out.minimizer[i] =
          soft_threshold(wl * y[i] - s->quad.b[i], s->l1.weight) / (s->quad.Q(i, i) + wl);
    }
  } else if (auto* a = std::get_if<AffineIndicator>(&state_->body)) {
    // [wL A'; A 0] [x; nu] = [wLy; rhs]; x is unique even if A is rank deficient.
    const Index m = a->A.rows();
    Matrix K = Matrix::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = weight * metric.to_dense(n);
    K.topRightCorner(n, m) = a->A.transpose();
    K.bottomLeftCorner(m, n) = a->A;
    Point rhs(n + m);
    rhs << weight * metric.apply(y), a->rhs;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    const Point sol = cod.solve(rhs);
    out.minimizer = sol.head(n);
    const double resid = (a->A * out.minimizer - a->rhs).cwiseAbs().maxCoeff();
    if (resid > 1e-8 * (1.0 + a->rhs.cwiseAbs().maxCoeff())) {
      fail(ErrorCode::numerical, "affine constraint set is empty");
    }
  } else {
    const auto& c = std::get<CustomOracles>(state_->body);
    CustomProx res = c.prox(y, weight, metric);
    require_dim(res.minimizer, n, "custom prox minimizer");
    out.minimizer = std::move(res.minimizer);
    out.inner_iterations = res.inner_iterations;
  }
  require_finite(out.minimizer, "prox minimizer");
  out.tilde_subgradient = weight * metric.apply(y - out.minimizer);
  return out;
}

}  // namespace sppa
