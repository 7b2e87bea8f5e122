#include "sppa/metric.hpp"

#include "sppa/error.hpp"

#include <cmath>
#include <limits>

namespace sppa {

void require_finite(const Point& v, const std::string& what) {
  if (!v.allFinite()) fail(ErrorCode::invalid_argument, what + " has non-finite entries");
}

void require_dim(const Point& v, Index n, const std::string& what) {
  if (v.size() != n) {
    fail(ErrorCode::dimension_mismatch, what + " has dimension " + std::to_string(v.size()) +
                                            ", expected " + std::to_string(n));
  }
}

Metric Metric::identity(std::optional<Index> n) {
  Metric m;
  m.kind_ = Kind::identity;
  m.dim_ = n.value_or(0);
  if (m.dim_ < 0) fail(ErrorCode::invalid_argument, "metric dimension must be non-negative");
  return m;
}

Metric Metric::diagonal(Point d) {
  if (d.size() == 0) fail(ErrorCode::invalid_argument, "diagonal metric needs at least one entry");
  for (Index i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i]) || d[i] <= 0.0) {
      fail(ErrorCode::invalid_argument,
           "diagonal metric values[" + std::to_string(i) + "] must be positive");
    }
  }
  Metric m;
  m.kind_ = Kind::diagonal;
  m.dim_ = d.size();
  m.diag_ = std::move(d);
  return m;
}

Metric Metric::dense(Matrix mat) {
  if (mat.rows() == 0 || mat.rows() != mat.cols()) {
    fail(ErrorCode::invalid_argument, "dense metric must be a non-empty square matrix");
  }
  if (!mat.allFinite()) fail(ErrorCode::invalid_argument, "dense metric has non-finite entries");
  const double scale = mat.cwiseAbs().maxCoeff();
  const double asym = (mat - mat.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) fail(ErrorCode::invalid_argument, "dense metric is not symmetric");
  Metric m;
  m.kind_ = Kind::dense;
  m.dim_ = mat.rows();
  m.llt_.compute(mat);
  if (m.llt_.info() != Eigen::Success) {
    fail(ErrorCode::numerical, "dense metric is not positive definite");
  }
  m.dense_ = std::move(mat);
  return m;
}

void Metric::check(const Point& v) const {
  if (dim_ != 0) require_dim(v, dim_, "vector");
}

Point Metric::apply(const Point& v) const {
  check(v);
  switch (kind_) {
    case Kind::identity: return v;
    case Kind::diagonal: return diag_.cwiseProduct(v);
    case Kind::dense: return dense_ * v;
  }
  return v;
}

Point Metric::solve(const Point& v) const {
  check(v);
  switch (kind_) {
    case Kind::identity: return v;
    case Kind::diagonal: return v.cwiseQuotient(diag_);
    case Kind::dense: return llt_.solve(v);
  }
  return v;
}

double Metric::norm_sq(const Point& v) const { return std::max(0.0, apply(v).dot(v)); }

double Metric::inner(const Point& u, const Point& v) const {
  check(u);
  check(v);
  return apply(u).dot(v);
}

double Metric::dual_norm_sq(const Point& v) const { return std::max(0.0, solve(v).dot(v)); }

Metric Metric::inverse() const {
  switch (kind_) {
    case Kind::identity: return *this;
    case Kind::diagonal: return diagonal(diag_.cwiseInverse());
    case Kind::dense: {
      Matrix inv = llt_.solve(Matrix::Identity(dim_, dim_));
      Matrix sym = 0.5 * (inv + inv.transpose());
      return dense(std::move(sym));
    }
  }
  return *this;
}

Matrix Metric::to_dense(Index n) const {
  if (dim_ != 0 && n != dim_) {
    fail(ErrorCode::dimension_mismatch, "metric has dimension " + std::to_string(dim_));
  }
  switch (kind_) {
    case Kind::identity: return Matrix::Identity(n, n);
    case Kind::diagonal: return diag_.asDiagonal();
    case Kind::dense: return dense_;
  }
  return Matrix::Identity(n, n);
}

double dist_sq(const Metric& metric, const Point& x0, std::span<const Point> omega) {
  if (omega.empty()) fail(ErrorCode::invalid_argument, "solution set representatives are empty");
  double best = std::numeric_limits<double>::infinity();
  for (const Point& x : omega) {
    require_dim(x, x0.size(), "solution representative");
    best = std::min(best, metric.norm_sq(x0 - x));
  }
  return best;
}

}  // namespace sppa
