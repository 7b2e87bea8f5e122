#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sppa {

using Index = Eigen::Index;
using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

void require_finite(const Point& v, const std::string& what);
void require_dim(const Point& v, Index n, const std::string& what);

/// Symmetric positive-definite preconditioner L and the geometry it induces,
/// <u, v>_L = <Lu, v>.
///
/// Dense metrics are validated (symmetry to 1e-12 relative, positive
/// definiteness) and Cholesky-factorized once at construction. An identity
/// metric built without a dimension accepts vectors of any length.
class Metric {
 public:
  enum class Kind { identity, diagonal, dense };

  static Metric identity(std::optional<Index> n = std::nullopt);
  static Metric diagonal(Point d);
  static Metric dense(Matrix m);

  Kind kind() const { return kind_; }
  /// 0 for a dimension-agnostic identity.
  Index dim() const { return dim_; }

  Point apply(const Point& v) const;
  Point solve(const Point& v) const;
  double norm_sq(const Point& v) const;
  double inner(const Point& u, const Point& v) const;
  /// ||v||^2_{L^{-1}} = <L^{-1} v, v>.
  double dual_norm_sq(const Point& v) const;

  /// The metric induced by L^{-1}.
  Metric inverse() const;

  /// Explicit n x n matrix of L.
  Matrix to_dense(Index n) const;

  const Point& diagonal_values() const { return diag_; }
  const Matrix& dense_matrix() const { return dense_; }

 private:
  Metric() = default;
  void check(const Point& v) const;

  Kind kind_ = Kind::identity;
  Index dim_ = 0;
  Point diag_;
  Matrix dense_;
  Eigen::LLT<Matrix> llt_;
};

/// min over the supplied representatives x of ||x0 - x||^2_L.
double dist_sq(const Metric& metric, const Point& x0, std::span<const Point> omega);

}  // namespace sppa
