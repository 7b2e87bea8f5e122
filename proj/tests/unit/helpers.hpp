#pragma once

#include "sppa/metric.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace testing {

inline sppa::Point vec(std::initializer_list<double> v) {
  sppa::Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

inline sppa::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  sppa::Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (auto row : rows) {
    Eigen::Index c = 0;
    for (double x : row) m(r, c++) = x;
    ++r;
  }
  return m;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal() { return normal_(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  sppa::Point point(Eigen::Index n) {
    sppa::Point p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = normal();
    return p;
  }
  sppa::Matrix matrix(Eigen::Index r, Eigen::Index c) {
    sppa::Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  }
  /// Well-conditioned symmetric positive definite matrix.
  sppa::Matrix spd(Eigen::Index n) {
    const sppa::Matrix M = matrix(n, n);
    sppa::Matrix S = M.transpose() * M / static_cast<double>(n);
    S.diagonal().array() += 0.5;
    return 0.5 * (S + S.transpose());
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace testing
