// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "ia/channel.hpp"

namespace ia {

// Rank convention used everywhere: count singular values above
// eps * sigma_max * max(rows, cols).
constexpr double kDefaultSvdEps = 1e-10;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RankResult {
  int rank = 0;
  Eigen::VectorXd singular_values;
  double tolerance = 0.0;
};

RankResult numeric_rank(const Matrix& m, double eps = kDefaultSvdEps);

// Orthonormal basis (thin) of the numeric column space.
Matrix orthonormal_range(const Matrix& m, double eps = kDefaultSvdEps);

// Sine of the largest principal angle between span(a) and span(b); both
// inputs must have full column rank.
double subspace_angle_sin(const Matrix& a, const Matrix& b);

Matrix pseudo_inverse(const Matrix& m);

double condition_number(const Matrix& m);

}  // namespace ia
