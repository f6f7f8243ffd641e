// SPDX-License-Identifier: Apache-2.0
#include "ia/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace ia {

RankResult numeric_rank(const Matrix& m, double eps) {
  RankResult out;
  if (m.size() == 0) return out;
  Eigen::BDCSVD<Matrix> svd(m);
  out.singular_values = svd.singularValues();
  double smax = out.singular_values.size() ? out.singular_values(0) : 0.0;
  out.tolerance =
      eps * smax * static_cast<double>(std::max(m.rows(), m.cols()));
  out.rank = static_cast<int>(
      (out.singular_values.array() > out.tolerance).count());
  return out;
}

Matrix orthonormal_range(const Matrix& m, double eps) {
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  double tol =
      eps * sv(0) * static_cast<double>(std::max(m.rows(), m.cols()));
  int rank = static_cast<int>((sv.array() > tol).count());
  return svd.matrixU().leftCols(rank);
}

double subspace_angle_sin(const Matrix& a, const Matrix& b) {
  Eigen::HouseholderQR<Matrix> qa(a), qb(b);
  Matrix ua = qa.householderQ() * Matrix::Identity(a.rows(), a.cols());
  Matrix ub = qb.householderQ() * Matrix::Identity(b.rows(), b.cols());
  // Largest singular value of (I - Ua Ua^H) Ub; unlike acos of the smallest
  // cross-Gram singular value this stays accurate near zero angle.
  Matrix resid = ub - ua * (ua.adjoint() * ub);
  Eigen::JacobiSVD<Matrix> svd(resid);
  return std::min(1.0, svd.singularValues().maxCoeff());
}

Matrix pseudo_inverse(const Matrix& m) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  return cod.pseudoInverse();
}

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace ia
