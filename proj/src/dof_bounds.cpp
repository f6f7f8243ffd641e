// SPDX-License-Identifier: Apache-2.0
#include "ia/dof_bounds.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace ia {

namespace {

void check_positive(int users, int tx, int rx) {
  if (users < 1 || tx < 1 || rx < 1)
    throw std::invalid_argument("user and antenna counts must be >= 1");
}

}  // namespace

Rational two_user_mimo_dof(int m1, int n1, int m2, int n2) {
  if (m1 < 1 || n1 < 1 || m2 < 1 || n2 < 1)
    throw std::invalid_argument("antenna counts must be >= 1");
  int v = std::min({m1 + m2, n1 + n2, std::max(m1, n2), std::max(m2, n1)});
  return Rational(v);
}

Rational outerbound(int users, int tx_antennas, int rx_antennas) {
  check_positive(users, tx_antennas, rx_antennas);
  int lo = std::min(tx_antennas, rx_antennas);
  int hi = std::max(tx_antennas, rx_antennas);
  int ratio = hi / lo;
  if (users <= ratio) return Rational(users) * lo;
  return Rational(static_cast<long long>(users) * hi, ratio + 1);
}

Rational innerbound(int users, int tx_antennas, int rx_antennas) {
  check_positive(users, tx_antennas, rx_antennas);
  int lo = std::min(tx_antennas, rx_antennas);
  int hi = std::max(tx_antennas, rx_antennas);
  int ratio = hi / lo;
  if (users <= ratio) return Rational(users) * lo;
  return Rational(static_cast<long long>(users) * lo * ratio, ratio + 1);
}

DofBounds characterize(int users, int tx_antennas, int rx_antennas) {
  check_positive(users, tx_antennas, rx_antennas);
  int lo = std::min(tx_antennas, rx_antennas);
  int hi = std::max(tx_antennas, rx_antennas);

  DofBounds b;
  b.ratio = hi / lo;
  b.regime = users <= b.ratio ? DofRegime::k_le_r : DofRegime::k_gt_r;
  b.inner = innerbound(users, tx_antennas, rx_antennas);
  b.outer = outerbound(users, tx_antennas, rx_antennas);
  b.tight = users <= b.ratio || hi % lo == 0;
  assert(b.inner <= b.outer);
  assert(b.tight == (b.inner == b.outer));
  return b;
}

}  // namespace ia
