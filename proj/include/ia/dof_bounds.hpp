// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ia/rational.hpp"

namespace ia {

enum class DofRegime { k_le_r, k_gt_r };

struct DofBounds {
  Rational inner;
  Rational outer;
  bool tight = false;
  int ratio = 1;  // R
  DofRegime regime = DofRegime::k_le_r;
};

// DoF of the two-user MIMO interference channel with per-user antenna counts
// (m1, n1) and (m2, n2): min{m1+m2, n1+n2, max(m1,n2), max(m2,n1)}.
Rational two_user_mimo_dof(int m1, int n1, int m2, int n2);

// K-user M x N bounds; outer is K*min if K <= R, else K*max/(R+1); inner is
// K*min if K <= R, else K*min*R/(R+1).
Rational outerbound(int users, int tx_antennas, int rx_antennas);
Rational innerbound(int users, int tx_antennas, int rx_antennas);

DofBounds characterize(int users, int tx_antennas, int rx_antennas);

}  // namespace ia
