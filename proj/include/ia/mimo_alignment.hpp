// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ia/channel.hpp"
#include "ia/numeric.hpp"
#include "ia/rational.hpp"
#include "ia/report.hpp"

namespace ia {

enum class Scheme {
  zero_forcing,
  theorem4,
  theorem5,
  example1,
  example2,
};

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct PrecoderSet {
  Scheme scheme = Scheme::zero_forcing;
  int users = 0;
  int extension = 1;  // symbol extension E (1 = none)
  std::vector<int> allocation;    // d_i, index 0 = user 1
  std::vector<Matrix> precoders;  // (M*extension) x d_i, unit columns
  // Diagnostics filled by the builders.
  double chain_residual = 0.0;   // worst relative residual of the alignment
                                 // equations solved by propagation
  double eigen_angle = 0.0;      // sin of the largest principal angle between
                                 // the two images of the eigenvector seed
  bool boundary_fallback = false;  // scheme regime not met, zero forcing used

  Rational total_dof() const;  // sum(d_i) / extension
};

// Stream split for the no-extension scheme on K = R+2 users with M transmit
// and RM receive antennas: every d_i in [R*f, M] with f = floor(RM/(R^2+2R-1))
// summing to RM + f. Surplus beyond the common floor goes to the last user
// first, one stream at a time, capped at M.
std::vector<int> allocate_dof_theorem4(int ratio, int tx_antennas);

// Eigenvector-seeded construction, constant channels, no extension.
// Requires M >= R+2; smaller M falls back to zero forcing over a subset of R
// users with boundary_fallback set.
PrecoderSet build_theorem4(const ChannelSet& channels, int ratio,
                           int tx_antennas);

// Chained construction over the E = ceil((R+2)/M) symbol extension,
// 1 < M < R+2. The extra stream rides on user 2.
PrecoderSet build_theorem5(const ChannelSet& channels, int ratio,
                           int tx_antennas);

// The (R=2, M=4) instance of the eigenvector scheme.
PrecoderSet build_example1(const ChannelSet& channels);

// The (R=2, M=2, E=2) chained scheme with the roles of users 2 and 4
// exchanged, so the extra stream rides on user 4: allocation (2, 2, 2, 3).
PrecoderSet build_example2(const ChannelSet& channels);

// Plain zero forcing for K <= R = floor(N/M) users, M <= N orientation.
PrecoderSet build_zero_forcing(const ChannelSet& channels, int users);

AlignmentReport verify_constant_alignment(const ChannelSet& channels,
                                          const PrecoderSet& p,
                                          double eps = kDefaultSvdEps);

}  // namespace ia
