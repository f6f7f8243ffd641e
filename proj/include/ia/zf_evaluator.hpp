// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ia/channel.hpp"
#include "ia/mimo_alignment.hpp"
#include "ia/numeric.hpp"
#include "ia/rational.hpp"
#include "ia/simo_alignment.hpp"

namespace ia {

// Effective receive-side view of one constructed system: per receiver, the
// desired image H[ii] V[i] and the stacked interference images.
struct LinkSet {
  int users = 0;
  int extension = 1;
  std::vector<int> allocation;
  std::vector<Matrix> desired;       // space x d_i
  std::vector<Matrix> interference;  // space x sum_{j != i} d_j
};

LinkSet make_links(const ChannelSet& channels, const PrecoderSet& p);
LinkSet make_links(const ExtendedChannel& ext, const SimoPrecoders& p);

// Zero-forcing receive filters: F_i * interference = 0 and
// F_i * desired_i = I (d_i x d_i). Throws NumericalError when the desired
// block is rank-deficient against the interference span (separability
// failure) or leakage exceeds 1e-9.
struct FilterBank {
  std::vector<Matrix> filters;  // d_i x space
  double max_leakage = 0.0;     // worst |row . column| / (|row||column|)
};

FilterBank zf_filters(const LinkSet& links, double eps = kDefaultSvdEps);

// Sum rate in bits per orthogonal dimension at total transmit power
// rho = 10^(snr_db/10), split rho/K per transmitter and equally per stream.
double sum_rate(const LinkSet& links, const FilterBank& filters,
                double snr_db);

struct SweepResult {
  std::vector<double> snr_grid_db;
  std::vector<double> sum_rate_bits;
  double slope_estimate = 0.0;  // bits per log2(SNR), top half of the grid
  Rational predicted_dof;
  std::string scheme;
  std::uint64_t seed = 0;
};

// Grid must be ascending with at least 4 points and the top point >= 50 dB.
SweepResult dof_slope(const LinkSet& links, const FilterBank& filters,
                      const std::vector<double>& snr_grid_db,
                      const Rational& predicted_dof, const std::string& scheme,
                      std::uint64_t seed);

std::vector<double> default_snr_grid();  // 30..70 dB step 10

}  // namespace ia
