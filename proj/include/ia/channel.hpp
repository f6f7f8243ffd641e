// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "ia/rng.hpp"

namespace ia {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

enum class Variation { time_varying, constant };

std::string variation_name(Variation v);
Variation variation_from_name(const std::string& name);

struct SystemConfig {
  int users = 2;        // K
  int tx_antennas = 1;  // M
  int rx_antennas = 1;  // N
  Variation variation = Variation::time_varying;
  std::uint64_t seed = 1;
  double magnitude_lo = 0.5;
  double magnitude_hi = 2.0;

  // R = floor(max(M, N) / min(M, N)).
  int ratio() const;

  // Throws std::invalid_argument on K < 2, non-positive antenna counts or a
  // degenerate magnitude interval.
  void validate() const;
};

// Per-slot channel matrices H[kj](t) for every (receiver k, transmitter j)
// pair, each rx_antennas x tx_antennas. Entries are r*exp(i*theta) with r
// uniform in [magnitude_lo, magnitude_hi] and theta uniform in [0, 2pi);
// a constant channel replicates the slot-0 draw across time.
class ChannelSet {
 public:
  ChannelSet(const SystemConfig& config, int slots);

  const SystemConfig& config() const { return config_; }
  int slots() const { return slots_; }

  // 1-based receiver/transmitter ids, 0-based slot.
  const Matrix& at(int k, int j, int t) const;
  Matrix& at(int k, int j, int t);

 private:
  SystemConfig config_;
  int slots_;
  std::vector<Matrix> entries_;
};

ChannelSet sample_channels(const SystemConfig& config, int slots);

// Fresh draw for every direct channel H[kk](t), all cross channels untouched.
// Distinct salts give distinct redraws.
ChannelSet resample_direct_channels(const ChannelSet& base, std::uint64_t salt);

// mu-symbol extension starting at extended slot t: matrices[(k,j)] is
// (N*mu) x (M*mu), block-diagonal with block b equal to the base channel at
// slot mu*t + b. Off-block entries are exactly zero.
struct ExtendedChannel {
  int users = 0;
  int tx_antennas = 0;
  int rx_antennas = 0;
  int mu = 1;
  std::vector<Matrix> matrices;

  const Matrix& at(int k, int j) const;
};

ExtendedChannel extend_channel(const ChannelSet& channels, int mu, int t);

}  // namespace ia
