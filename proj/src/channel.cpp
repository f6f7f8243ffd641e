// SPDX-License-Identifier: Apache-2.0
#include "ia/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace ia {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Complex draw_entry(const CounterRng& rng, std::uint64_t mag_tag,
                   std::uint64_t phase_tag, std::uint64_t k, std::uint64_t j,
                   std::uint64_t t, std::uint64_t row, std::uint64_t col,
                   double lo, double hi) {
  double r = lo + (hi - lo) * rng.unit({mag_tag, k, j, t, row, col});
  double theta = kTwoPi * rng.unit({phase_tag, k, j, t, row, col});
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

std::string variation_name(Variation v) {
  return v == Variation::constant ? "constant" : "time_varying";
}

Variation variation_from_name(const std::string& name) {
  if (name == "constant") return Variation::constant;
  if (name == "time_varying") return Variation::time_varying;
  throw std::invalid_argument("unknown variation: " + name);
}

int SystemConfig::ratio() const {
  int lo = std::min(tx_antennas, rx_antennas);
  int hi = std::max(tx_antennas, rx_antennas);
  return hi / lo;
}

void SystemConfig::validate() const {
  if (users < 2) throw std::invalid_argument("user count must be >= 2");
  if (tx_antennas < 1 || rx_antennas < 1)
    throw std::invalid_argument("antenna counts must be >= 1");
  if (!(magnitude_lo > 0.0) || !(magnitude_hi > magnitude_lo) ||
      !std::isfinite(magnitude_hi))
    throw std::invalid_argument("need 0 < magnitude_lo < magnitude_hi < inf");
}

ChannelSet::ChannelSet(const SystemConfig& config, int slots)
    : config_(config), slots_(slots) {
  config_.validate();
  if (slots < 1) throw std::invalid_argument("slot count must be >= 1");

  const int K = config_.users;
  const int M = config_.tx_antennas;
  const int N = config_.rx_antennas;
  CounterRng rng(config_.seed);
  entries_.reserve(static_cast<std::size_t>(slots) * K * K);
  for (int t = 0; t < slots; ++t) {
    // A constant channel reuses the slot-0 counter so every slot is
    // bit-identical to the first.
    std::uint64_t ts = config_.variation == Variation::constant
                           ? 0
                           : static_cast<std::uint64_t>(t);
    for (int k = 1; k <= K; ++k) {
      for (int j = 1; j <= K; ++j) {
        Matrix h(N, M);
        for (int r = 0; r < N; ++r)
          for (int c = 0; c < M; ++c)
            h(r, c) = draw_entry(rng, stream::kChannelMagnitude,
                                 stream::kChannelPhase, k, j, ts, r, c,
                                 config_.magnitude_lo, config_.magnitude_hi);
        entries_.push_back(std::move(h));
      }
    }
  }
}

const Matrix& ChannelSet::at(int k, int j, int t) const {
  const int K = config_.users;
  if (k < 1 || k > K || j < 1 || j > K || t < 0 || t >= slots_)
    throw std::out_of_range("channel index out of range");
  return entries_[(static_cast<std::size_t>(t) * K + (k - 1)) * K + (j - 1)];
}

Matrix& ChannelSet::at(int k, int j, int t) {
  return const_cast<Matrix&>(std::as_const(*this).at(k, j, t));
}

ChannelSet sample_channels(const SystemConfig& config, int slots) {
  return ChannelSet(config, slots);
}

ChannelSet resample_direct_channels(const ChannelSet& base,
                                    std::uint64_t salt) {
  ChannelSet out = base;
  const SystemConfig& cfg = base.config();
  CounterRng rng(cfg.seed);
  for (int t = 0; t < base.slots(); ++t) {
    std::uint64_t ts = cfg.variation == Variation::constant
                           ? 0
                           : static_cast<std::uint64_t>(t);
    for (int k = 1; k <= cfg.users; ++k) {
      Matrix& h = out.at(k, k, t);
      for (int r = 0; r < h.rows(); ++r)
        for (int c = 0; c < h.cols(); ++c)
          h(r, c) = draw_entry(rng, stream::kDirectMagnitude ^ (salt << 8),
                               stream::kDirectPhase ^ (salt << 8), k, k, ts, r,
                               c, cfg.magnitude_lo, cfg.magnitude_hi);
    }
  }
  return out;
}

const Matrix& ExtendedChannel::at(int k, int j) const {
  if (k < 1 || k > users || j < 1 || j > users)
    throw std::out_of_range("extended channel index out of range");
  return matrices[static_cast<std::size_t>(k - 1) * users + (j - 1)];
}

ExtendedChannel extend_channel(const ChannelSet& channels, int mu, int t) {
  if (mu < 1) throw std::invalid_argument("extension length must be >= 1");
  const SystemConfig& cfg = channels.config();
  if (static_cast<long long>(mu) * (t + 1) > channels.slots())
    throw std::invalid_argument("channel set has too few slots for extension");

  ExtendedChannel ext;
  ext.users = cfg.users;
  ext.tx_antennas = cfg.tx_antennas;
  ext.rx_antennas = cfg.rx_antennas;
  ext.mu = mu;
  const int M = cfg.tx_antennas;
  const int N = cfg.rx_antennas;
  ext.matrices.reserve(static_cast<std::size_t>(cfg.users) * cfg.users);
  for (int k = 1; k <= cfg.users; ++k) {
    for (int j = 1; j <= cfg.users; ++j) {
      Matrix big = Matrix::Zero(static_cast<Eigen::Index>(N) * mu,
                                static_cast<Eigen::Index>(M) * mu);
      for (int b = 0; b < mu; ++b)
        big.block(static_cast<Eigen::Index>(N) * b,
                  static_cast<Eigen::Index>(M) * b, N, M) =
            channels.at(k, j, mu * t + b);
      ext.matrices.push_back(std::move(big));
    }
  }
  return ext;
}

}  // namespace ia
