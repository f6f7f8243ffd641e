// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>

namespace ia {

// Counter-mode hashed randomness: the value drawn for a given
// (seed, index...) tuple never depends on how many draws happened before it,
// so parallel and sequential generation produce identical data.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t word(std::initializer_list<std::uint64_t> indices) const {
    std::uint64_t h = mix(seed_ ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t v : indices) h = mix(h ^ v);
    return h;
  }

  // Uniform in [0, 1) with 53 random bits.
  double unit(std::initializer_list<std::uint64_t> indices) const {
    return static_cast<double>(word(indices) >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
};

// Stream tags keep independent draws (channel entries, precoder fill-ins,
// direct-channel resampling) on disjoint counter ranges.
namespace stream {
constexpr std::uint64_t kChannelMagnitude = 0xC0;
constexpr std::uint64_t kChannelPhase = 0xC1;
constexpr std::uint64_t kDirectMagnitude = 0xC2;
constexpr std::uint64_t kDirectPhase = 0xC3;
constexpr std::uint64_t kPrecoderMagnitude = 0xB0;
constexpr std::uint64_t kPrecoderPhase = 0xB1;
}  // namespace stream

}  // namespace ia
