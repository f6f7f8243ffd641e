// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ia/numeric.hpp"
#include "ia/zf_evaluator.hpp"

namespace iadof {

// Resolved command-line settings; flags override config-file values, and a
// populated struct round-trips through JSON without loss.
struct RunConfig {
  std::string command;
  int users = 0;
  int tx_antennas = 0;
  int rx_antennas = 0;
  int ratio = 0;
  int order = 1;
  std::string scheme;
  std::uint64_t seed = 1;
  long long mu_cap = 4096;
  double tolerance = ia::kDefaultSvdEps;
  bool numeric = false;
  bool no_timestamp = false;
  std::string out;
  std::string format = "json";
  std::vector<double> snr_grid = ia::default_snr_grid();

  bool operator==(const RunConfig&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    RunConfig, command, users, tx_antennas, rx_antennas, ratio, order, scheme,
    seed, mu_cap, tolerance, numeric, no_timestamp, out, format, snr_grid)

}  // namespace iadof
