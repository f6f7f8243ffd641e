// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace ia {

struct ReceiverCheck {
  int receiver = 0;
  int streams = 0;             // d_k
  int interference_cols = 0;   // raw interference vector count
  int interference_rank = 0;
  int interference_cap = 0;    // signal-space dim minus d_k
  int desired_rank = 0;
  int joint_rank = 0;
  bool separable = false;  // joint == interference_rank + d_k, desired full
};

struct AlignmentReport {
  std::string scheme;
  std::vector<ReceiverCheck> receivers;
  double svd_eps = 0.0;
  double min_entry_magnitude = 0.0;   // over all precoder entries
  double column_match_residual = -1;  // < 0 when not applicable
  bool pass = false;
  std::string note;
};

nlohmann::json to_json(const ReceiverCheck& c);
nlohmann::json to_json(const AlignmentReport& r);

}  // namespace ia
