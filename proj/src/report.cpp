// SPDX-License-Identifier: Apache-2.0
#include "ia/report.hpp"

namespace ia {

nlohmann::json to_json(const ReceiverCheck& c) {
  return {{"receiver", c.receiver},
          {"streams", c.streams},
          {"interference_cols", c.interference_cols},
          {"interference_rank", c.interference_rank},
          {"interference_cap", c.interference_cap},
          {"desired_rank", c.desired_rank},
          {"joint_rank", c.joint_rank},
          {"separable", c.separable}};
}

nlohmann::json to_json(const AlignmentReport& r) {
  nlohmann::json receivers = nlohmann::json::array();
  for (const auto& c : r.receivers) receivers.push_back(to_json(c));
  nlohmann::json j = {{"scheme", r.scheme},
                      {"receivers", receivers},
                      {"svd_eps", r.svd_eps},
                      {"min_entry_magnitude", r.min_entry_magnitude},
                      {"pass", r.pass}};
  if (r.column_match_residual >= 0)
    j["column_match_residual"] = r.column_match_residual;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace ia
