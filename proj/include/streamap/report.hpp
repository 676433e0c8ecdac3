// Copyright 2026 The streamap Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STREAMAP_REPORT_HPP_
#define STREAMAP_REPORT_HPP_

#include <cstdio>
#include <sstream>
#include <string>

#include "streamap/coco_io.hpp"
#include "streamap/evaluator.hpp"

namespace streamap {

// Run report. `timing` is the only field outside the determinism contract.
inline Json report_json(const std::string& mode, const EvalResult& r, const Json& config_echo,
                        const Json& timing = Json::object()) {
  Json per_class = Json::object();
  for (const auto& [cid, ap] : r.per_class) per_class[std::to_string(cid)] = ap;
  return {{"mode", mode},
          {"ap", r.ap},
          {"ap50", r.ap50},
          {"ap75", r.ap75},
          {"ap_small", r.ap_small},
          {"ap_medium", r.ap_medium},
          {"ap_large", r.ap_large},
          {"ap_per_threshold", r.ap_per_threshold},
          {"per_class", per_class},
          {"config_echo", config_echo},
          {"timing", timing}};
}

inline Json config_echo(const EvalConfig& cfg) {
  return {{"iou_thresholds", cfg.iou_thresholds},
          {"recall_points", cfg.recall_points},
          {"max_dets", cfg.max_dets}};
}

// Long-form PR curves: category_id,iou_threshold,recall,precision
inline std::string pr_curves_csv(const EvalResult& r, const EvalConfig& cfg) {
  std::ostringstream out;
  out << "category_id,iou_threshold,recall,precision\n";
  char buf[64];
  for (const auto& [key, q] : r.pr_curves) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double recall = static_cast<double>(i) / static_cast<double>(q.size() - 1);
      std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.17g", cfg.iou_thresholds[key.second], recall,
                    q[i]);
      out << key.first << ',' << buf << '\n';
    }
  }
  return out.str();
}

}  // namespace streamap

#endif  // STREAMAP_REPORT_HPP_
