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

#ifndef STREAMAP_EVALUATOR_HPP_
#define STREAMAP_EVALUATOR_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "streamap/data_model.hpp"
#include "streamap/error.hpp"
#include "streamap/geometry.hpp"
#include "streamap/stream_sim.hpp"

namespace streamap {

// COCO-style evaluation over (frame, ground truth, detections) triples.
//
// Matching follows the reference COCO evaluator: per image and class the
// detections are ranked by score (stable), capped at max_dets, and each is
// greedily assigned to the unmatched ground truth with the highest IoU at or
// above the threshold. Ground truth outside the area stratum is ignored; a
// detection matched to ignored ground truth, or unmatched and itself outside
// the stratum, is neither a true nor a false positive. Precision is made
// monotone and sampled at evenly spaced recall points.

inline constexpr double kNoGroundTruth = -1.0;

enum class AreaRange { kAll = 0, kSmall = 1, kMedium = 2, kLarge = 3 };
inline constexpr std::array<AreaRange, 4> kAreaRanges = {AreaRange::kAll, AreaRange::kSmall,
                                                         AreaRange::kMedium, AreaRange::kLarge};

inline bool in_range(AreaRange r, double a) {
  switch (r) {
    case AreaRange::kAll:
      return true;
    case AreaRange::kSmall:
      return size_class_of_area(a) == SizeClass::kSmall;
    case AreaRange::kMedium:
      return size_class_of_area(a) == SizeClass::kMedium;
    case AreaRange::kLarge:
      return size_class_of_area(a) == SizeClass::kLarge;
  }
  return false;
}

struct EvalConfig {
  std::vector<double> iou_thresholds = default_iou_thresholds();
  int recall_points = 101;
  int max_dets = 100;

  // 0.50, 0.55, ..., 0.95 as correctly rounded decimals.
  static std::vector<double> default_iou_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back(static_cast<double>(50 + 5 * i) / 100.0);
    return t;
  }

  void validate() const {
    require(!iou_thresholds.empty(), ErrorKind::kInvalidArgument, "no IoU thresholds");
    for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
      const double t = iou_thresholds[i];
      require(t > 0.0 && t <= 1.0, ErrorKind::kInvalidArgument,
              "IoU thresholds must lie in (0, 1]");
      require(i == 0 || t > iou_thresholds[i - 1], ErrorKind::kInvalidArgument,
              "IoU thresholds must be strictly increasing");
    }
    require(recall_points >= 2, ErrorKind::kInvalidArgument, "need at least two recall points");
    require(max_dets >= 1, ErrorKind::kInvalidArgument, "max_dets must be >= 1");
  }
};

struct FramePair {
  FrameRecord frame;
  std::vector<GtAnnotation> gt;
  std::vector<Detection> detections;
  std::optional<ImageId> source_image_id;  // frame the detections came from
};

struct Pairing {
  std::vector<FramePair> frames;
  std::map<CategoryId, std::string> categories;
};

struct EvalResult {
  double ap = kNoGroundTruth;
  double ap50 = kNoGroundTruth;
  double ap75 = kNoGroundTruth;
  double ap_small = kNoGroundTruth;
  double ap_medium = kNoGroundTruth;
  double ap_large = kNoGroundTruth;
  std::vector<double> ap_per_threshold;  // area "all", averaged over classes
  std::map<CategoryId, double> per_class;
  // (category, threshold index) -> interpolated precision at each recall point
  std::map<std::pair<CategoryId, std::size_t>, std::vector<double>> pr_curves;
};

namespace detail {

inline std::vector<const FrameRecord*> frames_in_stream_order(const Dataset& gt) {
  std::vector<const FrameRecord*> order;
  order.reserve(gt.images.size());
  for (const auto& im : gt.images) order.push_back(&im);
  std::stable_sort(order.begin(), order.end(), [](const FrameRecord* a, const FrameRecord* b) {
    if (a->sequence_id != b->sequence_id) return a->sequence_id < b->sequence_id;
    return a->frame_index < b->frame_index;
  });
  return order;
}

inline std::vector<GtAnnotation> gt_of(
    const std::unordered_map<ImageId, std::vector<const GtAnnotation*>>& by_image, ImageId id) {
  std::vector<GtAnnotation> out;
  if (auto it = by_image.find(id); it != by_image.end()) {
    for (const auto* a : it->second) out.push_back(*a);
  }
  return out;
}

}  // namespace detail

// Each ground-truth frame with its own detections; missing entries are empty.
inline Pairing pair_offline(const Dataset& gt, const DetectionMap& dets) {
  Pairing p;
  p.categories = gt.categories;
  const auto by_image = annotations_by_image(gt);
  for (const FrameRecord* f : detail::frames_in_stream_order(gt)) {
    FramePair fp;
    fp.frame = *f;
    fp.gt = detail::gt_of(by_image, f->image_id);
    if (auto it = dets.find(f->image_id); it != dets.end()) {
      fp.detections = it->second;
      fp.source_image_id = f->image_id;
    }
    p.frames.push_back(std::move(fp));
  }
  return p;
}

// Each ground-truth frame at time t with the latest snapshot of its sequence
// emitted at or before t; ties go to the newest source frame. Detections are
// re-attributed to the query frame.
inline Pairing pair_streaming(const Dataset& gt, const PredictionTimeline& timeline) {
  std::unordered_map<ImageId, const FrameRecord*> frame_of;
  for (const auto& im : gt.images) frame_of.emplace(im.image_id, &im);

  struct Entry {
    double emission;
    std::int64_t source_frame;
    const PredictionSnapshot* snap;
  };
  std::map<SequenceId, std::vector<Entry>> by_sequence;
  for (const auto& s : timeline.snapshots) {
    SequenceId sid = s.sequence_id;
    std::int64_t fidx = s.source_frame_index;
    if (sid < 0 || fidx < 0) {
      auto it = frame_of.find(s.source_image_id);
      require(it != frame_of.end(), ErrorKind::kIntegrity,
              "snapshot source image " + std::to_string(s.source_image_id) +
                  " is not in the ground truth");
      if (sid < 0) sid = it->second->sequence_id;
      if (fidx < 0) fidx = it->second->frame_index;
    }
    by_sequence[sid].push_back({s.emission_time, fidx, &s});
  }
  for (auto& [sid, entries] : by_sequence) {
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.emission != b.emission) return a.emission < b.emission;
      return a.source_frame < b.source_frame;
    });
  }

  Pairing p;
  p.categories = gt.categories;
  const auto by_image = annotations_by_image(gt);
  for (const FrameRecord* f : detail::frames_in_stream_order(gt)) {
    FramePair fp;
    fp.frame = *f;
    fp.gt = detail::gt_of(by_image, f->image_id);
    if (auto seq = by_sequence.find(f->sequence_id); seq != by_sequence.end()) {
      const auto& entries = seq->second;
      const double t = f->timestamp + kTimeTolerance;
      auto it = std::upper_bound(entries.begin(), entries.end(), t,
                                 [](double v, const Entry& e) { return v < e.emission; });
      if (it != entries.begin()) {
        const PredictionSnapshot* snap = std::prev(it)->snap;
        fp.source_image_id = snap->source_image_id;
        fp.detections = snap->detections;
        for (auto& d : fp.detections) d.image_id = f->image_id;
      }
    }
    p.frames.push_back(std::move(fp));
  }
  return p;
}

namespace detail {

struct RankedDetection {
  double score;
  bool matched;
  bool ignored;
};

// Fills `q` with interpolated precision at the recall points; returns false
// when the cell has no non-ignored ground truth.
inline bool precision_at_recall(std::vector<RankedDetection> ranked, std::size_t num_gt,
                                int recall_points, std::vector<double>* q) {
  q->assign(static_cast<std::size_t>(recall_points), 0.0);
  if (num_gt == 0) return false;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedDetection& a, const RankedDetection& b) {
                     return a.score > b.score;
                   });
  std::vector<double> recall;
  std::vector<double> precision;
  double tp = 0.0;
  double fp = 0.0;
  for (const auto& r : ranked) {
    if (r.ignored) continue;
    (r.matched ? tp : fp) += 1.0;
    recall.push_back(tp / static_cast<double>(num_gt));
    precision.push_back(tp / (tp + fp));
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  for (int ri = 0; ri < recall_points; ++ri) {
    const double r = static_cast<double>(ri) / static_cast<double>(recall_points - 1);
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it == recall.end()) break;
    (*q)[static_cast<std::size_t>(ri)] =
        precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return true;
}

inline double mean_or_sentinel(const std::vector<double>& v) {
  if (v.empty()) return kNoGroundTruth;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

inline EvalResult coco_ap(const Pairing& pairs, const EvalConfig& cfg = {}) {
  cfg.validate();
  for (const auto& fp : pairs.frames) {
    for (const auto& d : fp.detections) {
      require(pairs.categories.count(d.category_id) > 0, ErrorKind::kInvalidArgument,
              "detection has unknown category id " + std::to_string(d.category_id));
    }
  }

  const std::size_t num_thr = cfg.iou_thresholds.size();
  // cell_ap[area][thr] collects per-class AP for classes with ground truth.
  std::array<std::vector<std::vector<double>>, 4> cell_ap;
  for (auto& a : cell_ap) a.assign(num_thr, {});

  EvalResult result;
  std::map<CategoryId, std::vector<double>> class_cells;

  for (const auto& [cat, name] : pairs.categories) {
    for (AreaRange area_range : kAreaRanges) {
      std::vector<std::vector<detail::RankedDetection>> ranked(num_thr);
      std::size_t num_gt = 0;

      for (const auto& fp : pairs.frames) {
        std::vector<const GtAnnotation*> gts;
        for (const auto& g : fp.gt) {
          if (g.category_id == cat) gts.push_back(&g);
        }
        std::vector<const Detection*> dts;
        for (const auto& d : fp.detections) {
          if (d.category_id == cat) dts.push_back(&d);
        }
        if (gts.empty() && dts.empty()) continue;

        std::vector<char> gt_ignored(gts.size());
        for (std::size_t g = 0; g < gts.size(); ++g) {
          gt_ignored[g] = !in_range(area_range, gts[g]->area);
        }
        // Non-ignored ground truth first.
        std::vector<std::size_t> gorder(gts.size());
        std::iota(gorder.begin(), gorder.end(), 0);
        std::stable_sort(gorder.begin(), gorder.end(), [&](std::size_t a, std::size_t b) {
          return gt_ignored[a] < gt_ignored[b];
        });
        for (std::size_t g = 0; g < gts.size(); ++g) num_gt += gt_ignored[g] ? 0 : 1;

        std::stable_sort(dts.begin(), dts.end(), [](const Detection* a, const Detection* b) {
          return a->score > b->score;
        });
        if (dts.size() > static_cast<std::size_t>(cfg.max_dets)) {
          dts.resize(static_cast<std::size_t>(cfg.max_dets));
        }

        std::vector<std::vector<double>> ious(dts.size(), std::vector<double>(gts.size()));
        for (std::size_t d = 0; d < dts.size(); ++d) {
          for (std::size_t g = 0; g < gts.size(); ++g) ious[d][g] = iou(dts[d]->bbox, gts[g]->bbox);
        }

        for (std::size_t t = 0; t < num_thr; ++t) {
          std::vector<char> gt_taken(gts.size(), 0);
          for (std::size_t d = 0; d < dts.size(); ++d) {
            double best_iou = std::min(cfg.iou_thresholds[t], 1.0 - 1e-10);
            long best = -1;
            for (std::size_t g : gorder) {
              if (gt_taken[g]) continue;
              if (best > -1 && !gt_ignored[static_cast<std::size_t>(best)] && gt_ignored[g]) break;
              if (ious[d][g] < best_iou) continue;
              best_iou = ious[d][g];
              best = static_cast<long>(g);
            }
            detail::RankedDetection r{dts[d]->score, false, false};
            if (best > -1) {
              gt_taken[static_cast<std::size_t>(best)] = 1;
              r.matched = true;
              r.ignored = gt_ignored[static_cast<std::size_t>(best)] != 0;
            } else {
              r.ignored = !in_range(area_range, area(dts[d]->bbox));
            }
            ranked[t].push_back(r);
          }
        }
      }

      for (std::size_t t = 0; t < num_thr; ++t) {
        std::vector<double> q;
        if (!detail::precision_at_recall(std::move(ranked[t]), num_gt, cfg.recall_points, &q)) {
          continue;
        }
        const double cell = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
        cell_ap[static_cast<std::size_t>(area_range)][t].push_back(cell);
        if (area_range == AreaRange::kAll) {
          class_cells[cat].push_back(cell);
          result.pr_curves[{cat, t}] = std::move(q);
        }
      }
    }
  }

  auto pct = [](double v) { return v == kNoGroundTruth ? v : 100.0 * v; };
  auto area_mean = [&](AreaRange a) {
    std::vector<double> all;
    for (const auto& per_thr : cell_ap[static_cast<std::size_t>(a)]) {
      all.insert(all.end(), per_thr.begin(), per_thr.end());
    }
    return pct(detail::mean_or_sentinel(all));
  };

  result.ap = area_mean(AreaRange::kAll);
  result.ap_small = area_mean(AreaRange::kSmall);
  result.ap_medium = area_mean(AreaRange::kMedium);
  result.ap_large = area_mean(AreaRange::kLarge);
  for (std::size_t t = 0; t < num_thr; ++t) {
    const double v = pct(detail::mean_or_sentinel(cell_ap[0][t]));
    result.ap_per_threshold.push_back(v);
    if (std::abs(cfg.iou_thresholds[t] - 0.5) < 1e-12) result.ap50 = v;
    if (std::abs(cfg.iou_thresholds[t] - 0.75) < 1e-12) result.ap75 = v;
  }
  for (const auto& [cat, name] : pairs.categories) {
    auto it = class_cells.find(cat);
    result.per_class[cat] = it == class_cells.end() ? kNoGroundTruth
                                                    : pct(detail::mean_or_sentinel(it->second));
  }
  return result;
}

inline EvalResult offline_ap(const Dataset& gt, const DetectionMap& dets,
                             const EvalConfig& cfg = {}) {
  return coco_ap(pair_offline(gt, dets), cfg);
}

inline EvalResult streaming_ap(const Dataset& gt, const PredictionTimeline& timeline,
                               const EvalConfig& cfg = {}) {
  return coco_ap(pair_streaming(gt, timeline), cfg);
}

}  // namespace streamap

#endif  // STREAMAP_EVALUATOR_HPP_
