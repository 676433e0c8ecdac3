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

#ifndef STREAMAP_SCENARIO_HPP_
#define STREAMAP_SCENARIO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "streamap/coco_io.hpp"
#include "streamap/data_model.hpp"
#include "streamap/error.hpp"
#include "streamap/stream_sim.hpp"

namespace streamap {

// Synthetic single-sequence stream of objects in linear motion.
struct SynthConfig {
  int objects = 3;
  int frames = 60;
  double fps = kDefaultFps;
  int width = 1920;
  int height = 1200;
  std::pair<double, double> velocity_x{0.0, 0.0};  // px/frame, uniform in [lo, hi]
  std::pair<double, double> velocity_y{0.0, 0.0};
  std::pair<double, double> box_size{24.0, 200.0};
  std::uint64_t seed = 0;
};

struct Trajectory {
  int track_id = 0;
  CategoryId category_id = 0;
  BBox initial;
  double vx = 0.0;
  double vy = 0.0;

  BBox at(std::int64_t frame) const {
    const auto f = static_cast<double>(frame);
    return {initial.x + vx * f, initial.y + vy * f, initial.w, initial.h};
  }
};

struct Scenario {
  SynthConfig config;
  Dataset gt;
  DetectionMap perfect_dets;
  DetectionMap degraded_dets;
  std::vector<Trajectory> tracks;
};

namespace detail {
inline double uniform_in(std::mt19937_64& gen, std::pair<double, double> range) {
  if (range.first == range.second) return range.first;
  return std::uniform_real_distribution<double>(range.first, range.second)(gen);
}
}  // namespace detail

inline Scenario synthesize(const SynthConfig& cfg) {
  require(cfg.objects >= 0 && cfg.frames >= 1 && cfg.fps > 0.0 && cfg.width > 0 &&
              cfg.height > 0,
          ErrorKind::kInvalidArgument, "synth: object/frame counts, fps and size must be valid");
  require(cfg.velocity_x.first <= cfg.velocity_x.second &&
              cfg.velocity_y.first <= cfg.velocity_y.second &&
              cfg.box_size.first > 0.0 && cfg.box_size.first <= cfg.box_size.second,
          ErrorKind::kInvalidArgument, "synth: ranges must be ordered and sizes positive");

  Scenario sc;
  sc.config = cfg;
  sc.gt.categories = canonical_categories();
  std::mt19937_64 gen(cfg.seed);
  const double span = static_cast<double>(cfg.frames - 1);
  std::uniform_int_distribution<CategoryId> pick_class(0, 7);

  for (int t = 0; t < cfg.objects; ++t) {
    Trajectory tr;
    tr.track_id = t + 1;
    tr.category_id = pick_class(gen);
    tr.vx = detail::uniform_in(gen, cfg.velocity_x);
    tr.vy = detail::uniform_in(gen, cfg.velocity_y);
    tr.initial.w = std::round(detail::uniform_in(gen, cfg.box_size));
    tr.initial.h = std::round(detail::uniform_in(gen, cfg.box_size));
    // Keep the whole trajectory inside the frame.
    const double lo_x = std::max(0.0, -tr.vx * span);
    const double hi_x = cfg.width - tr.initial.w - std::max(0.0, tr.vx * span);
    const double lo_y = std::max(0.0, -tr.vy * span);
    const double hi_y = cfg.height - tr.initial.h - std::max(0.0, tr.vy * span);
    require(lo_x <= hi_x && lo_y <= hi_y, ErrorKind::kInvalidArgument,
            "synth: velocity too large to keep object " + std::to_string(tr.track_id) +
                " in frame");
    tr.initial.x = std::floor(detail::uniform_in(gen, {lo_x, hi_x}));
    tr.initial.y = std::floor(detail::uniform_in(gen, {lo_y, hi_y}));
    tr.initial.x = std::max(tr.initial.x, lo_x);
    tr.initial.y = std::max(tr.initial.y, lo_y);
    sc.tracks.push_back(tr);
  }

  std::mt19937_64 noise(cfg.seed ^ 0x5eedf00dULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  AnnotationId ann = 1;
  for (int f = 0; f < cfg.frames; ++f) {
    FrameRecord r;
    r.image_id = f + 1;
    r.sequence_id = 1;
    r.frame_index = f;
    r.timestamp = frame_time(f, cfg.fps);
    r.width = cfg.width;
    r.height = cfg.height;
    r.file_name = "frame_" + std::to_string(f) + ".jpg";
    sc.gt.images.push_back(r);
    auto& perfect = sc.perfect_dets[r.image_id];
    auto& degraded = sc.degraded_dets[r.image_id];
    for (const auto& tr : sc.tracks) {
      const BBox b = tr.at(f);
      sc.gt.annotations.push_back({ann++, r.image_id, tr.category_id, b, area(b)});
      perfect.push_back({r.image_id, tr.category_id, b, 1.0});
      if (unit(noise) < 0.1) continue;  // missed detection
      BBox nb{b.x + 0.05 * b.w * jitter(noise), b.y + 0.05 * b.h * jitter(noise),
              b.w * (1.0 + 0.05 * jitter(noise)), b.h * (1.0 + 0.05 * jitter(noise))};
      nb = clip(nb, 0.0, 0.0, cfg.width, cfg.height);
      degraded.push_back({r.image_id, tr.category_id, nb, 0.3 + 0.7 * unit(noise)});
    }
    if (unit(noise) < 0.2) {
      const double w = 20.0 + 100.0 * unit(noise);
      const double h = 20.0 + 100.0 * unit(noise);
      BBox fp{unit(noise) * (cfg.width - w), unit(noise) * (cfg.height - h), w, h};
      degraded.push_back({r.image_id, pick_class(noise), fp, 0.5 * unit(noise)});
    }
  }
  return sc;
}

inline Json trajectories_json(const Scenario& sc) {
  Json tracks = Json::array();
  for (const auto& t : sc.tracks) {
    tracks.push_back({{"track_id", t.track_id},
                      {"category_id", t.category_id},
                      {"initial_bbox", bbox_to_json(t.initial)},
                      {"velocity", {t.vx, t.vy}}});
  }
  const auto& c = sc.config;
  return {{"seed", c.seed},
          {"objects", c.objects},
          {"frames", c.frames},
          {"fps", c.fps},
          {"width", c.width},
          {"height", c.height},
          {"velocity_x", {c.velocity_x.first, c.velocity_x.second}},
          {"velocity_y", {c.velocity_y.first, c.velocity_y.second}},
          {"tracks", tracks}};
}

}  // namespace streamap

#endif  // STREAMAP_SCENARIO_HPP_
