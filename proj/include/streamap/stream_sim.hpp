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

#ifndef STREAMAP_STREAM_SIM_HPP_
#define STREAMAP_STREAM_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "streamap/coco_io.hpp"
#include "streamap/data_model.hpp"
#include "streamap/error.hpp"
#include "streamap/random.hpp"

namespace streamap {

// Arrival comparisons on the stream clock use this absolute slack.
inline constexpr double kTimeTolerance = 1e-9;

enum class SchedulePolicy { kLatestBlocking, kEveryFrameQueue };

struct StreamConfig {
  double fps = kDefaultFps;
  std::int64_t frame_count = 1;
  SchedulePolicy policy = SchedulePolicy::kLatestBlocking;
};

struct ConstantLatency {
  double seconds = 0.0;
};

struct TraceLatency {
  std::unordered_map<ImageId, double> seconds;
};

struct LognormalLatency {
  double mu = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

using LatencyModel = std::variant<ConstantLatency, TraceLatency, LognormalLatency>;

struct PredictionSnapshot {
  ImageId source_image_id = 0;
  SequenceId sequence_id = 0;
  std::int64_t source_frame_index = 0;
  double start_time = 0.0;
  double emission_time = 0.0;
  std::vector<Detection> detections;
};

struct PredictionTimeline {
  std::vector<PredictionSnapshot> snapshots;
  StreamConfig config;
};

inline double frame_time(std::int64_t index, double fps) {
  return static_cast<double>(index) / fps;
}

inline double sample_latency(const LatencyModel& m, ImageId image_id, std::uint64_t draw_index) {
  struct Visitor {
    ImageId image_id;
    std::uint64_t draw_index;
    double operator()(const ConstantLatency& c) const { return c.seconds; }
    double operator()(const TraceLatency& t) const {
      auto it = t.seconds.find(image_id);
      require(it != t.seconds.end(), ErrorKind::kInvalidArgument,
              "latency trace has no entry for image " + std::to_string(image_id));
      return it->second;
    }
    double operator()(const LognormalLatency& l) const {
      return std::exp(l.mu + l.sigma * counter_normal(l.seed, draw_index));
    }
  };
  return std::visit(Visitor{image_id, draw_index}, m);
}

namespace detail {

inline double checked_latency(const LatencyModel& m, ImageId id, std::uint64_t draw) {
  const double lat = sample_latency(m, id, draw);
  const bool zero_ok = std::holds_alternative<ConstantLatency>(m);
  require(std::isfinite(lat) && (lat > 0.0 || (zero_ok && lat == 0.0)),
          ErrorKind::kInvalidArgument,
          "latency for image " + std::to_string(id) + " must be positive");
  return lat;
}

}  // namespace detail

// Runs one stream through a single detector. `frames` must belong to one
// sequence and be ordered by frame_index. `first_draw` offsets the latency
// draw counter so several sequences can share one stochastic model.
inline PredictionTimeline simulate(std::span<const FrameRecord> frames,
                                   const DetectionMap& per_frame_detections,
                                   const LatencyModel& m, const StreamConfig& cfg,
                                   std::uint64_t first_draw = 0) {
  require(!frames.empty(), ErrorKind::kInvalidArgument, "simulate: empty frame list");
  require(cfg.fps > 0.0, ErrorKind::kInvalidArgument, "simulate: fps must be positive");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    require(frames[i].frame_index > frames[i - 1].frame_index, ErrorKind::kInvalidArgument,
            "simulate: frames must be strictly ordered by frame_index");
  }

  std::vector<double> arrival(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    arrival[i] = frame_time(frames[i].frame_index, cfg.fps);
  }

  PredictionTimeline tl;
  tl.config = cfg;
  tl.config.frame_count = static_cast<std::int64_t>(frames.size());
  std::uint64_t draw = first_draw;

  auto emit = [&](std::size_t k, double start) {
    const double lat = detail::checked_latency(m, frames[k].image_id, draw++);
    PredictionSnapshot s;
    s.source_image_id = frames[k].image_id;
    s.sequence_id = frames[k].sequence_id;
    s.source_frame_index = frames[k].frame_index;
    s.start_time = start;
    s.emission_time = start + lat;
    if (auto it = per_frame_detections.find(frames[k].image_id); it != per_frame_detections.end()) {
      s.detections = it->second;
    }
    tl.snapshots.push_back(std::move(s));
    return tl.snapshots.back().emission_time;
  };

  if (cfg.policy == SchedulePolicy::kEveryFrameQueue) {
    double busy_until = arrival[0];
    for (std::size_t k = 0; k < frames.size(); ++k) {
      busy_until = emit(k, std::max(arrival[k], busy_until));
    }
    return tl;
  }

  // Work finishing after the stream has ended starts nothing new.
  const double stream_end = arrival.back() + 1.0 / cfg.fps;
  std::size_t k = 0;
  double start = arrival[0];
  while (true) {
    const double done = emit(k, start);
    if (done >= stream_end - kTimeTolerance) break;
    // Newest frame that has arrived by `done` (closed comparison).
    const auto newest = static_cast<std::size_t>(
        std::upper_bound(arrival.begin(), arrival.end(), done + kTimeTolerance) -
        arrival.begin());
    if (newest >= 1 && newest - 1 > k) {
      k = newest - 1;
      start = done;
    } else if (k + 1 < frames.size()) {
      ++k;
      start = arrival[k];
    } else {
      break;
    }
  }
  return tl;
}

// Simulates every sequence of `d` independently (sequences in ascending id
// order, latency draws numbered consecutively) and merges the snapshots by
// emission time.
inline PredictionTimeline simulate_dataset(const Dataset& d, const DetectionMap& dets,
                                           const LatencyModel& m, const StreamConfig& cfg) {
  std::map<SequenceId, std::vector<FrameRecord>> sequences;
  for (const auto& im : d.images) sequences[im.sequence_id].push_back(im);
  require(!sequences.empty(), ErrorKind::kInvalidArgument, "simulate: empty frame list");

  PredictionTimeline out;
  out.config = cfg;
  out.config.frame_count = static_cast<std::int64_t>(d.images.size());
  std::uint64_t draw = 0;
  for (auto& [sid, frames] : sequences) {
    std::stable_sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) {
      return a.frame_index < b.frame_index;
    });
    auto tl = simulate(frames, dets, m, cfg, draw);
    draw += tl.snapshots.size();
    for (auto& s : tl.snapshots) out.snapshots.push_back(std::move(s));
  }
  std::stable_sort(out.snapshots.begin(), out.snapshots.end(),
                   [](const auto& a, const auto& b) { return a.emission_time < b.emission_time; });
  return out;
}

// Latency trace CSV with header `image_id,latency_seconds`.
inline TraceLatency parse_latency_trace(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::kMalformedInput,
          "latency trace: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "image_id,latency_seconds", ErrorKind::kMalformedInput,
          "latency trace: expected header 'image_id,latency_seconds'");
  TraceLatency t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorKind::kMalformedInput,
            "latency trace line " + std::to_string(lineno) + ": expected two fields");
    try {
      std::size_t used = 0;
      const ImageId id = std::stoll(line.substr(0, comma), &used);
      const std::string lat_text = line.substr(comma + 1);
      const double lat = std::stod(lat_text, &used);
      require(used == lat_text.size(), ErrorKind::kMalformedInput,
              "latency trace line " + std::to_string(lineno) + ": trailing characters");
      t.seconds[id] = lat;
    } catch (const std::logic_error&) {
      fail(ErrorKind::kMalformedInput,
           "latency trace line " + std::to_string(lineno) + ": not a number");
    }
  }
  return t;
}

inline TraceLatency load_latency_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kMalformedInput, "cannot open " + path.string());
  return parse_latency_trace(in);
}

inline Json to_json(const PredictionTimeline& tl) {
  Json arr = Json::array();
  for (const auto& s : tl.snapshots) {
    Json dets = Json::array();
    for (const auto& det : s.detections) dets.push_back(detection_to_json(det));
    arr.push_back({{"source_image_id", s.source_image_id},
                   {"sequence_id", s.sequence_id},
                   {"source_frame_index", s.source_frame_index},
                   {"start_time", s.start_time},
                   {"emission_time", s.emission_time},
                   {"detections", std::move(dets)}});
  }
  return arr;
}

// Reads a timeline dump. Sequence and frame index fields are optional;
// pairing resolves them from the ground truth when absent.
inline PredictionTimeline parse_timeline(const Json& j, double fps = kDefaultFps) {
  require(j.is_array(), ErrorKind::kMalformedInput, "timeline must be a JSON array");
  PredictionTimeline tl;
  tl.config.fps = fps;
  for (const auto& e : j) {
    PredictionSnapshot s;
    s.source_image_id = detail::field<ImageId>(e, "source_image_id", "snapshot");
    s.sequence_id = e.contains("sequence_id") ? detail::field<SequenceId>(e, "sequence_id", "snapshot")
                                              : -1;
    s.source_frame_index =
        e.contains("source_frame_index")
            ? detail::field<std::int64_t>(e, "source_frame_index", "snapshot")
            : -1;
    s.start_time = detail::field<double>(e, "start_time", "snapshot");
    s.emission_time = detail::field<double>(e, "emission_time", "snapshot");
    require(s.emission_time >= s.start_time, ErrorKind::kMalformedInput,
            "snapshot emitted before it started");
    if (e.contains("detections")) {
      for (const auto& dj : e.at("detections")) s.detections.push_back(parse_detection(dj));
    }
    tl.snapshots.push_back(std::move(s));
  }
  tl.config.frame_count = static_cast<std::int64_t>(tl.snapshots.size());
  return tl;
}

}  // namespace streamap

#endif  // STREAMAP_STREAM_SIM_HPP_
