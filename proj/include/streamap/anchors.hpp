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

#ifndef STREAMAP_ANCHORS_HPP_
#define STREAMAP_ANCHORS_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "streamap/error.hpp"
#include "streamap/geometry.hpp"

namespace streamap {

struct AnchorSize {
  double w = 0.0;
  double h = 0.0;
  friend bool operator==(const AnchorSize&, const AnchorSize&) = default;
  friend auto operator<=>(const AnchorSize&, const AnchorSize&) = default;
};

struct AnchorSet {
  std::vector<AnchorSize> anchors;  // ascending area
  double mean_distance = 0.0;       // final mean (1 - IoU) objective
  std::vector<double> objective_history;
};

// IoU of two boxes sharing a center.
inline double concentric_iou(const AnchorSize& a, const AnchorSize& b) {
  const double inter = std::min(a.w, b.w) * std::min(a.h, b.h);
  return inter / (a.w * a.h + b.w * b.h - inter);
}

inline double anchor_distance(const AnchorSize& a, const AnchorSize& b) {
  return 1.0 - concentric_iou(a, b);
}

namespace detail {

inline std::size_t nearest_anchor(const AnchorSize& s, const std::vector<AnchorSize>& cs) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cs.size(); ++c) {
    const double d = anchor_distance(s, cs[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline double cluster_cost(std::span<const AnchorSize> members, const AnchorSize& c) {
  double sum = 0.0;
  for (const auto& m : members) sum += anchor_distance(m, c);
  return sum;
}

}  // namespace detail

// k-means over box shapes with 1 - IoU distance. Seeding picks one distinct
// shape from `seed`, then repeatedly the shape farthest from the chosen set.
// A centroid update is only accepted when it does not raise its cluster's
// cost, so the objective never increases.
inline AnchorSet cluster_anchors(std::span<const BBox> boxes, std::size_t k,
                                 std::uint64_t seed, int max_iterations = 300) {
  require(k > 0, ErrorKind::kInvalidArgument, "cluster_anchors: k must be positive");
  std::vector<AnchorSize> shapes;
  shapes.reserve(boxes.size());
  for (const auto& b : boxes) {
    require(b.w > 0.0 && b.h > 0.0, ErrorKind::kInvalidArgument,
            "cluster_anchors: boxes must have positive area");
    shapes.push_back({b.w, b.h});
  }
  std::vector<AnchorSize> distinct = shapes;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  require(k <= distinct.size(), ErrorKind::kInvalidArgument,
          "cluster_anchors: k exceeds the number of distinct box sizes");

  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> first(0, distinct.size() - 1);
  std::vector<AnchorSize> centroids{distinct[first(gen)]};
  std::vector<double> min_d(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    min_d[i] = anchor_distance(distinct[i], centroids[0]);
  }
  while (centroids.size() < k) {
    const auto far = static_cast<std::size_t>(
        std::max_element(min_d.begin(), min_d.end()) - min_d.begin());
    centroids.push_back(distinct[far]);
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      min_d[i] = std::min(min_d[i], anchor_distance(distinct[i], distinct[far]));
    }
  }

  auto objective = [&](const std::vector<AnchorSize>& cs) {
    double sum = 0.0;
    for (const auto& s : shapes) sum += anchor_distance(s, cs[detail::nearest_anchor(s, cs)]);
    return sum / static_cast<double>(shapes.size());
  };

  AnchorSet out;
  out.objective_history.push_back(objective(centroids));
  std::vector<std::vector<AnchorSize>> members(k);
  for (int it = 0; it < max_iterations; ++it) {
    for (auto& m : members) m.clear();
    for (const auto& s : shapes) members[detail::nearest_anchor(s, centroids)].push_back(s);

    bool moved = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c].empty()) continue;
      AnchorSize mean{0.0, 0.0};
      for (const auto& m : members[c]) {
        mean.w += m.w;
        mean.h += m.h;
      }
      mean.w /= static_cast<double>(members[c].size());
      mean.h /= static_cast<double>(members[c].size());
      if (mean == centroids[c]) continue;
      if (detail::cluster_cost(members[c], mean) < detail::cluster_cost(members[c], centroids[c])) {
        centroids[c] = mean;
        moved = true;
      }
    }
    out.objective_history.push_back(objective(centroids));
    if (!moved) break;
  }

  out.mean_distance = out.objective_history.back();
  out.anchors = std::move(centroids);
  std::stable_sort(out.anchors.begin(), out.anchors.end(),
                   [](const AnchorSize& a, const AnchorSize& b) { return a.w * a.h < b.w * b.h; });
  return out;
}

}  // namespace streamap

#endif  // STREAMAP_ANCHORS_HPP_
