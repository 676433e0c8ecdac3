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

#ifndef STREAMAP_DATA_MODEL_HPP_
#define STREAMAP_DATA_MODEL_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "streamap/error.hpp"
#include "streamap/geometry.hpp"

namespace streamap {

using ImageId = std::int64_t;
using CategoryId = std::int64_t;
using AnnotationId = std::int64_t;
using SequenceId = std::int64_t;

inline constexpr double kDefaultFps = 30.0;

struct FrameRecord {
  ImageId image_id = 0;
  SequenceId sequence_id = 0;
  std::int64_t frame_index = 0;
  double timestamp = 0.0;  // seconds on the stream clock
  int width = 0;
  int height = 0;
  std::string file_name;
  std::string source;  // namespace assigned by merge(); empty otherwise
};

struct GtAnnotation {
  AnnotationId ann_id = 0;
  ImageId image_id = 0;
  CategoryId category_id = 0;
  BBox bbox;
  double area = 0.0;
};

// A scored prediction in COCO results form.
struct Detection {
  ImageId image_id = 0;
  CategoryId category_id = 0;
  BBox bbox;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

using DetectionMap = std::map<ImageId, std::vector<Detection>>;

struct Dataset {
  std::vector<FrameRecord> images;
  std::vector<GtAnnotation> annotations;
  std::map<CategoryId, std::string> categories;
};

// The eight driving classes, ids 0..7 in alphabetical order.
inline std::map<CategoryId, std::string> canonical_categories() {
  return {{0, "bicycle"}, {1, "bus"},          {2, "car"},
          {3, "motorcycle"}, {4, "person"},    {5, "stop sign"},
          {6, "traffic light"}, {7, "truck"}};
}

// Checks referential integrity; throws kIntegrity on the first violation.
inline void validate(const Dataset& d) {
  std::unordered_set<ImageId> ids;
  for (const auto& im : d.images) {
    require(ids.insert(im.image_id).second, ErrorKind::kIntegrity,
            "duplicate image id " + std::to_string(im.image_id));
    require(im.width > 0 && im.height > 0, ErrorKind::kIntegrity,
            "image " + std::to_string(im.image_id) + " has nonpositive size");
    require(im.frame_index >= 0, ErrorKind::kIntegrity,
            "image " + std::to_string(im.image_id) + " has negative frame index");
  }
  for (const auto& a : d.annotations) {
    require(ids.count(a.image_id) > 0, ErrorKind::kIntegrity,
            "annotation " + std::to_string(a.ann_id) + " references unknown image " +
                std::to_string(a.image_id));
    require(d.categories.count(a.category_id) > 0, ErrorKind::kIntegrity,
            "annotation " + std::to_string(a.ann_id) + " references unknown category " +
                std::to_string(a.category_id));
    require(a.bbox.valid(), ErrorKind::kIntegrity,
            "annotation " + std::to_string(a.ann_id) + " has an invalid box");
  }
}

// Annotations grouped by image id, preserving file order within an image.
inline std::unordered_map<ImageId, std::vector<const GtAnnotation*>> annotations_by_image(
    const Dataset& d) {
  std::unordered_map<ImageId, std::vector<const GtAnnotation*>> out;
  for (const auto& a : d.annotations) out[a.image_id].push_back(&a);
  return out;
}

// Keeps frames whose index is a multiple of `stride`, per sequence.
inline Dataset subsample_stride(const Dataset& d, std::int64_t stride) {
  require(stride >= 1, ErrorKind::kInvalidArgument, "subsample_stride: stride must be >= 1");
  Dataset out;
  out.categories = d.categories;
  std::unordered_set<ImageId> kept;
  for (const auto& im : d.images) {
    if (im.frame_index % stride == 0) {
      out.images.push_back(im);
      kept.insert(im.image_id);
    }
  }
  for (const auto& a : d.annotations) {
    if (kept.count(a.image_id)) out.annotations.push_back(a);
  }
  return out;
}

struct NamedDataset {
  std::string source;
  Dataset data;
};

// (source, source category id) -> unified category id
using ClassMap = std::map<std::pair<std::string, CategoryId>, CategoryId>;

// Concatenates datasets into the unified category space. Image, annotation
// and sequence ids are renumbered from 1 in part order; each frame keeps
// its source name as namespace.
inline Dataset merge(const std::vector<NamedDataset>& parts, const ClassMap& class_map,
                     const std::map<CategoryId, std::string>& unified = canonical_categories()) {
  std::set<std::string> seen_sources;
  for (const auto& p : parts) {
    require(seen_sources.insert(p.source).second, ErrorKind::kIntegrity,
            "merge: namespace collision on source '" + p.source + "'");
  }
  for (const auto& [key, to] : class_map) {
    require(unified.count(to) > 0, ErrorKind::kIntegrity,
            "merge: class map targets unknown unified category " + std::to_string(to));
  }

  Dataset out;
  out.categories = unified;
  ImageId next_image = 1;
  AnnotationId next_ann = 1;
  SequenceId next_seq = 1;
  for (const auto& p : parts) {
    for (const auto& [cid, name] : p.data.categories) {
      require(class_map.count({p.source, cid}) > 0, ErrorKind::kIntegrity,
              "merge: category " + std::to_string(cid) + " ('" + name + "') of source '" +
                  p.source + "' is unmapped");
    }
    std::unordered_map<ImageId, ImageId> image_remap;
    std::map<SequenceId, SequenceId> seq_remap;
    for (const auto& im : p.data.images) {
      FrameRecord r = im;
      r.image_id = next_image++;
      auto [it, inserted] = seq_remap.try_emplace(im.sequence_id, next_seq);
      if (inserted) ++next_seq;
      r.sequence_id = it->second;
      r.source = p.source;
      image_remap.emplace(im.image_id, r.image_id);
      out.images.push_back(std::move(r));
    }
    for (const auto& a : p.data.annotations) {
      auto mapped = class_map.find({p.source, a.category_id});
      require(mapped != class_map.end(), ErrorKind::kIntegrity,
              "merge: annotation category " + std::to_string(a.category_id) + " of source '" +
                  p.source + "' is unmapped");
      auto img = image_remap.find(a.image_id);
      require(img != image_remap.end(), ErrorKind::kIntegrity,
              "merge: dangling image reference in source '" + p.source + "'");
      GtAnnotation r = a;
      r.ann_id = next_ann++;
      r.image_id = img->second;
      r.category_id = mapped->second;
      out.annotations.push_back(r);
    }
  }
  return out;
}

using ClassHistogram = std::map<CategoryId, std::int64_t>;

inline ClassHistogram class_histogram(const Dataset& d) {
  ClassHistogram h;
  for (const auto& [cid, name] : d.categories) h[cid] = 0;
  for (const auto& a : d.annotations) ++h[a.category_id];
  return h;
}

namespace detail {
inline void require_positive_counts(const ClassHistogram& h, const char* op) {
  require(!h.empty(), ErrorKind::kInvalidArgument, std::string(op) + ": empty histogram");
  for (const auto& [cid, n] : h) {
    require(n > 0, ErrorKind::kInvalidArgument,
            std::string(op) + ": category " + std::to_string(cid) + " has zero count");
  }
}
}  // namespace detail

// Class selection probabilities proportional to 1 / count.
inline std::map<CategoryId, double> inverse_freq_sample_weights(const ClassHistogram& h) {
  detail::require_positive_counts(h, "inverse_freq_sample_weights");
  double norm = 0.0;
  for (const auto& [cid, n] : h) norm += 1.0 / static_cast<double>(n);
  std::map<CategoryId, double> w;
  for (const auto& [cid, n] : h) w[cid] = (1.0 / static_cast<double>(n)) / norm;
  return w;
}

// Per-class loss multipliers N / (C * n_c); every class then contributes
// the same total weight N / C.
inline std::map<CategoryId, double> class_loss_weights(const ClassHistogram& h) {
  detail::require_positive_counts(h, "class_loss_weights");
  double total = 0.0;
  for (const auto& [cid, n] : h) total += static_cast<double>(n);
  const double classes = static_cast<double>(h.size());
  std::map<CategoryId, double> w;
  for (const auto& [cid, n] : h) w[cid] = total / (classes * static_cast<double>(n));
  return w;
}

// Per-image sampling weight: the sum of the class weights of its
// annotations. Images without annotations get weight 0.
inline std::map<ImageId, double> image_sample_weights(
    const Dataset& d, const std::map<CategoryId, double>& class_weights) {
  std::map<ImageId, double> w;
  for (const auto& im : d.images) w[im.image_id] = 0.0;
  for (const auto& a : d.annotations) {
    auto it = class_weights.find(a.category_id);
    require(it != class_weights.end(), ErrorKind::kInvalidArgument,
            "image_sample_weights: no weight for category " + std::to_string(a.category_id));
    w[a.image_id] += it->second;
  }
  return w;
}

// Draws `count` image ids with replacement according to `weights`.
inline std::vector<ImageId> resample_images(const std::map<ImageId, double>& weights,
                                            std::size_t count, std::uint64_t seed) {
  std::vector<ImageId> ids;
  std::vector<double> probs;
  for (const auto& [id, w] : weights) {
    ids.push_back(id);
    probs.push_back(w);
  }
  double total = 0.0;
  for (double p : probs) total += p;
  require(total > 0.0, ErrorKind::kInvalidArgument, "resample_images: all weights are zero");
  std::mt19937_64 gen(seed);
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  std::vector<ImageId> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(ids[pick(gen)]);
  return out;
}

}  // namespace streamap

#endif  // STREAMAP_DATA_MODEL_HPP_
