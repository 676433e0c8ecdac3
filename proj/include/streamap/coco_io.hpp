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

#ifndef STREAMAP_COCO_IO_HPP_
#define STREAMAP_COCO_IO_HPP_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "streamap/data_model.hpp"
#include "streamap/error.hpp"

namespace streamap {

using Json = nlohmann::json;

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kMalformedInput, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kMalformedInput, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::kMalformedInput, "cannot write " + path.string());
  out << text;
  require(out.good(), ErrorKind::kMalformedInput, "write failed for " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

namespace detail {

template <typename T>
T field(const Json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(ErrorKind::kMalformedInput, std::string(where) + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::kMalformedInput,
         std::string(where) + ": bad field '" + key + "': " + e.what());
  }
}

inline BBox parse_bbox(const Json& j, const char* where) {
  if (!j.is_array() || j.size() != 4) {
    fail(ErrorKind::kMalformedInput, std::string(where) + ": bbox must be [x,y,w,h]");
  }
  for (const auto& v : j) {
    require(v.is_number(), ErrorKind::kMalformedInput,
            std::string(where) + ": bbox entries must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace detail

inline Json bbox_to_json(const BBox& b) { return Json::array({b.x, b.y, b.w, b.h}); }

// Parses COCO-style ground truth. `sid`/`fid` are optional; without them
// every image is its own sequence at frame 0. A `timestamp` field, when
// present, overrides fid / fps.
inline Dataset parse_coco(const Json& j, double fps = kDefaultFps) {
  require(j.is_object(), ErrorKind::kMalformedInput, "COCO file must be a JSON object");
  Dataset d;
  if (j.contains("categories")) {
    for (const auto& c : j.at("categories")) {
      const auto id = detail::field<CategoryId>(c, "id", "category");
      d.categories[id] = c.contains("name") ? c.at("name").get<std::string>() : std::to_string(id);
    }
  }
  if (j.contains("images")) {
    for (const auto& im : j.at("images")) {
      FrameRecord r;
      r.image_id = detail::field<ImageId>(im, "id", "image");
      r.width = detail::field<int>(im, "width", "image");
      r.height = detail::field<int>(im, "height", "image");
      if (im.contains("file_name")) r.file_name = im.at("file_name").get<std::string>();
      r.sequence_id = im.contains("sid") ? detail::field<SequenceId>(im, "sid", "image") : r.image_id;
      r.frame_index = im.contains("fid") ? detail::field<std::int64_t>(im, "fid", "image") : 0;
      r.timestamp = im.contains("timestamp") ? detail::field<double>(im, "timestamp", "image")
                                             : static_cast<double>(r.frame_index) / fps;
      if (im.contains("source")) r.source = im.at("source").get<std::string>();
      d.images.push_back(std::move(r));
    }
  }
  if (j.contains("annotations")) {
    for (const auto& a : j.at("annotations")) {
      GtAnnotation g;
      g.ann_id = detail::field<AnnotationId>(a, "id", "annotation");
      g.image_id = detail::field<ImageId>(a, "image_id", "annotation");
      g.category_id = detail::field<CategoryId>(a, "category_id", "annotation");
      if (!a.contains("bbox")) fail(ErrorKind::kMalformedInput, "annotation: missing field 'bbox'");
      g.bbox = detail::parse_bbox(a.at("bbox"), "annotation");
      g.area = a.contains("area") ? detail::field<double>(a, "area", "annotation") : area(g.bbox);
      d.annotations.push_back(g);
    }
  }
  validate(d);
  return d;
}

inline Dataset load_coco(const std::filesystem::path& path, double fps = kDefaultFps) {
  return parse_coco(read_json_file(path), fps);
}

inline Json to_json(const Dataset& d) {
  Json images = Json::array();
  for (const auto& im : d.images) {
    Json r = {{"id", im.image_id},       {"file_name", im.file_name}, {"width", im.width},
              {"height", im.height},     {"sid", im.sequence_id},     {"fid", im.frame_index},
              {"timestamp", im.timestamp}};
    if (!im.source.empty()) r["source"] = im.source;
    images.push_back(std::move(r));
  }
  Json anns = Json::array();
  for (const auto& a : d.annotations) {
    anns.push_back({{"id", a.ann_id},
                    {"image_id", a.image_id},
                    {"category_id", a.category_id},
                    {"bbox", bbox_to_json(a.bbox)},
                    {"area", a.area},
                    {"iscrowd", 0}});
  }
  Json cats = Json::array();
  for (const auto& [id, name] : d.categories) cats.push_back({{"id", id}, {"name", name}});
  return {{"images", images}, {"annotations", anns}, {"categories", cats}};
}

inline Json detection_to_json(const Detection& det) {
  return {{"image_id", det.image_id},
          {"category_id", det.category_id},
          {"bbox", bbox_to_json(det.bbox)},
          {"score", det.score}};
}

inline Detection parse_detection(const Json& j) {
  Detection det;
  det.image_id = detail::field<ImageId>(j, "image_id", "detection");
  det.category_id = detail::field<CategoryId>(j, "category_id", "detection");
  if (!j.contains("bbox")) fail(ErrorKind::kMalformedInput, "detection: missing field 'bbox'");
  det.bbox = detail::parse_bbox(j.at("bbox"), "detection");
  det.score = detail::field<double>(j, "score", "detection");
  require(det.bbox.valid(), ErrorKind::kMalformedInput, "detection: invalid bbox");
  require(det.score >= 0.0 && det.score <= 1.0, ErrorKind::kMalformedInput,
          "detection: score outside [0,1]");
  return det;
}

// COCO results array -> detections grouped by image, file order kept.
inline DetectionMap parse_detections(const Json& j) {
  require(j.is_array(), ErrorKind::kMalformedInput, "detections file must be a JSON array");
  DetectionMap out;
  for (const auto& e : j) {
    Detection det = parse_detection(e);
    out[det.image_id].push_back(det);
  }
  return out;
}

inline DetectionMap load_detections(const std::filesystem::path& path) {
  return parse_detections(read_json_file(path));
}

inline Json to_json(const DetectionMap& dets) {
  Json arr = Json::array();
  for (const auto& [id, list] : dets) {
    for (const auto& det : list) arr.push_back(detection_to_json(det));
  }
  return arr;
}

// Class map file: [{source, from_id, to_id}, ...]
inline ClassMap parse_class_map(const Json& j) {
  require(j.is_array(), ErrorKind::kMalformedInput, "class map must be a JSON array");
  ClassMap m;
  for (const auto& e : j) {
    const auto source = detail::field<std::string>(e, "source", "class map");
    const auto from = detail::field<CategoryId>(e, "from_id", "class map");
    const auto to = detail::field<CategoryId>(e, "to_id", "class map");
    require(m.emplace(std::pair{source, from}, to).second, ErrorKind::kMalformedInput,
            "class map: duplicate entry for " + source + ":" + std::to_string(from));
  }
  return m;
}

}  // namespace streamap

#endif  // STREAMAP_COCO_IO_HPP_
