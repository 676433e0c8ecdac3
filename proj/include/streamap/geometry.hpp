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

#ifndef STREAMAP_GEOMETRY_HPP_
#define STREAMAP_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <string_view>

#include "streamap/error.hpp"

namespace streamap {

// Axis-aligned box in COCO convention: top-left corner plus extent.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }

  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
           std::isfinite(h) && w >= 0.0 && h >= 0.0;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class SizeClass { kSmall, kMedium, kLarge };

inline constexpr double kSmallAreaLimit = 32.0 * 32.0;
inline constexpr double kMediumAreaLimit = 96.0 * 96.0;

inline double area(const BBox& b) { return b.w * b.h; }

inline double intersection_area(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

// Smallest box enclosing both operands.
inline BBox hull(const BBox& a, const BBox& b) {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.right(), b.right());
  const double y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

inline double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

// Generalized IoU. Throws when both boxes have zero area since the hull
// ratio is then undefined.
inline double giou(const BBox& a, const BBox& b) {
  require(area(a) > 0.0 || area(b) > 0.0, ErrorKind::kInvalidArgument,
          "giou: both boxes have zero area");
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  const double enclosing = area(hull(a, b));
  const double overlap = uni > 0.0 ? inter / uni : 0.0;
  return overlap - (enclosing - uni) / enclosing;
}

inline SizeClass size_class_of_area(double a) {
  if (a < kSmallAreaLimit) return SizeClass::kSmall;
  if (a < kMediumAreaLimit) return SizeClass::kMedium;
  return SizeClass::kLarge;
}

inline SizeClass size_class(const BBox& b) { return size_class_of_area(area(b)); }

inline std::string_view to_string(SizeClass s) {
  switch (s) {
    case SizeClass::kSmall:
      return "small";
    case SizeClass::kMedium:
      return "medium";
    case SizeClass::kLarge:
      return "large";
  }
  return "unknown";
}

// Clips `b` to the rectangle [x0, x1) x [y0, y1). Returns a zero-area box
// at the clamped corner when nothing remains.
inline BBox clip(const BBox& b, double x0, double y0, double x1, double y1) {
  const double nx0 = std::clamp(b.x, x0, x1);
  const double ny0 = std::clamp(b.y, y0, y1);
  const double nx1 = std::clamp(b.right(), x0, x1);
  const double ny1 = std::clamp(b.bottom(), y0, y1);
  return {nx0, ny0, std::max(0.0, nx1 - nx0), std::max(0.0, ny1 - ny0)};
}

}  // namespace streamap

#endif  // STREAMAP_GEOMETRY_HPP_
