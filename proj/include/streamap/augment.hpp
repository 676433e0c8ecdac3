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

#ifndef STREAMAP_AUGMENT_HPP_
#define STREAMAP_AUGMENT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "streamap/data_model.hpp"
#include "streamap/error.hpp"
#include "streamap/geometry.hpp"
#include "streamap/random.hpp"

namespace streamap::augment {

// Single-channel pixel grid, row-major.
struct PixelGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  PixelGrid() = default;
  PixelGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const PixelGrid&, const PixelGrid&) = default;
};

struct LabeledBox {
  BBox box;
  CategoryId category_id = 0;
  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

struct AnnotatedImage {
  int width = 0;
  int height = 0;
  std::optional<PixelGrid> pixels;
  std::vector<LabeledBox> boxes;
};

// Builds an image with every box clipped to its bounds; empty boxes dropped.
inline AnnotatedImage make_annotated_image(int width, int height, std::vector<LabeledBox> boxes,
                                           std::optional<PixelGrid> pixels = std::nullopt) {
  require(width > 0 && height > 0, ErrorKind::kInvalidArgument, "image size must be positive");
  if (pixels) {
    require(pixels->width == width && pixels->height == height, ErrorKind::kInvalidArgument,
            "pixel grid size differs from image size");
  }
  AnnotatedImage img{width, height, std::move(pixels), {}};
  for (auto& lb : boxes) {
    BBox c = clip(lb.box, 0.0, 0.0, width, height);
    if (area(c) > 0.0) img.boxes.push_back({c, lb.category_id});
  }
  return img;
}

struct MosaicCenter {
  int x = 0;
  int y = 0;
};

struct MosaicConfig {
  std::optional<MosaicCenter> center;  // drawn from the seed when unset
  double min_box_area = 4.0;
  double fill = 114.0;
};

// Center uniform over [W/2, 3W/2] x [H/2, 3H/2].
inline MosaicCenter draw_mosaic_center(int width, int height, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> cx((width + 1) / 2, 3 * width / 2);
  std::uniform_int_distribution<int> cy((height + 1) / 2, 3 * height / 2);
  const int x = cx(gen);
  return {x, cy(gen)};
}

// Four W x H images on a 2W x 2H canvas split at the center. Quadrant
// order: top-left, top-right, bottom-left, bottom-right; each image touches
// the center with its inner corner and is cropped by the canvas. Boxes are
// translated, clipped to the visible part of their image, and dropped when
// the remaining area is below min_box_area.
inline AnnotatedImage mosaic(std::span<const AnnotatedImage> imgs, const MosaicConfig& cfg,
                             std::uint64_t seed) {
  require(imgs.size() >= 4, ErrorKind::kInvalidArgument, "mosaic needs four images");
  const int w = imgs[0].width;
  const int h = imgs[0].height;
  const bool with_pixels = imgs[0].pixels.has_value();
  for (std::size_t i = 0; i < 4; ++i) {
    require(imgs[i].width == w && imgs[i].height == h, ErrorKind::kInvalidArgument,
            "mosaic inputs must share one size");
    require(imgs[i].pixels.has_value() == with_pixels, ErrorKind::kInvalidArgument,
            "mosaic inputs must all have pixels or none");
  }
  const MosaicCenter c = cfg.center ? *cfg.center : draw_mosaic_center(w, h, seed);
  require(2 * c.x >= w && 2 * c.x <= 3 * w && 2 * c.y >= h && 2 * c.y <= 3 * h,
          ErrorKind::kInvalidArgument, "mosaic center outside [W/2, 3W/2] x [H/2, 3H/2]");

  const int cw = 2 * w;
  const int ch = 2 * h;
  AnnotatedImage out;
  out.width = cw;
  out.height = ch;
  if (with_pixels) out.pixels = PixelGrid(cw, ch, cfg.fill);

  const std::array<std::array<int, 2>, 4> origin = {{{c.x - w, c.y - h},
                                                     {c.x, c.y - h},
                                                     {c.x - w, c.y},
                                                     {c.x, c.y}}};
  for (std::size_t i = 0; i < 4; ++i) {
    const int ox = origin[i][0];
    const int oy = origin[i][1];
    const int x0 = std::max(ox, 0);
    const int y0 = std::max(oy, 0);
    const int x1 = std::min(ox + w, cw);
    const int y1 = std::min(oy + h, ch);
    if (with_pixels) {
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) out.pixels->at(x, y) = imgs[i].pixels->at(x - ox, y - oy);
      }
    }
    for (const auto& lb : imgs[i].boxes) {
      const BBox moved{lb.box.x + ox, lb.box.y + oy, lb.box.w, lb.box.h};
      const BBox clipped = clip(moved, x0, y0, x1, y1);
      if (area(clipped) > 0.0 && area(clipped) >= cfg.min_box_area) {
        out.boxes.push_back({clipped, lb.category_id});
      }
    }
  }
  return out;
}

struct BetaLambda {
  double a = 32.0;
  double b = 32.0;
};
struct FixedLambda {
  double value = 0.5;
};

struct MixupConfig {
  std::variant<BetaLambda, FixedLambda> lambda_source = BetaLambda{};
  double apply_probability = 0.24;
};

// Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
inline double draw_mixup_lambda(const MixupConfig& cfg, std::uint64_t seed) {
  if (const auto* f = std::get_if<FixedLambda>(&cfg.lambda_source)) {
    require(f->value >= 0.0 && f->value <= 1.0, ErrorKind::kInvalidArgument,
            "mixup lambda must lie in [0, 1]");
    return f->value;
  }
  const auto& beta = std::get<BetaLambda>(cfg.lambda_source);
  require(beta.a > 0.0 && beta.b > 0.0, ErrorKind::kInvalidArgument,
          "beta parameters must be positive");
  std::mt19937_64 gen(seed);
  std::gamma_distribution<double> ga(beta.a, 1.0);
  std::gamma_distribution<double> gb(beta.b, 1.0);
  const double x = ga(gen);
  const double y = gb(gen);
  return x / (x + y);
}

// Pixels blend as lambda * a + (1 - lambda) * b; labels are the union of
// both inputs' boxes, a's first.
inline AnnotatedImage mixup(const AnnotatedImage& a, const AnnotatedImage& b,
                            const MixupConfig& cfg, std::uint64_t seed) {
  require(a.width == b.width && a.height == b.height, ErrorKind::kInvalidArgument,
          "mixup inputs must have equal dimensions");
  require(a.pixels.has_value() == b.pixels.has_value(), ErrorKind::kInvalidArgument,
          "mixup inputs must both have pixels or neither");
  const double lambda = draw_mixup_lambda(cfg, seed);
  AnnotatedImage out{a.width, a.height, std::nullopt, a.boxes};
  out.boxes.insert(out.boxes.end(), b.boxes.begin(), b.boxes.end());
  if (a.pixels) {
    out.pixels = PixelGrid(a.width, a.height);
    for (std::size_t j = 0; j < out.pixels->values.size(); ++j) {
      out.pixels->values[j] = lambda * a.pixels->values[j] + (1.0 - lambda) * b.pixels->values[j];
    }
  }
  return out;
}

// Deterministic Bernoulli draw for trial `trial_index`.
inline bool gate(double probability, std::uint64_t seed, std::uint64_t trial_index) {
  require(probability >= 0.0 && probability <= 1.0, ErrorKind::kInvalidArgument,
          "gate probability must lie in [0, 1]");
  return counter_uniform(seed, trial_index) < probability;
}

enum class ComposeOrder { kMixupOfMosaics, kMosaicOfMixups };

// One training sample from eight source images. Mosaic always runs; mixup
// runs when its gate fires.
inline AnnotatedImage compose(std::span<const AnnotatedImage> imgs, ComposeOrder order,
                              const MosaicConfig& mosaic_cfg, const MixupConfig& mixup_cfg,
                              std::uint64_t seed, std::uint64_t trial_index) {
  require(imgs.size() >= 8, ErrorKind::kInvalidArgument, "compose needs eight images");
  const std::uint64_t s = mix64(seed ^ mix64(trial_index));
  if (order == ComposeOrder::kMixupOfMosaics) {
    AnnotatedImage first = mosaic(imgs.subspan(0, 4), mosaic_cfg, s);
    if (!gate(mixup_cfg.apply_probability, seed, trial_index)) return first;
    AnnotatedImage second = mosaic(imgs.subspan(4, 4), mosaic_cfg, s + 1);
    return mixup(first, second, mixup_cfg, s + 2);
  }
  std::vector<AnnotatedImage> quads;
  for (std::size_t q = 0; q < 4; ++q) {
    if (gate(mixup_cfg.apply_probability, seed, trial_index * 4 + q)) {
      quads.push_back(mixup(imgs[q], imgs[q + 4], mixup_cfg, s + 2 + q));
    } else {
      quads.push_back(imgs[q]);
    }
  }
  return mosaic(quads, mosaic_cfg, s);
}

}  // namespace streamap::augment

#endif  // STREAMAP_AUGMENT_HPP_
