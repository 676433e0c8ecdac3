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

#include "streamap/evaluator.hpp"

#include <random>

#include <gtest/gtest.h>

#include "streamap/scenario.hpp"
#include "support/ap_oracle.hpp"
#include "support/fixtures.hpp"

namespace streamap {
namespace {

struct Problem {
  Dataset gt;
  DetectionMap dets;
};

// Random frames with 0..6 objects over 3 classes and noisy detections,
// some spurious. Box sizes span all three area strata.
Problem random_problem(std::mt19937_64& gen, int frames) {
  Problem p;
  p.gt = testing::make_stream_dataset({frames}, 3);
  p.gt.annotations.clear();
  std::uniform_real_distribution<double> pos(0, 800), size(5, 200), jitter(-6, 6), u(0, 1);
  AnnotationId ann = 1;
  for (const auto& im : p.gt.images) {
    const int n = static_cast<int>(gen() % 7);
    auto& dets = p.dets[im.image_id];
    for (int i = 0; i < n; ++i) {
      const BBox b{pos(gen), pos(gen), size(gen), size(gen)};
      const auto cat = static_cast<CategoryId>(gen() % 3);
      p.gt.annotations.push_back({ann++, im.image_id, cat, b, area(b)});
      if (u(gen) < 0.8) {
        BBox d{b.x + jitter(gen), b.y + jitter(gen), b.w + jitter(gen), b.h + jitter(gen)};
        d.w = std::max(d.w, 1.0);
        d.h = std::max(d.h, 1.0);
        dets.push_back({im.image_id, u(gen) < 0.9 ? cat : (cat + 1) % 3, d, u(gen)});
      }
    }
    const int spurious = static_cast<int>(gen() % 3);
    for (int i = 0; i < spurious; ++i) {
      dets.push_back({im.image_id, static_cast<CategoryId>(gen() % 3),
                      {pos(gen), pos(gen), size(gen), size(gen)}, u(gen)});
    }
  }
  return p;
}

std::vector<oracle::Frame> oracle_frames(const Problem& p) {
  std::vector<oracle::Frame> out;
  for (const auto& im : p.gt.images) {
    oracle::Frame f;
    for (const auto& a : p.gt.annotations) if (a.image_id == im.image_id) f.gt.push_back(a);
    if (auto it = p.dets.find(im.image_id); it != p.dets.end()) f.dets = it->second;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<CategoryId> category_ids(const Dataset& d) {
  std::vector<CategoryId> out;
  for (const auto& [id, name] : d.categories) out.push_back(id);
  return out;
}

Problem single(const BBox& gt, const BBox& det, double score) {
  Problem p;
  p.gt = testing::make_stream_dataset({1}, 1);
  p.gt.annotations = {{1, 1, 0, gt, area(gt)}};
  p.dets[1] = {{1, 0, det, score}};
  return p;
}

TEST(PairingTest, Offline) {
  Dataset gt = testing::make_stream_dataset({3});
  DetectionMap dets;
  dets[1] = {{1, 1, {0, 0, 4, 4}, 0.4}};
  dets[3] = {{3, 1, {0, 0, 4, 4}, 0.4}};
  const Pairing p = pair_offline(gt, dets);
  ASSERT_EQ(p.frames.size(), 3u);
  EXPECT_EQ(p.frames[0].detections.size(), 1u);
  EXPECT_TRUE(p.frames[1].detections.empty());
  EXPECT_FALSE(p.frames[1].source_image_id.has_value());
  EXPECT_TRUE(pair_offline(Dataset{}, dets).frames.empty());

  std::reverse(gt.images.begin(), gt.images.end());
  const Pairing r = pair_offline(gt, dets);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.frames[i].frame.frame_index, static_cast<std::int64_t>(i));
}

PredictionSnapshot snap(ImageId src, std::int64_t fidx, double emission) {
  PredictionSnapshot s;
  s.source_image_id = src;
  s.sequence_id = 1;
  s.source_frame_index = fidx;
  s.start_time = 0.0;
  s.emission_time = emission;
  s.detections = {{src, 1, {0, 0, 4, 4}, 0.5}};
  return s;
}

TEST(PairingTest, StreamingPicksLatestEmissionAtOrBeforeFrame) {
  const Dataset gt = testing::make_stream_dataset({4});  // t = 0, 1/30, 2/30, 0.1
  PredictionTimeline tl;
  tl.snapshots = {snap(1, 0, 0.05), snap(2, 1, 0.09)};
  const Pairing p = pair_streaming(gt, tl);
  ASSERT_EQ(p.frames.size(), 4u);
  EXPECT_TRUE(p.frames[0].detections.empty());
  EXPECT_TRUE(p.frames[1].detections.empty());
  EXPECT_EQ(p.frames[2].source_image_id, 1);
  EXPECT_EQ(p.frames[3].source_image_id, 2);
  EXPECT_EQ(p.frames[3].detections[0].image_id, 4);  // re-attributed
}

TEST(PairingTest, StreamingTiesGoToNewestSourceFrame) {
  const Dataset gt = testing::make_stream_dataset({4});
  PredictionTimeline tl;
  tl.snapshots = {snap(2, 1, 0.08), snap(1, 0, 0.08)};
  EXPECT_EQ(pair_streaming(gt, tl).frames[3].source_image_id, 2);
}

TEST(PairingTest, ZeroLatencyPairsEachFrameWithItself) {
  const Dataset gt = testing::make_stream_dataset({20});
  DetectionMap dets;
  for (const auto& im : gt.images) dets[im.image_id] = {{im.image_id, 1, {0, 0, 3, 3}, 0.5}};
  const auto tl = simulate_dataset(gt, dets, ConstantLatency{0.0}, {});
  for (const auto& fp : pair_streaming(gt, tl).frames) {
    EXPECT_EQ(fp.source_image_id, fp.frame.image_id);
  }
}

TEST(CocoApTest, PerfectDetections) {
  Problem p;
  p.gt = testing::make_stream_dataset({5}, 3);
  for (const auto& a : p.gt.annotations) p.dets[a.image_id].push_back({a.image_id, a.category_id, a.bbox, 1.0});
  const EvalResult r = offline_ap(p.gt, p.dets);
  EXPECT_EQ(r.ap, 100.0);
  EXPECT_EQ(r.ap50, 100.0);
  EXPECT_EQ(r.ap75, 100.0);
}

TEST(CocoApTest, NoDetections) {
  const Dataset gt = testing::make_stream_dataset({5}, 3);
  const EvalResult r = offline_ap(gt, {});
  EXPECT_EQ(r.ap, 0.0);
  EXPECT_EQ(r.ap50, 0.0);
  EXPECT_EQ(r.ap75, 0.0);
}

TEST(CocoApTest, IouSixTenths) {
  const Problem p = single({0, 0, 10, 10}, {0, 0, 6, 10}, 0.9);
  ASSERT_DOUBLE_EQ(iou(p.gt.annotations[0].bbox, p.dets.at(1)[0].bbox), 0.6);
  const EvalResult r = offline_ap(p.gt, p.dets);
  EXPECT_EQ(r.ap50, 100.0);
  EXPECT_EQ(r.ap75, 0.0);
  EXPECT_NEAR(r.ap, 30.0, 1e-12);
}

TEST(CocoApTest, EmptyStrataReportSentinel) {
  const Problem p = single({0, 0, 10, 10}, {0, 0, 10, 10}, 0.9);
  const EvalResult r = offline_ap(p.gt, p.dets);
  EXPECT_EQ(r.ap_small, 100.0);
  EXPECT_EQ(r.ap_medium, kNoGroundTruth);
  EXPECT_EQ(r.ap_large, kNoGroundTruth);
}

TEST(CocoApTest, UnknownDetectionCategoryIsAnError) {
  Problem p = single({0, 0, 10, 10}, {0, 0, 10, 10}, 0.9);
  p.dets[1][0].category_id = 42;
  EXPECT_THROW(offline_ap(p.gt, p.dets), Error);
}

TEST(CocoApTest, MaxDetsKeepsTopScores) {
  Problem p = single({0, 0, 10, 10}, {0, 0, 10, 10}, 0.5);
  p.dets[1].push_back({1, 0, {50, 50, 10, 10}, 0.9});
  EvalConfig cfg;
  cfg.max_dets = 1;
  EXPECT_EQ(offline_ap(p.gt, p.dets, cfg).ap, 0.0);
  cfg.max_dets = 2;
  EXPECT_GT(offline_ap(p.gt, p.dets, cfg).ap, 0.0);
}

TEST(CocoApTest, ConfigValidation) {
  EvalConfig cfg;
  cfg.iou_thresholds = {0.5, 0.5};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.iou_thresholds = {0.0};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.max_dets = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(CocoApTest, MatchesBruteForceOracle) {
  std::mt19937_64 gen(21);
  const auto thresholds = EvalConfig::default_iou_thresholds();
  for (int trial = 0; trial < 60; ++trial) {
    const Problem p = random_problem(gen, 1 + static_cast<int>(gen() % 12));
    const EvalResult r = offline_ap(p.gt, p.dets);
    const oracle::Result o = oracle::evaluate(oracle_frames(p), category_ids(p.gt), thresholds);
    ASSERT_NEAR(r.ap, o.ap, 1e-9) << trial;
    ASSERT_NEAR(r.ap_small, o.small, 1e-9) << trial;
    ASSERT_NEAR(r.ap_medium, o.medium, 1e-9) << trial;
    ASSERT_NEAR(r.ap_large, o.large, 1e-9) << trial;
    ASSERT_EQ(r.ap_per_threshold.size(), o.per_threshold.size());
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      ASSERT_NEAR(r.ap_per_threshold[i], o.per_threshold[i], 1e-9) << trial;
    }
  }
}

TEST(CocoApTest, Properties) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 40; ++trial) {
    Problem p = random_problem(gen, 1 + static_cast<int>(gen() % 8));
    const EvalResult base = offline_ap(p.gt, p.dets);

    double mean = 0;
    for (double v : base.ap_per_threshold) mean += v;
    ASSERT_NEAR(base.ap, mean / static_cast<double>(base.ap_per_threshold.size()), 1e-12);
    ASSERT_EQ(base.ap50, base.ap_per_threshold[0]);
    ASSERT_EQ(base.ap75, base.ap_per_threshold[5]);
    for (double v : {base.ap, base.ap50, base.ap75, base.ap_small, base.ap_medium, base.ap_large}) {
      ASSERT_TRUE(v == kNoGroundTruth || (v >= 0.0 && v <= 100.0));
    }

    Problem scaled = p;
    for (auto& [id, dets] : scaled.dets) for (auto& d : dets) d.score *= 0.37;
    const EvalResult s = offline_ap(scaled.gt, scaled.dets);
    ASSERT_EQ(s.ap, base.ap);
    ASSERT_EQ(s.ap_small, base.ap_small);
    ASSERT_EQ(s.per_class, base.per_class);

    // A far-away box matches nothing at any threshold.
    Problem extra = p;
    const ImageId id = p.gt.images[gen() % p.gt.images.size()].image_id;
    extra.dets[id].push_back({id, static_cast<CategoryId>(gen() % 3), {5000, 5000, 40, 40},
                              std::uniform_real_distribution<double>(0, 1)(gen)});
    const EvalResult e = offline_ap(extra.gt, extra.dets);
    ASSERT_LE(e.ap, base.ap);
    ASSERT_LE(e.ap50, base.ap50);
    ASSERT_LE(e.ap75, base.ap75);
    for (const auto& [cat, v] : base.per_class) ASSERT_LE(e.per_class.at(cat), v);
  }
}

TEST(StreamingApTest, ZeroLatencyEqualsOffline) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Problem p = random_problem(gen, 2 + static_cast<int>(gen() % 20));
    const auto tl = simulate_dataset(p.gt, p.dets, ConstantLatency{0.0}, {});
    const EvalResult s = streaming_ap(p.gt, tl);
    const EvalResult o = offline_ap(p.gt, p.dets);
    ASSERT_EQ(s.ap, o.ap);
    ASSERT_EQ(s.ap_per_threshold, o.ap_per_threshold);
    ASSERT_EQ(s.per_class, o.per_class);
  }
}

TEST(StreamingApTest, MovingScenarioMatchesOracle) {
  SynthConfig cfg;
  cfg.objects = 6;
  cfg.frames = 45;
  cfg.seed = 12;
  const Scenario sc = synthesize(cfg);
  for (const auto* dets : {&sc.perfect_dets, &sc.degraded_dets}) {
    const auto tl = simulate_dataset(sc.gt, *dets, ConstantLatency{2.0 / 30.0}, {});
    const EvalResult r = streaming_ap(sc.gt, tl);
    const oracle::Result o = oracle::evaluate(oracle::stream_frames(sc.gt, tl),
                                              category_ids(sc.gt),
                                              EvalConfig::default_iou_thresholds());
    EXPECT_NEAR(r.ap, o.ap, 1e-9);
    EXPECT_LT(r.ap, 100.0);
  }
}

}  // namespace
}  // namespace streamap
