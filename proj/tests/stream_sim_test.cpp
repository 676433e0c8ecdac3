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

#include "streamap/stream_sim.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"

namespace streamap {
namespace {

std::vector<FrameRecord> frames_of(int n) {
  return testing::make_stream_dataset({n}).images;
}

std::vector<std::int64_t> processed(const PredictionTimeline& tl) {
  std::vector<std::int64_t> out;
  for (const auto& s : tl.snapshots) out.push_back(s.source_frame_index);
  return out;
}

StreamConfig latest() { return {30.0, 1, SchedulePolicy::kLatestBlocking}; }

TEST(StreamSimTest, FrameTime) {
  EXPECT_EQ(frame_time(0, 30), 0.0);
  EXPECT_EQ(frame_time(30, 30), 1.0);
  EXPECT_EQ(frame_time(3, 30), 0.1);
}

TEST(StreamSimTest, SampleLatency) {
  EXPECT_EQ(sample_latency(ConstantLatency{0.05}, 3, 0), 0.05);
  EXPECT_EQ(sample_latency(ConstantLatency{0.05}, 9, 7), 0.05);
  TraceLatency t;
  t.seconds[7] = 0.033;
  EXPECT_EQ(sample_latency(t, 7, 0), 0.033);
  EXPECT_THROW(sample_latency(t, 8, 0), Error);
}

TEST(StreamSimTest, LognormalRegression) {
  const double frozen[] = {
      0.039259800270873016, 0.060250298099492644, 0.04111159971849751,
      0.070897086999576281, 0.041295991096586306, 0.045134461546564114,
      0.037602990031329012, 0.036999081922859965, 0.054721918696286349,
      0.042026780492308874,
  };
  const LognormalLatency m{-3.0, 0.2, 42};
  for (int i = 0; i < 10; ++i) {
    EXPECT_DOUBLE_EQ(sample_latency(m, 0, static_cast<std::uint64_t>(i)), frozen[i]) << i;
  }
  // The draw depends on the counter, not on the image.
  EXPECT_EQ(sample_latency(m, 1, 3), sample_latency(m, 99, 3));
}

TEST(StreamSimTest, LognormalMoments) {
  const LognormalLatency m{-3.0, 0.2, 5};
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = (std::log(sample_latency(m, 0, static_cast<std::uint64_t>(i))) + 3.0) / 0.2;
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(StreamSimTest, ZeroLatencyProcessesEveryFrame) {
  const auto frames = frames_of(5);
  const auto tl = simulate(frames, {}, ConstantLatency{0.0}, latest());
  ASSERT_EQ(tl.snapshots.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(tl.snapshots[i].source_frame_index, static_cast<std::int64_t>(i));
    EXPECT_EQ(tl.snapshots[i].emission_time, frame_time(static_cast<std::int64_t>(i), 30));
  }
}

TEST(StreamSimTest, FiftyMillisecondHandTrace) {
  const auto tl = simulate(frames_of(12), {}, ConstantLatency{0.05}, latest());
  const std::vector<std::int64_t> expect = {0, 1, 3, 4, 6, 7, 9, 10};
  EXPECT_EQ(processed(tl), expect);
  EXPECT_NEAR(tl.snapshots[1].emission_time, 0.10, 1e-12);
  EXPECT_NEAR(tl.snapshots[2].start_time, 0.10, 1e-12);
}

TEST(StreamSimTest, LongLatencyYieldsOneSnapshot) {
  const auto tl = simulate(frames_of(30), {}, ConstantLatency{10.0}, latest());
  ASSERT_EQ(tl.snapshots.size(), 1u);
  EXPECT_GT(tl.snapshots[0].emission_time, 1.0);
}

TEST(StreamSimTest, DetectionsFollowTheSourceFrame) {
  const auto frames = frames_of(6);
  DetectionMap dets;
  for (const auto& f : frames) dets[f.image_id] = {{f.image_id, 1, {0, 0, 5, 5}, 0.5}};
  const auto tl = simulate(frames, dets, ConstantLatency{0.05}, latest());
  for (const auto& s : tl.snapshots) {
    ASSERT_EQ(s.detections.size(), 1u);
    EXPECT_EQ(s.detections[0].image_id, s.source_image_id);
  }
}

TEST(StreamSimTest, Errors) {
  EXPECT_THROW(simulate(std::vector<FrameRecord>{}, {}, ConstantLatency{0.1}, latest()), Error);
  EXPECT_THROW(simulate(frames_of(3), {}, ConstantLatency{-0.1}, latest()), Error);
  EXPECT_THROW(simulate(frames_of(3), {}, TraceLatency{}, latest()), Error);
  TraceLatency zero;
  for (const auto& f : frames_of(3)) zero.seconds[f.image_id] = 0.0;
  EXPECT_THROW(simulate(frames_of(3), {}, zero, latest()), Error);
}

TEST(StreamSimTest, QueuePolicyProcessesEveryFrame) {
  StreamConfig cfg = latest();
  cfg.policy = SchedulePolicy::kEveryFrameQueue;
  const auto tl = simulate(frames_of(10), {}, ConstantLatency{0.05}, cfg);
  ASSERT_EQ(tl.snapshots.size(), 10u);
  EXPECT_NEAR(tl.snapshots.back().emission_time, 0.5, 1e-12);
}

TEST(StreamSimTest, RandomizedInvariants) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 150);
    const double fps = trial % 3 == 0 ? 30.0 : 10.0 + static_cast<double>(gen() % 50);
    const auto frames = testing::make_stream_dataset({n}, 8, fps).images;
    StreamConfig cfg{fps, n, SchedulePolicy::kLatestBlocking};
    const double lat = std::uniform_real_distribution<double>(0.001, 0.3)(gen);
    const auto tl = simulate(frames, {}, ConstantLatency{lat}, cfg);
    ASSERT_LE(tl.snapshots.size(), static_cast<std::size_t>(n));
    const double duration = static_cast<double>(n) / fps;
    const auto lower = static_cast<std::size_t>(std::floor(duration / std::max(lat, 1.0 / fps)));
    ASSERT_GE(tl.snapshots.size(), lower) << "n=" << n << " lat=" << lat << " fps=" << fps;
    for (std::size_t i = 1; i < tl.snapshots.size(); ++i) {
      ASSERT_GE(tl.snapshots[i].start_time, tl.snapshots[i - 1].emission_time);
      ASSERT_GT(tl.snapshots[i].source_frame_index, tl.snapshots[i - 1].source_frame_index);
      ASSERT_GT(tl.snapshots[i].emission_time, tl.snapshots[i - 1].emission_time);
    }

    const LognormalLatency ln{-3.0, 0.5, gen()};
    const auto a = simulate(frames, {}, ln, cfg);
    const auto b = simulate(frames, {}, ln, cfg);
    ASSERT_EQ(to_json(a).dump(), to_json(b).dump());
  }
}

TEST(StreamSimTest, SimulateDatasetMergesSequences) {
  const Dataset d = testing::make_stream_dataset({10, 7});
  const auto tl = simulate_dataset(d, {}, ConstantLatency{0.05}, latest());
  std::size_t first = 0, second = 0;
  for (std::size_t i = 0; i < tl.snapshots.size(); ++i) {
    (tl.snapshots[i].sequence_id == 1 ? first : second)++;
    if (i > 0) {
      ASSERT_GE(tl.snapshots[i].emission_time, tl.snapshots[i - 1].emission_time);
    }
  }
  EXPECT_EQ(first, 7u);   // 0 1 3 4 6 7 9
  EXPECT_EQ(second, 5u);  // 0 1 3 4 6
}

TEST(StreamSimTest, LatencyTraceCsv) {
  std::istringstream ok("image_id,latency_seconds\n1,0.033\r\n2,0.5\n\n");
  const auto t = parse_latency_trace(ok);
  EXPECT_EQ(t.seconds.at(1), 0.033);
  EXPECT_EQ(t.seconds.at(2), 0.5);

  std::istringstream bad_header("id,lat\n1,0.1\n");
  EXPECT_THROW(parse_latency_trace(bad_header), Error);
  std::istringstream bad_value("image_id,latency_seconds\n1,abc\n");
  EXPECT_THROW(parse_latency_trace(bad_value), Error);
}

TEST(StreamSimTest, TimelineJsonRoundTrip) {
  const auto frames = frames_of(9);
  DetectionMap dets;
  dets[frames[0].image_id] = {{frames[0].image_id, 2, {1, 2, 3, 4}, 0.25}};
  const auto tl = simulate(frames, dets, LognormalLatency{-3, 0.2, 1}, latest());
  const Json j = to_json(tl);
  const auto back = parse_timeline(j);
  ASSERT_EQ(back.snapshots.size(), tl.snapshots.size());
  for (std::size_t i = 0; i < tl.snapshots.size(); ++i) {
    EXPECT_EQ(back.snapshots[i].emission_time, tl.snapshots[i].emission_time);
    EXPECT_EQ(back.snapshots[i].source_frame_index, tl.snapshots[i].source_frame_index);
    EXPECT_EQ(back.snapshots[i].detections, tl.snapshots[i].detections);
  }
  Json partial = Json::array({{{"source_image_id", 1}, {"start_time", 0.0}, {"emission_time", 0.1}}});
  EXPECT_EQ(parse_timeline(partial).snapshots[0].sequence_id, -1);
  partial[0]["emission_time"] = -1.0;
  EXPECT_THROW(parse_timeline(partial), Error);
}

}  // namespace
}  // namespace streamap
