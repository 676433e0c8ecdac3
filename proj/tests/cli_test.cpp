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

#include "streamap/commands.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"

namespace streamap::cli {
namespace {

using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STREAMAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

SynthOptions synth_options(const TempDir& dir, int objects, int frames, double vx, std::uint64_t seed) {
  SynthOptions o;
  o.config.objects = objects;
  o.config.frames = frames;
  o.config.velocity_x = {vx, vx};
  o.config.velocity_y = {0.0, 0.0};
  o.config.seed = seed;
  o.out_dir = dir.path();
  return o;
}

TEST(SynthCommandTest, StaticObjectNeverMoves) {
  TempDir dir;
  ASSERT_EQ(cmd_synth(synth_options(dir, 1, 30, 0.0, 3)), kExitOk);
  const Dataset gt = load_coco(dir / "gt.json");
  ASSERT_EQ(gt.annotations.size(), 30u);
  for (const auto& a : gt.annotations) EXPECT_EQ(a.bbox, gt.annotations[0].bbox);
}

TEST(SynthCommandTest, LinearMotion) {
  TempDir dir;
  ASSERT_EQ(cmd_synth(synth_options(dir, 3, 60, 5.0, 9)), kExitOk);
  const Dataset gt = load_coco(dir / "gt.json");
  const Json meta = read_json_file(dir / "meta.json");
  ASSERT_EQ(meta.at("tracks").size(), 3u);
  ImageId frame40 = -1;
  for (const auto& im : gt.images) if (im.frame_index == 40) frame40 = im.image_id;
  std::vector<double> xs;
  for (const auto& a : gt.annotations) if (a.image_id == frame40) xs.push_back(a.bbox.x);
  std::vector<double> expect;
  for (const auto& t : meta.at("tracks")) expect.push_back(t.at("initial_bbox")[0].get<double>() + 200.0);
  std::sort(xs.begin(), xs.end());
  std::sort(expect.begin(), expect.end());
  ASSERT_EQ(xs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(xs[i], expect[i], 1e-9);

  for (const auto& a : gt.annotations) {
    EXPECT_GE(a.bbox.x, 0.0);
    EXPECT_LE(a.bbox.right(), 1920.0);
  }
}

TEST(SynthCommandTest, ByteIdenticalReruns) {
  TempDir a, b;
  ASSERT_EQ(cmd_synth(synth_options(a, 4, 50, 3.0, 77)), kExitOk);
  ASSERT_EQ(cmd_synth(synth_options(b, 4, 50, 3.0, 77)), kExitOk);
  for (const char* f : {"gt.json", "dets_perfect.json", "dets_degraded.json", "meta.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(EvaluateCommandTest, OfflineAndZeroLatencyStreamingAgree) {
  TempDir dir;
  ASSERT_EQ(cmd_synth(synth_options(dir, 3, 40, 0.0, 5)), kExitOk);
  std::ostringstream log;
  EvaluateOptions off;
  off.gt_path = dir / "gt.json";
  off.dets_path = dir / "dets_perfect.json";
  off.out = dir / "offline.json";
  ASSERT_EQ(cmd_evaluate(off, log), kExitOk);
  const Json a = read_json_file(off.out);
  EXPECT_EQ(a.at("ap").get<double>(), 100.0);
  EXPECT_EQ(a.at("mode"), "offline");

  EvaluateOptions st = off;
  st.mode = "streaming";
  st.stream.latency_const = 0.0;
  st.out = dir / "streaming.json";
  ASSERT_EQ(cmd_evaluate(st, log), kExitOk);
  const Json b = read_json_file(st.out);
  for (const char* k : {"ap", "ap50", "ap75", "ap_small", "ap_medium", "ap_large", "per_class"}) {
    EXPECT_EQ(a.at(k), b.at(k)) << k;
  }
}

TEST(EvaluateCommandTest, StreamingFromTimelineFile) {
  TempDir dir;
  ASSERT_EQ(cmd_synth(synth_options(dir, 4, 60, 6.0, 8)), kExitOk);
  std::ostringstream log;
  EvaluateOptions st;
  st.mode = "streaming";
  st.gt_path = dir / "gt.json";
  st.dets_path = dir / "dets_perfect.json";
  st.stream.latency_const = 2.0 / 30.0;
  st.out = dir / "a.json";
  st.timeline_out = dir / "timeline.json";
  st.pr_csv = dir / "pr.csv";
  ASSERT_EQ(cmd_evaluate(st, log), kExitOk);

  EvaluateOptions again;
  again.mode = "streaming";
  again.gt_path = st.gt_path;
  again.timeline_path = dir / "timeline.json";
  again.out = dir / "b.json";
  ASSERT_EQ(cmd_evaluate(again, log), kExitOk);
  const Json a = read_json_file(st.out), b = read_json_file(again.out);
  EXPECT_EQ(a.at("ap"), b.at("ap"));
  EXPECT_LT(a.at("ap").get<double>(), 100.0);
  EXPECT_NE(slurp(dir / "pr.csv").find('\n'), std::string::npos);
}

TEST(FuseCommandTest, ReportCounts) {
  TempDir dir;
  write_json_file(dir / "block.json",
                  Json::parse(R"({"in_channels": 64, "out_channels": 64, "seed": 1,
                                  "branches": [{"kernel": 3}, {"kernel": 1}], "identity": true})"));
  FuseOptions o;
  o.block_path = dir / "block.json";
  o.out = dir / "fused.json";
  o.trials = 2;
  std::ostringstream log;
  ASSERT_EQ(cmd_fuse(o, log), kExitOk);
  const Json rep = read_json_file(dir / "fused.json.report.json");
  EXPECT_EQ(rep.at("params_before").get<int>(), 41088);
  EXPECT_EQ(rep.at("params_after").get<int>(), 36928);
  EXPECT_LE(rep.at("max_abs_error").get<double>(), 1e-6);
  EXPECT_LT(rep.at("flops_after").get<std::int64_t>(), rep.at("flops_before").get<std::int64_t>());
}

TEST(FuseCommandTest, SingleBranchHasZeroError) {
  TempDir dir;
  write_json_file(dir / "block.json",
                  Json::parse(R"({"in_channels": 3, "out_channels": 3, "branches": [{"kernel": 3}]})"));
  FuseOptions o;
  o.block_path = dir / "block.json";
  o.out = dir / "fused.json";
  std::ostringstream log;
  ASSERT_EQ(cmd_fuse(o, log), kExitOk);
  EXPECT_EQ(read_json_file(dir / "fused.json.report.json").at("max_abs_error").get<double>(), 0.0);
}

TEST(ToolCommandsTest, HistogramWeightsAnchors) {
  TempDir dir;
  Dataset d;
  d.categories = {{0, "A"}, {1, "B"}};
  d.images.push_back({1, 1, 0, 0.0, 100, 100, "", ""});
  AnnotationId id = 1;
  for (int i = 0; i < 100; ++i) d.annotations.push_back({id++, 1, 0, {0, 0, 10, 10}, 100});
  for (int i = 0; i < 50; ++i) d.annotations.push_back({id++, 1, 1, {0, 0, 40, 20}, 800});
  write_json_file(dir / "gt.json", to_json(d));

  DatasetToolOptions o;
  o.gt_path = dir / "gt.json";
  o.out = dir / "hist.csv";
  ASSERT_EQ(cmd_histogram(o), kExitOk);
  EXPECT_NE(slurp(o.out).find("0,A,100"), std::string::npos);
  EXPECT_NE(slurp(o.out).find("1,B,50"), std::string::npos);

  o.out = dir / "weights.csv";
  ASSERT_EQ(cmd_weights(o), kExitOk);
  std::istringstream wrows(slurp(o.out));
  std::string row;
  std::getline(wrows, row);
  EXPECT_EQ(row, "category_id,name,count,sample_probability,loss_weight");
  const double expect[2][2] = {{1.0 / 3.0, 150.0 / (2 * 100.0)}, {2.0 / 3.0, 150.0 / (2 * 50.0)}};
  for (int c = 0; c < 2; ++c) {
    ASSERT_TRUE(std::getline(wrows, row));
    std::vector<std::string> f;
    std::stringstream cells(row);
    for (std::string cell; std::getline(cells, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 5u);
    EXPECT_NEAR(std::stod(f[3]), expect[c][0], 1e-15) << row;
    EXPECT_NEAR(std::stod(f[4]), expect[c][1], 1e-15) << row;
  }

  o.out = dir / "anchors.csv";
  o.k = 2;
  ASSERT_EQ(cmd_anchors(o), kExitOk);
  const std::string a = slurp(o.out);
  EXPECT_NE(a.find("10,10"), std::string::npos) << a;
  EXPECT_NE(a.find("40,20"), std::string::npos) << a;

  Dataset empty;
  empty.categories = canonical_categories();
  write_json_file(dir / "empty.json", to_json(empty));
  o.gt_path = dir / "empty.json";
  o.out = dir / "empty.csv";
  ASSERT_EQ(cmd_histogram(o), kExitOk);
  std::istringstream rows(slurp(o.out));
  std::string line;
  std::getline(rows, line);  // header
  int count = 0;
  while (std::getline(rows, line)) {
    EXPECT_EQ(line.back(), '0');
    ++count;
  }
  EXPECT_EQ(count, 8);
}

TEST(BinaryTest, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run_cli("synth --objects 2 --frames 20 --vel-x 1,4 --seed 3 --out " + (dir / "s").string()), 0);
  EXPECT_EQ(run_cli("evaluate --gt " + (dir / "s" / "gt.json").string() + " --dets " +
                    (dir / "s" / "dets_degraded.json").string() + " --out " + (dir / "r.json").string()),
            0);
  EXPECT_EQ(run_cli("no-such-command"), 2);
  EXPECT_EQ(run_cli("evaluate --mode sideways --gt x.json"), 2);

  write_text_file(dir / "bad.json", "{]");
  EXPECT_EQ(run_cli("evaluate --gt " + (dir / "bad.json").string() + " --dets " +
                    (dir / "bad.json").string()),
            2);

  Json gt = read_json_file(dir / "s" / "gt.json");
  gt["annotations"][0]["image_id"] = 99999;
  write_json_file(dir / "dangling.json", gt);
  EXPECT_EQ(run_cli("evaluate --gt " + (dir / "dangling.json").string() + " --dets " +
                    (dir / "s" / "dets_perfect.json").string() + " --out " +
                    (dir / "r2.json").string()),
            3);

  // Weights this large lose the 1x1 branch to rounding once summed.
  write_json_file(dir / "huge.json", Json::parse(R"({
    "in_channels": 1, "out_channels": 1,
    "branches": [
      {"kernel": 3, "weights": {"dims": [1, 1, 3, 3], "values": [1e17, 1e17, 1e17, 1e17, 1e17, 1e17, 1e17, 1e17, 1e17]},
       "bias": {"dims": [1], "values": [0]}},
      {"kernel": 1, "weights": {"dims": [1, 1, 1, 1], "values": [3]}, "bias": {"dims": [1], "values": [0]}}]})"));
  EXPECT_EQ(run_cli("fuse --block " + (dir / "huge.json").string() + " --out " +
                    (dir / "huge_fused.json").string()),
            4);
}

TEST(BinaryTest, UnknownDetectionCategoryIsAnIntegrityError) {
  TempDir dir;
  ASSERT_EQ(run_cli("synth --objects 1 --frames 5 --seed 1 --out " + dir.path().string()), 0);
  Json dets = read_json_file(dir / "dets_perfect.json");
  dets[0]["category_id"] = 1234;
  write_json_file(dir / "bad_dets.json", dets);
  EXPECT_EQ(run_cli("evaluate --gt " + (dir / "gt.json").string() + " --dets " +
                    (dir / "bad_dets.json").string() + " --out " + (dir / "r.json").string()),
            3);
}

TEST(BinaryTest, BenchAndAugmentAreDeterministic) {
  TempDir dir;
  const std::string bench = "bench --objective rosenbrock --optimizer lookahead-adam --lr 0.01 --steps 500 --out ";
  ASSERT_EQ(run_cli(bench + (dir / "a.csv").string()), 0);
  ASSERT_EQ(run_cli(bench + (dir / "b.csv").string()), 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.csv").find("#{"), 0u);

  Json imgs = Json::array();
  for (int i = 0; i < 8; ++i) {
    imgs.push_back({{"width", 64}, {"height", 48},
                    {"boxes", Json::array({{{"bbox", {4 * i, 5, 20, 12}}, {"category_id", i % 3}}})}});
  }
  write_json_file(dir / "imgs.json", imgs);
  const std::string aug = "augment --images " + (dir / "imgs.json").string() +
                          " --op compose --mixup-prob 0.5 --seed 4 --trial 2 --out ";
  ASSERT_EQ(run_cli(aug + (dir / "x.json").string()), 0);
  ASSERT_EQ(run_cli(aug + (dir / "y.json").string()), 0);
  EXPECT_EQ(slurp(dir / "x.json"), slurp(dir / "y.json"));
  EXPECT_EQ(run_cli("attention-check --seed 5"), 0);
}

}  // namespace
}  // namespace streamap::cli
