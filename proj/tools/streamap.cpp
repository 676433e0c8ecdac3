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

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "streamap/commands.hpp"

namespace {

using namespace streamap;
using namespace streamap::cli;

void add_stream_flags(CLI::App* app, StreamOptions* o) {
  app->add_option("--fps", o->fps, "Stream frame rate")->capture_default_str();
  app->add_option("--latency-const", o->latency_const, "Constant latency in seconds");
  app->add_option("--latency-trace", o->latency_trace, "CSV trace: image_id,latency_seconds");
  app->add_option("--latency-lognormal", o->latency_lognormal,
                  "Lognormal latency as mu,sigma,seed");
  app->add_option("--policy", o->policy, "Scheduling policy")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, SchedulePolicy>{
              {"latest-blocking", SchedulePolicy::kLatestBlocking},
              {"queue", SchedulePolicy::kEveryFrameQueue}},
          CLI::ignore_case))
      ->default_str("latest-blocking");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streamap: latency-aware detection evaluation toolkit"};
  app.require_subcommand(1);

  SynthOptions synth;
  std::string vel_x = "0,0";
  std::string vel_y = "0,0";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic moving-object stream");
  synth_cmd->add_option("--objects", synth.config.objects)->capture_default_str();
  synth_cmd->add_option("--frames", synth.config.frames)->capture_default_str();
  synth_cmd->add_option("--fps", synth.config.fps)->capture_default_str();
  synth_cmd->add_option("--width", synth.config.width)->capture_default_str();
  synth_cmd->add_option("--height", synth.config.height)->capture_default_str();
  synth_cmd->add_option("--vel-x", vel_x, "x velocity range lo,hi in px/frame")
      ->capture_default_str();
  synth_cmd->add_option("--vel-y", vel_y, "y velocity range lo,hi in px/frame")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->capture_default_str();

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the stream scheduler and dump a timeline");
  sim_cmd->add_option("--gt", sim.gt_path)->required();
  sim_cmd->add_option("--dets", sim.dets_path)->required();
  add_stream_flags(sim_cmd, &sim.stream);
  sim_cmd->add_option("--out", sim.out)->capture_default_str();

  EvaluateOptions ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Offline or streaming AP");
  ev_cmd->add_option("--mode", ev.mode)
      ->check(CLI::IsMember({"offline", "streaming"}))
      ->capture_default_str();
  ev_cmd->add_option("--gt", ev.gt_path)->required();
  ev_cmd->add_option("--dets", ev.dets_path, "COCO results JSON");
  ev_cmd->add_option("--timeline", ev.timeline_path, "Precomputed timeline JSON");
  add_stream_flags(ev_cmd, &ev.stream);
  ev_cmd->add_option("--iou-thrs", ev.iou_thrs, "Comma-separated IoU thresholds");
  ev_cmd->add_option("--max-dets", ev.max_dets)->capture_default_str();
  ev_cmd->add_option("--out", ev.out)->capture_default_str();
  ev_cmd->add_option("--pr-csv", ev.pr_csv, "Write PR curves as CSV");
  ev_cmd->add_option("--timeline-out", ev.timeline_out, "Write the simulated timeline");

  FuseOptions fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a multi-branch conv block into one 3x3 conv");
  fuse_cmd->add_option("--block", fuse.block_path)->required();
  fuse_cmd->add_option("--out", fuse.out)->capture_default_str();
  fuse_cmd->add_option("--report", fuse.report, "Report path (default <out>.report.json)");
  fuse_cmd->add_option("--trials", fuse.trials)->capture_default_str();
  fuse_cmd->add_option("--height", fuse.height)->capture_default_str();
  fuse_cmd->add_option("--width", fuse.width)->capture_default_str();
  fuse_cmd->add_option("--seed", fuse.seed)->capture_default_str();

  DatasetToolOptions tool;
  auto* anchors_cmd = app.add_subcommand("anchors", "Cluster anchor shapes");
  auto* weights_cmd = app.add_subcommand("weights", "Class resampling and loss weights");
  auto* hist_cmd = app.add_subcommand("histogram", "Per-class annotation counts");
  for (auto* c : {anchors_cmd, weights_cmd, hist_cmd}) {
    c->add_option("--gt", tool.gt_path)->required();
    c->add_option("--out", tool.out)->required();
  }
  anchors_cmd->add_option("--k", tool.k)->capture_default_str();
  anchors_cmd->add_option("--seed", tool.seed)->capture_default_str();

  SubsampleOptions sub;
  auto* sub_cmd = app.add_subcommand("subsample", "Keep every n-th frame per sequence");
  sub_cmd->add_option("--gt", sub.gt_path)->required();
  sub_cmd->add_option("--stride", sub.stride)->capture_default_str();
  sub_cmd->add_option("--out", sub.out)->required();

  MergeOptions mrg;
  auto* merge_cmd = app.add_subcommand("merge", "Merge datasets into the unified classes");
  merge_cmd->add_option("--part", mrg.parts, "source=path, repeatable")->required();
  merge_cmd->add_option("--class-map", mrg.class_map_path)->required();
  merge_cmd->add_option("--out", mrg.out)->required();

  BenchOptions bench;
  std::string objective = "quadratic";
  std::string optimizer = "lookahead-sgd";
  auto* bench_cmd = app.add_subcommand("bench", "Optimizer trajectory on an analytic objective");
  bench_cmd->add_option("--objective", objective)
      ->check(CLI::IsMember({"quadratic", "rosenbrock"}))
      ->capture_default_str();
  bench_cmd->add_option("--optimizer", optimizer)
      ->check(CLI::IsMember({"sgd", "adam", "lookahead-sgd", "lookahead-adam"}))
      ->capture_default_str();
  bench_cmd->add_option("--lr", bench.spec.lr)->capture_default_str();
  bench_cmd->add_option("--steps", bench.spec.steps)->capture_default_str();
  bench_cmd->add_option("--k", bench.spec.lookahead.k)->capture_default_str();
  bench_cmd->add_option("--alpha", bench.spec.lookahead.alpha)->capture_default_str();
  bench_cmd->add_option("--dim", bench.spec.dimension)->capture_default_str();
  bench_cmd->add_option("--seed", bench.spec.seed)->capture_default_str();
  bench_cmd->add_flag("--random-init", bench.spec.random_init);
  bench_cmd->add_option("--out", bench.out)->capture_default_str();

  AugmentOptions aug;
  auto* aug_cmd = app.add_subcommand("augment", "Mosaic / mixup on box annotations");
  aug_cmd->add_option("--images", aug.images_path)->required();
  aug_cmd->add_option("--op", aug.op)
      ->check(CLI::IsMember({"mosaic", "mixup", "compose"}))
      ->capture_default_str();
  aug_cmd->add_option("--seed", aug.seed)->capture_default_str();
  aug_cmd->add_option("--trial", aug.trial)->capture_default_str();
  aug_cmd->add_option("--lambda", aug.lambda, "Fixed mixup lambda");
  aug_cmd->add_option("--mixup-prob", aug.mixup_probability)->capture_default_str();
  aug_cmd->add_option("--order", aug.order)->capture_default_str();
  aug_cmd->add_option("--out", aug.out)->capture_default_str();

  std::uint64_t attention_seed = 0;
  auto* att_cmd = app.add_subcommand("attention-check", "Verify attention invariants");
  att_cmd->add_option("--seed", attention_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitMalformed;
  }

  return run_command([&]() -> int {
    if (synth_cmd->parsed()) {
      synth.config.velocity_x = parse_range(vel_x, "--vel-x");
      synth.config.velocity_y = parse_range(vel_y, "--vel-y");
      return cmd_synth(synth);
    }
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (ev_cmd->parsed()) return cmd_evaluate(ev);
    if (fuse_cmd->parsed()) return cmd_fuse(fuse);
    if (anchors_cmd->parsed()) return cmd_anchors(tool);
    if (weights_cmd->parsed()) return cmd_weights(tool);
    if (hist_cmd->parsed()) return cmd_histogram(tool);
    if (sub_cmd->parsed()) return cmd_subsample(sub);
    if (merge_cmd->parsed()) return cmd_merge(mrg);
    if (bench_cmd->parsed()) {
      bench.spec.objective = objective == "quadratic" ? optim::Objective::kQuadratic
                                                      : optim::Objective::kRosenbrock;
      static const std::map<std::string, optim::OptimizerKind> kinds = {
          {"sgd", optim::OptimizerKind::kSgd},
          {"adam", optim::OptimizerKind::kAdam},
          {"lookahead-sgd", optim::OptimizerKind::kLookaheadSgd},
          {"lookahead-adam", optim::OptimizerKind::kLookaheadAdam}};
      bench.spec.optimizer = kinds.at(optimizer);
      return cmd_bench(bench);
    }
    if (aug_cmd->parsed()) return cmd_augment(aug);
    if (att_cmd->parsed()) return cmd_attention_check(attention_seed);
    return kExitMalformed;
  });
}
