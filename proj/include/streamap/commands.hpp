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

#ifndef STREAMAP_COMMANDS_HPP_
#define STREAMAP_COMMANDS_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "streamap/anchors.hpp"
#include "streamap/attention.hpp"
#include "streamap/augment.hpp"
#include "streamap/coco_io.hpp"
#include "streamap/data_model.hpp"
#include "streamap/error.hpp"
#include "streamap/evaluator.hpp"
#include "streamap/optimizer.hpp"
#include "streamap/reparam.hpp"
#include "streamap/reparam_io.hpp"
#include "streamap/report.hpp"
#include "streamap/scenario.hpp"
#include "streamap/stream_sim.hpp"

// Command implementations behind the `streamap` executable. Each returns a
// process exit code; errors propagate as streamap::Error and are mapped by
// run_command().
namespace streamap::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitMalformed = 2,
  kExitIntegrity = 3,
  kExitInternal = 4,
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::kMalformedInput:
    case ErrorKind::kInvalidArgument:
      return kExitMalformed;
    case ErrorKind::kIntegrity:
      return kExitIntegrity;
    case ErrorKind::kInternal:
      return kExitInternal;
  }
  return kExitInternal;
}

template <typename Fn>
int run_command(Fn&& fn, std::ostream& err = std::cerr) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

// "a,b,c" -> doubles
inline std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      require(used == item.size(), ErrorKind::kMalformedInput,
              std::string(what) + ": bad number '" + item + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::kMalformedInput, std::string(what) + ": bad number '" + item + "'");
    }
  }
  return out;
}

inline std::pair<double, double> parse_range(const std::string& text, const char* what) {
  const auto v = parse_number_list(text, what);
  require(v.size() == 1 || v.size() == 2, ErrorKind::kMalformedInput,
          std::string(what) + ": expected 'lo,hi' or a single value");
  return {v.front(), v.back()};
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  SynthConfig config;
  std::filesystem::path out_dir = "scenario";
};

inline int cmd_synth(const SynthOptions& o) {
  const Scenario sc = synthesize(o.config);
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  require(!ec && std::filesystem::is_directory(o.out_dir), ErrorKind::kMalformedInput,
          "cannot create output directory " + o.out_dir.string());
  write_json_file(o.out_dir / "gt.json", to_json(sc.gt));
  write_json_file(o.out_dir / "dets_perfect.json", to_json(sc.perfect_dets));
  write_json_file(o.out_dir / "dets_degraded.json", to_json(sc.degraded_dets));
  write_json_file(o.out_dir / "meta.json", trajectories_json(sc));
  return kExitOk;
}

// ---------------------------------------------------- simulate / evaluate

struct StreamOptions {
  double fps = kDefaultFps;
  std::optional<double> latency_const;
  std::optional<std::filesystem::path> latency_trace;
  std::optional<std::string> latency_lognormal;  // "mu,sigma,seed"
  SchedulePolicy policy = SchedulePolicy::kLatestBlocking;
};

inline LatencyModel latency_model(const StreamOptions& o) {
  const int given = static_cast<int>(o.latency_const.has_value()) +
                    static_cast<int>(o.latency_trace.has_value()) +
                    static_cast<int>(o.latency_lognormal.has_value());
  require(given == 1, ErrorKind::kMalformedInput,
          "exactly one of --latency-const, --latency-trace, --latency-lognormal is required");
  if (o.latency_const) {
    require(*o.latency_const >= 0.0, ErrorKind::kMalformedInput,
            "--latency-const must be >= 0");
    return ConstantLatency{*o.latency_const};
  }
  if (o.latency_trace) return load_latency_trace(*o.latency_trace);
  const auto v = parse_number_list(*o.latency_lognormal, "--latency-lognormal");
  require(v.size() == 3 && v[1] >= 0.0 && v[2] >= 0.0 && v[2] == std::floor(v[2]),
          ErrorKind::kMalformedInput, "--latency-lognormal expects mu,sigma,seed");
  return LognormalLatency{v[0], v[1], static_cast<std::uint64_t>(v[2])};
}

inline Json latency_echo(const StreamOptions& o) {
  Json j = {{"fps", o.fps},
            {"policy", o.policy == SchedulePolicy::kLatestBlocking ? "latest-blocking" : "queue"}};
  if (o.latency_const) j["latency"] = {{"constant", *o.latency_const}};
  if (o.latency_trace) j["latency"] = {{"trace", o.latency_trace->filename().string()}};
  if (o.latency_lognormal) j["latency"] = {{"lognormal", *o.latency_lognormal}};
  return j;
}

struct SimulateOptions {
  std::filesystem::path gt_path;
  std::filesystem::path dets_path;
  StreamOptions stream;
  std::filesystem::path out = "timeline.json";
};

inline int cmd_simulate(const SimulateOptions& o) {
  const Dataset gt = load_coco(o.gt_path, o.stream.fps);
  const DetectionMap dets = load_detections(o.dets_path);
  StreamConfig cfg{o.stream.fps, 1, o.stream.policy};
  const auto tl = simulate_dataset(gt, dets, latency_model(o.stream), cfg);
  write_json_file(o.out, to_json(tl));
  return kExitOk;
}

struct EvaluateOptions {
  std::string mode = "offline";
  std::filesystem::path gt_path;
  std::optional<std::filesystem::path> dets_path;
  std::optional<std::filesystem::path> timeline_path;
  StreamOptions stream;
  std::optional<std::string> iou_thrs;
  int max_dets = 100;
  std::filesystem::path out = "report.json";
  std::optional<std::filesystem::path> pr_csv;
  std::optional<std::filesystem::path> timeline_out;
};

inline int cmd_evaluate(const EvaluateOptions& o, std::ostream& log = std::cout) {
  const auto t0 = std::chrono::steady_clock::now();
  EvalConfig cfg;
  if (o.iou_thrs) cfg.iou_thresholds = parse_number_list(*o.iou_thrs, "--iou-thrs");
  cfg.max_dets = o.max_dets;
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kMalformedInput, e.what());
  }

  const Dataset gt = load_coco(o.gt_path, o.stream.fps);
  Json echo = config_echo(cfg);
  EvalResult result;

  auto check_categories = [&](const DetectionMap& dets) {
    for (const auto& [id, list] : dets) {
      for (const auto& d : list) {
        require(gt.categories.count(d.category_id) > 0, ErrorKind::kIntegrity,
                "detection category " + std::to_string(d.category_id) +
                    " is not in the ground truth");
      }
    }
  };

  if (o.mode == "offline") {
    require(o.dets_path.has_value(), ErrorKind::kMalformedInput, "offline mode needs --dets");
    const DetectionMap dets = load_detections(*o.dets_path);
    check_categories(dets);
    result = coco_ap(pair_offline(gt, dets), cfg);
  } else if (o.mode == "streaming") {
    PredictionTimeline tl;
    if (o.timeline_path) {
      tl = parse_timeline(read_json_file(*o.timeline_path), o.stream.fps);
      echo["timeline"] = o.timeline_path->filename().string();
    } else {
      require(o.dets_path.has_value(), ErrorKind::kMalformedInput,
              "streaming mode needs --dets with a latency model, or --timeline");
      const DetectionMap dets = load_detections(*o.dets_path);
      check_categories(dets);
      StreamConfig scfg{o.stream.fps, 1, o.stream.policy};
      tl = simulate_dataset(gt, dets, latency_model(o.stream), scfg);
      echo["stream"] = latency_echo(o.stream);
      if (o.timeline_out) write_json_file(*o.timeline_out, to_json(tl));
    }
    for (const auto& s : tl.snapshots) {
      for (const auto& d : s.detections) {
        require(gt.categories.count(d.category_id) > 0, ErrorKind::kIntegrity,
                "timeline detection category " + std::to_string(d.category_id) +
                    " is not in the ground truth");
      }
    }
    result = coco_ap(pair_streaming(gt, tl), cfg);
  } else {
    fail(ErrorKind::kMalformedInput, "--mode must be offline or streaming");
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json_file(o.out, report_json(o.mode, result, echo, {{"wall_seconds", secs}}));
  if (o.pr_csv) write_text_file(*o.pr_csv, pr_curves_csv(result, cfg));

  char line[160];
  std::snprintf(line, sizeof line,
                "%s AP %.1f | AP50 %.1f | AP75 %.1f | APs %.1f | APm %.1f | APl %.1f",
                o.mode.c_str(), result.ap, result.ap50, result.ap75, result.ap_small,
                result.ap_medium, result.ap_large);
  log << line << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- fuse

struct FuseOptions {
  std::filesystem::path block_path;
  std::filesystem::path out = "fused.json";
  std::optional<std::filesystem::path> report;  // default: <out>.report.json
  int trials = 100;
  int height = 8;
  int width = 8;
  std::uint64_t seed = 0;
  double tolerance = 1e-5;
};

inline int cmd_fuse(const FuseOptions& o, std::ostream& log = std::cout) {
  using namespace reparam;
  require(o.trials >= 0 && o.height > 0 && o.width > 0, ErrorKind::kMalformedInput,
          "fuse: trials must be >= 0 and input size positive");
  const BranchBlock block = parse_block(read_json_file(o.block_path));
  const FusedConv fused = fuse_branches(block);

  std::mt19937_64 gen(o.seed);
  double max_err = 0.0;
  for (int t = 0; t < o.trials; ++t) {
    const Tensor4 x = random_tensor(1, block.in_channels, o.height, o.width, gen);
    max_err = std::max(max_err, max_abs_diff(conv2d_direct(x, fused.conv), block_forward(x, block)));
  }

  const auto params_before = count_params(block);
  const auto params_after = count_params(fused);
  const auto flops_before = count_flops(block, o.height, o.width);
  const auto flops_after = count_flops(fused, o.height, o.width);
  const bool ok = max_err <= o.tolerance;

  write_json_file(o.out, to_json(fused.conv));
  const Json rep = {{"params_before", params_before},
                    {"params_after", params_after},
                    {"flops_before", flops_before},
                    {"flops_after", flops_after},
                    {"input_hw", {o.height, o.width}},
                    {"trials", o.trials},
                    {"seed", o.seed},
                    {"max_abs_error", max_err},
                    {"tolerance", o.tolerance},
                    {"equivalent", ok}};
  write_json_file(o.report ? *o.report : std::filesystem::path(o.out.string() + ".report.json"),
                  rep);

  log << "            params        flops\n";
  log << "unfused  " << params_before << "  " << flops_before << '\n';
  log << "fused    " << params_after << "  " << flops_after << '\n';
  char line[96];
  std::snprintf(line, sizeof line, "max abs error over %d trials: %.3e", o.trials, max_err);
  log << line << '\n';
  return ok ? kExitOk : kExitInternal;
}

// ---------------------------------------------------------------- tools

struct DatasetToolOptions {
  std::filesystem::path gt_path;
  std::filesystem::path out;
  std::size_t k = 9;
  std::uint64_t seed = 0;
};

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline int cmd_histogram(const DatasetToolOptions& o) {
  const Dataset d = load_coco(o.gt_path);
  std::ostringstream csv;
  csv << "category_id,name,count\n";
  for (const auto& [cid, n] : class_histogram(d)) {
    csv << cid << ',' << csv_escape(d.categories.at(cid)) << ',' << n << '\n';
  }
  write_text_file(o.out, csv.str());
  return kExitOk;
}

inline int cmd_weights(const DatasetToolOptions& o) {
  const Dataset d = load_coco(o.gt_path);
  const auto h = class_histogram(d);
  const auto inv = inverse_freq_sample_weights(h);
  const auto loss = class_loss_weights(h);
  std::ostringstream csv;
  csv << "category_id,name,count,sample_probability,loss_weight\n";
  char buf[80];
  for (const auto& [cid, n] : h) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", inv.at(cid), loss.at(cid));
    csv << cid << ',' << csv_escape(d.categories.at(cid)) << ',' << n << ',' << buf << '\n';
  }
  write_text_file(o.out, csv.str());
  return kExitOk;
}

inline int cmd_anchors(const DatasetToolOptions& o) {
  const Dataset d = load_coco(o.gt_path);
  std::vector<BBox> boxes;
  for (const auto& a : d.annotations) boxes.push_back(a.bbox);
  const AnchorSet set = cluster_anchors(boxes, o.k, o.seed);
  std::ostringstream csv;
  csv << "index,width,height,area\n";
  char buf[96];
  for (std::size_t i = 0; i < set.anchors.size(); ++i) {
    const auto& a = set.anchors[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g", i, a.w, a.h, a.w * a.h);
    csv << buf << '\n';
  }
  write_text_file(o.out, csv.str());
  return kExitOk;
}

struct SubsampleOptions {
  std::filesystem::path gt_path;
  std::int64_t stride = 10;
  std::filesystem::path out;
};

inline int cmd_subsample(const SubsampleOptions& o) {
  write_json_file(o.out, to_json(subsample_stride(load_coco(o.gt_path), o.stride)));
  return kExitOk;
}

struct MergeOptions {
  std::vector<std::string> parts;  // "source=path"
  std::filesystem::path class_map_path;
  std::filesystem::path out;
};

inline int cmd_merge(const MergeOptions& o) {
  std::vector<NamedDataset> parts;
  for (const auto& p : o.parts) {
    const auto eq = p.find('=');
    require(eq != std::string::npos && eq > 0, ErrorKind::kMalformedInput,
            "--part expects source=path");
    parts.push_back({p.substr(0, eq), load_coco(p.substr(eq + 1))});
  }
  const ClassMap cm = parse_class_map(read_json_file(o.class_map_path));
  write_json_file(o.out, to_json(merge(parts, cm)));
  return kExitOk;
}

// ------------------------------------------------------------ benchmark

struct BenchOptions {
  optim::BenchmarkSpec spec;
  std::filesystem::path out = "bench.csv";
};

inline const char* objective_name(optim::Objective o) {
  return o == optim::Objective::kQuadratic ? "quadratic" : "rosenbrock";
}

inline const char* optimizer_name(optim::OptimizerKind k) {
  switch (k) {
    case optim::OptimizerKind::kSgd:
      return "sgd";
    case optim::OptimizerKind::kAdam:
      return "adam";
    case optim::OptimizerKind::kLookaheadSgd:
      return "lookahead-sgd";
    case optim::OptimizerKind::kLookaheadAdam:
      return "lookahead-adam";
  }
  return "?";
}

inline int cmd_bench(const BenchOptions& o, std::ostream& log = std::cout) {
  const auto& s = o.spec;
  const auto r = optim::benchmark(s);
  const Json header = {{"objective", objective_name(s.objective)},
                       {"optimizer", optimizer_name(s.optimizer)},
                       {"lr", s.lr},
                       {"steps", s.steps},
                       {"k", s.lookahead.k},
                       {"alpha", s.lookahead.alpha},
                       {"seed", s.seed},
                       {"random_init", s.random_init},
                       {"diverged", r.diverged}};
  std::ostringstream csv;
  csv << '#' << header.dump() << '\n' << "step,loss\n";
  char buf[64];
  for (const auto& [step, loss] : r.trajectory) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g", static_cast<long long>(step), loss);
    csv << buf << '\n';
  }
  write_text_file(o.out, csv.str());
  std::snprintf(buf, sizeof buf, "final loss %.6e%s", r.final_loss,
                r.diverged ? " (diverged)" : "");
  log << buf << '\n';
  return kExitOk;
}

// --------------------------------------------------------- augment (boxes)

struct AugmentOptions {
  std::filesystem::path images_path;  // JSON array of {width, height, boxes:[{bbox, category_id}]}
  std::string op = "mosaic";          // mosaic | mixup | compose
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::optional<double> lambda;  // fixed mixup lambda; beta(32,32) otherwise
  double mixup_probability = 0.24;
  std::string order = "mixup-of-mosaics";
  std::filesystem::path out = "augmented.json";
};

inline std::vector<augment::AnnotatedImage> parse_box_images(const Json& j) {
  require(j.is_array(), ErrorKind::kMalformedInput, "images file must be a JSON array");
  std::vector<augment::AnnotatedImage> out;
  for (const auto& e : j) {
    const int w = detail::field<int>(e, "width", "image");
    const int h = detail::field<int>(e, "height", "image");
    std::vector<augment::LabeledBox> boxes;
    if (e.contains("boxes")) {
      for (const auto& b : e.at("boxes")) {
        boxes.push_back({detail::parse_bbox(b.at("bbox"), "box"),
                         detail::field<CategoryId>(b, "category_id", "box")});
      }
    }
    out.push_back(augment::make_annotated_image(w, h, std::move(boxes)));
  }
  return out;
}

inline Json box_image_json(const augment::AnnotatedImage& img) {
  Json boxes = Json::array();
  for (const auto& b : img.boxes) {
    boxes.push_back({{"bbox", bbox_to_json(b.box)}, {"category_id", b.category_id}});
  }
  return {{"width", img.width}, {"height", img.height}, {"boxes", boxes}};
}

inline int cmd_augment(const AugmentOptions& o) {
  using namespace augment;
  const auto imgs = parse_box_images(read_json_file(o.images_path));
  MixupConfig mix;
  mix.apply_probability = o.mixup_probability;
  if (o.lambda) mix.lambda_source = FixedLambda{*o.lambda};
  AnnotatedImage out;
  if (o.op == "mosaic") {
    out = mosaic(imgs, MosaicConfig{}, o.seed);
  } else if (o.op == "mixup") {
    require(imgs.size() >= 2, ErrorKind::kMalformedInput, "mixup needs two images");
    out = mixup(imgs[0], imgs[1], mix, o.seed);
  } else if (o.op == "compose") {
    require(o.order == "mixup-of-mosaics" || o.order == "mosaic-of-mixups",
            ErrorKind::kMalformedInput, "--order must be mixup-of-mosaics or mosaic-of-mixups");
    const auto order = o.order == "mixup-of-mosaics" ? ComposeOrder::kMixupOfMosaics
                                                     : ComposeOrder::kMosaicOfMixups;
    out = compose(imgs, order, MosaicConfig{}, mix, o.seed, o.trial);
  } else {
    fail(ErrorKind::kMalformedInput, "--op must be mosaic, mixup or compose");
  }
  write_json_file(o.out, box_image_json(out));
  return kExitOk;
}

// ------------------------------------------------------ attention check

// Self-check of the attention invariants on seeded random inputs.
inline int cmd_attention_check(std::uint64_t seed, std::ostream& log = std::cout) {
  using namespace attention;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_matrix = [&](int r, int c) {
    TokenMatrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(gen);
    return m;
  };
  bool ok = true;
  auto report = [&](const char* name, bool pass, double value) {
    char line[128];
    std::snprintf(line, sizeof line, "%-28s %s (%.3e)", name, pass ? "ok" : "FAIL", value);
    log << line << '\n';
    ok = ok && pass;
  };

  const TokenMatrix q = random_matrix(7, 8);
  const TokenMatrix k = random_matrix(9, 8);
  const TokenMatrix v = random_matrix(9, 8);
  const Eigen::MatrixXd a = attention_weights(q, k);
  const double row_err = (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
  report("row sums", row_err <= 1e-12, row_err);

  Eigen::PermutationMatrix<Eigen::Dynamic> perm(9);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 9, gen);
  const double perm_err =
      (scaled_attention(q, perm * k, perm * v) - scaled_attention(q, k, v)).cwiseAbs().maxCoeff();
  report("key/value permutation", perm_err <= 1e-12, perm_err);

  LayerConfig cfg;
  const TokenMatrix x = random_matrix(16, 32);
  const LayerWeights w = random_layer_weights(32, cfg, gen);
  Eigen::PermutationMatrix<Eigen::Dynamic> tperm(16);
  tperm.setIdentity();
  std::shuffle(tperm.indices().data(), tperm.indices().data() + 16, gen);
  const double eq_err =
      (transformer_layer(tperm * x, w, cfg) - tperm * transformer_layer(x, w, cfg))
          .cwiseAbs()
          .maxCoeff();
  report("layer permutation", eq_err <= 1e-9, eq_err);

  const double id_err =
      (transformer_layer(x, zero_layer_weights(32, cfg), cfg) - x).cwiseAbs().maxCoeff();
  report("zero-weight identity", id_err == 0.0, id_err);
  return ok ? kExitOk : kExitInternal;
}

}  // namespace streamap::cli

#endif  // STREAMAP_COMMANDS_HPP_
