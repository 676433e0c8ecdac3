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

#ifndef STREAMAP_REPARAM_IO_HPP_
#define STREAMAP_REPARAM_IO_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "streamap/coco_io.hpp"
#include "streamap/reparam.hpp"

namespace streamap::reparam {

// Tensors on disk are {"dims": [...], "values": [...]}, row-major.
inline Json tensor_json(std::vector<std::int64_t> dims, const std::vector<double>& values) {
  return {{"dims", std::move(dims)}, {"values", values}};
}

inline std::vector<double> tensor_values(const Json& j, const std::vector<std::int64_t>& dims,
                                         const std::string& what) {
  require(j.is_object() && j.contains("dims") && j.contains("values"), ErrorKind::kMalformedInput,
          what + ": expected {dims, values}");
  std::vector<std::int64_t> got;
  std::vector<double> values;
  try {
    got = j.at("dims").get<std::vector<std::int64_t>>();
    values = j.at("values").get<std::vector<double>>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::kMalformedInput, what + ": " + e.what());
  }
  require(got == dims, ErrorKind::kMalformedInput, what + ": dims do not match the declaration");
  std::int64_t count = 1;
  for (auto d : dims) count *= d;
  require(static_cast<std::int64_t>(values.size()) == count, ErrorKind::kMalformedInput,
          what + ": value count does not match dims");
  return values;
}

inline Json to_json(const ConvSpec& c) {
  return {{"in_channels", c.in_channels},
          {"out_channels", c.out_channels},
          {"kernel", c.kernel},
          {"weights", tensor_json({c.out_channels, c.in_channels, c.kernel, c.kernel}, c.weights)},
          {"bias", tensor_json({c.out_channels}, c.bias)}};
}

inline Json to_json(const BNSpec& bn) {
  return {{"gamma", bn.gamma}, {"beta", bn.beta}, {"mean", bn.mean}, {"var", bn.var},
          {"eps", bn.eps}};
}

namespace detail {

inline BNSpec parse_bn(const Json& j, int channels, std::mt19937_64& gen) {
  if (j.is_string()) {
    require(j.get<std::string>() == "random", ErrorKind::kMalformedInput,
            "bn must be an object or \"random\"");
    return random_bn(channels, gen);
  }
  BNSpec bn;
  try {
    bn.gamma = j.at("gamma").get<std::vector<double>>();
    bn.beta = j.at("beta").get<std::vector<double>>();
    bn.mean = j.at("mean").get<std::vector<double>>();
    bn.var = j.at("var").get<std::vector<double>>();
    bn.eps = j.value("eps", 1e-5);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kMalformedInput, std::string("bn: ") + e.what());
  }
  require(bn.channels() == static_cast<std::size_t>(channels), ErrorKind::kMalformedInput,
          "bn: channel count differs from out_channels");
  bn.check();
  return bn;
}

}  // namespace detail

// Block description:
//   {"in_channels": C, "out_channels": C, "seed": s,
//    "branches": [{"kernel": 3|1, "weights": {dims, values}?, "bias": {dims, values}?,
//                  "bn": {...} | "random"?}],
//    "identity": false | true | {"bn": {...} | "random"}}
// Omitted weights or biases are drawn from N(0, 1) with the seed.
inline BranchBlock parse_block(const Json& j) {
  require(j.is_object(), ErrorKind::kMalformedInput, "block description must be a JSON object");
  BranchBlock b;
  std::uint64_t seed = 0;
  try {
    b.in_channels = j.at("in_channels").get<int>();
    b.out_channels = j.at("out_channels").get<int>();
    seed = j.value("seed", std::uint64_t{0});
  } catch (const Json::exception& e) {
    fail(ErrorKind::kMalformedInput, std::string("block: ") + e.what());
  }
  require(b.in_channels > 0 && b.out_channels > 0, ErrorKind::kMalformedInput,
          "block: channel counts must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  if (j.contains("branches")) {
    for (const auto& bj : j.at("branches")) {
      const int k = bj.value("kernel", 3);
      require(k == 1 || k == 3, ErrorKind::kMalformedInput, "branch kernel must be 1 or 3");
      Branch br{ConvSpec(b.in_channels, b.out_channels, k), std::nullopt};
      if (bj.contains("weights")) {
        br.conv.weights = tensor_values(bj.at("weights"), {b.out_channels, b.in_channels, k, k},
                                        "branch weights");
      } else {
        for (double& v : br.conv.weights) v = normal(gen);
      }
      if (bj.contains("bias")) {
        br.conv.bias = tensor_values(bj.at("bias"), {b.out_channels}, "branch bias");
      } else {
        for (double& v : br.conv.bias) v = normal(gen);
      }
      if (bj.contains("bn")) br.bn = detail::parse_bn(bj.at("bn"), b.out_channels, gen);
      b.branches.push_back(std::move(br));
    }
  }
  if (j.contains("identity")) {
    const Json& ij = j.at("identity");
    if (ij.is_boolean()) {
      b.identity = ij.get<bool>();
    } else {
      require(ij.is_object(), ErrorKind::kMalformedInput, "identity must be a bool or object");
      b.identity = true;
      if (ij.contains("bn")) b.identity_bn = detail::parse_bn(ij.at("bn"), b.out_channels, gen);
    }
  }
  b.check();
  return b;
}

}  // namespace streamap::reparam

#endif  // STREAMAP_REPARAM_IO_HPP_
