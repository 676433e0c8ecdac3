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

#ifndef STREAMAP_REPARAM_HPP_
#define STREAMAP_REPARAM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "streamap/error.hpp"

namespace streamap::reparam {

// Dense NCHW tensor.
struct Tensor4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<double> values;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, double fill = 0.0)
      : n(n_), c(c_), h(h_), w(w_), values(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t index(int in, int ic, int y, int x) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + y) * w + x;
  }
  double& at(int in, int ic, int y, int x) { return values[index(in, ic, y, x)]; }
  double at(int in, int ic, int y, int x) const { return values[index(in, ic, y, x)]; }
};

// Stride-1 same-padded convolution with bias. Weights are out x in x k x k.
struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  std::vector<double> weights;
  std::vector<double> bias;

  ConvSpec() = default;
  ConvSpec(int in, int out, int k)
      : in_channels(in),
        out_channels(out),
        kernel(k),
        weights(static_cast<std::size_t>(out) * in * k * k, 0.0),
        bias(static_cast<std::size_t>(out), 0.0) {}

  int padding() const { return kernel / 2; }
  std::size_t windex(int o, int i, int ky, int kx) const {
    return ((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx;
  }
  double& weight(int o, int i, int ky, int kx) { return weights[windex(o, i, ky, kx)]; }
  double weight(int o, int i, int ky, int kx) const { return weights[windex(o, i, ky, kx)]; }

  void check() const {
    require(kernel == 1 || kernel == 3, ErrorKind::kMalformedInput, "kernel size must be 1 or 3");
    require(in_channels > 0 && out_channels > 0, ErrorKind::kMalformedInput,
            "channel counts must be positive");
    require(weights.size() == static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel,
            ErrorKind::kMalformedInput, "weight count does not match conv dims");
    require(bias.size() == static_cast<std::size_t>(out_channels), ErrorKind::kMalformedInput,
            "bias count does not match out_channels");
  }
};

struct BNSpec {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> mean;
  std::vector<double> var;
  double eps = 1e-5;

  std::size_t channels() const { return gamma.size(); }

  // gamma 1, beta 0, mean 0, var 1, eps 0: the exact identity map.
  static BNSpec identity(int channels) {
    const auto c = static_cast<std::size_t>(channels);
    return {std::vector<double>(c, 1.0), std::vector<double>(c, 0.0),
            std::vector<double>(c, 0.0), std::vector<double>(c, 1.0), 0.0};
  }

  void check() const {
    const auto c = gamma.size();
    require(beta.size() == c && mean.size() == c && var.size() == c, ErrorKind::kMalformedInput,
            "batch-norm parameter vectors differ in length");
    require(eps >= 0.0, ErrorKind::kMalformedInput, "batch-norm epsilon must be >= 0");
    for (double v : var) {
      require(v >= 0.0 && v + eps > 0.0, ErrorKind::kMalformedInput,
              "batch-norm variance must be >= 0 with var + eps > 0");
    }
  }
};

struct Branch {
  ConvSpec conv;
  std::optional<BNSpec> bn;
};

// Parallel branches summed before any activation.
struct BranchBlock {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<Branch> branches;
  bool identity = false;
  std::optional<BNSpec> identity_bn;

  void check() const {
    require(!branches.empty() || identity, ErrorKind::kMalformedInput, "block has no branches");
    for (const auto& b : branches) {
      b.conv.check();
      require(b.conv.in_channels == in_channels && b.conv.out_channels == out_channels,
              ErrorKind::kMalformedInput, "branch channels differ from the block's");
      if (b.bn) {
        b.bn->check();
        require(b.bn->channels() == static_cast<std::size_t>(out_channels),
                ErrorKind::kMalformedInput, "batch-norm channels differ from out_channels");
      }
    }
    if (identity) {
      require(in_channels == out_channels, ErrorKind::kMalformedInput,
              "identity branch needs in_channels == out_channels");
    }
    if (identity_bn) {
      require(identity, ErrorKind::kMalformedInput, "identity batch-norm without identity branch");
      identity_bn->check();
      require(identity_bn->channels() == static_cast<std::size_t>(out_channels),
              ErrorKind::kMalformedInput, "batch-norm channels differ from out_channels");
    }
  }
};

struct FusedConv {
  ConvSpec conv;
};

inline Tensor4 conv2d_direct(const Tensor4& x, const ConvSpec& c) {
  c.check();
  require(x.c == c.in_channels, ErrorKind::kInvalidArgument,
          "conv2d: input has " + std::to_string(x.c) + " channels, conv expects " +
              std::to_string(c.in_channels));
  const int pad = c.padding();
  Tensor4 y(x.n, c.out_channels, x.h, x.w);
  for (int n = 0; n < x.n; ++n) {
    for (int o = 0; o < c.out_channels; ++o) {
      for (int oy = 0; oy < x.h; ++oy) {
        for (int ox = 0; ox < x.w; ++ox) {
          double acc = c.bias[static_cast<std::size_t>(o)];
          for (int i = 0; i < c.in_channels; ++i) {
            for (int ky = 0; ky < c.kernel; ++ky) {
              const int iy = oy + ky - pad;
              if (iy < 0 || iy >= x.h) continue;
              for (int kx = 0; kx < c.kernel; ++kx) {
                const int ix = ox + kx - pad;
                if (ix < 0 || ix >= x.w) continue;
                acc += c.weight(o, i, ky, kx) * x.at(n, i, iy, ix);
              }
            }
          }
          y.at(n, o, oy, ox) = acc;
        }
      }
    }
  }
  return y;
}

// Inference-mode batch norm.
inline Tensor4 batch_norm(const Tensor4& x, const BNSpec& bn) {
  bn.check();
  require(bn.channels() == static_cast<std::size_t>(x.c), ErrorKind::kInvalidArgument,
          "batch_norm: channel mismatch");
  Tensor4 y = x;
  for (int n = 0; n < x.n; ++n) {
    for (int ch = 0; ch < x.c; ++ch) {
      const auto k = static_cast<std::size_t>(ch);
      const double scale = bn.gamma[k] / std::sqrt(bn.var[k] + bn.eps);
      for (int yy = 0; yy < x.h; ++yy) {
        for (int xx = 0; xx < x.w; ++xx) {
          double& v = y.at(n, ch, yy, xx);
          v = (v - bn.mean[k]) * scale + bn.beta[k];
        }
      }
    }
  }
  return y;
}

inline ConvSpec pad_1x1_to_3x3(const ConvSpec& c) {
  require(c.kernel == 1, ErrorKind::kInvalidArgument, "pad_1x1_to_3x3: kernel is not 1x1");
  c.check();
  ConvSpec out(c.in_channels, c.out_channels, 3);
  for (int o = 0; o < c.out_channels; ++o) {
    for (int i = 0; i < c.in_channels; ++i) out.weight(o, i, 1, 1) = c.weight(o, i, 0, 0);
  }
  out.bias = c.bias;
  return out;
}

inline ConvSpec identity_to_3x3(int in_channels, int out_channels) {
  require(in_channels == out_channels && in_channels > 0, ErrorKind::kInvalidArgument,
          "identity_to_3x3: identity needs equal positive channel counts");
  ConvSpec out(in_channels, out_channels, 3);
  for (int ch = 0; ch < in_channels; ++ch) out.weight(ch, ch, 1, 1) = 1.0;
  return out;
}

inline ConvSpec identity_to_3x3(int channels) { return identity_to_3x3(channels, channels); }

// Absorbs a following batch norm: w' = w * g / sqrt(v + eps),
// b' = (b - mu) * g / sqrt(v + eps) + beta.
inline ConvSpec fold_bn(const ConvSpec& c, const BNSpec& bn) {
  c.check();
  bn.check();
  require(bn.channels() == static_cast<std::size_t>(c.out_channels), ErrorKind::kInvalidArgument,
          "fold_bn: batch-norm channels differ from out_channels");
  ConvSpec out = c;
  const std::size_t per_out = static_cast<std::size_t>(c.in_channels) * c.kernel * c.kernel;
  for (int o = 0; o < c.out_channels; ++o) {
    const auto k = static_cast<std::size_t>(o);
    const double scale = bn.gamma[k] / std::sqrt(bn.var[k] + bn.eps);
    for (std::size_t j = 0; j < per_out; ++j) out.weights[k * per_out + j] *= scale;
    out.bias[k] = (c.bias[k] - bn.mean[k]) * scale + bn.beta[k];
  }
  return out;
}

// Elementwise sum of already-normalized 3x3 kernels and biases.
inline ConvSpec sum_kernels(const std::vector<ConvSpec>& kernels) {
  require(!kernels.empty(), ErrorKind::kInvalidArgument, "no kernels to fuse");
  ConvSpec out(kernels.front().in_channels, kernels.front().out_channels, 3);
  for (const auto& k : kernels) {
    k.check();
    require(k.kernel == 3 && k.in_channels == out.in_channels &&
                k.out_channels == out.out_channels,
            ErrorKind::kInvalidArgument, "fuse: branch shapes differ");
    for (std::size_t j = 0; j < out.weights.size(); ++j) out.weights[j] += k.weights[j];
    for (std::size_t j = 0; j < out.bias.size(); ++j) out.bias[j] += k.bias[j];
  }
  return out;
}

// Each branch as an equivalent 3x3 conv with its batch norm folded in.
inline std::vector<ConvSpec> normalized_branches(const BranchBlock& b) {
  b.check();
  std::vector<ConvSpec> out;
  for (const auto& br : b.branches) {
    ConvSpec k = br.conv.kernel == 1 ? pad_1x1_to_3x3(br.conv) : br.conv;
    if (br.bn) k = fold_bn(k, *br.bn);
    out.push_back(std::move(k));
  }
  if (b.identity) {
    ConvSpec k = identity_to_3x3(b.in_channels, b.out_channels);
    if (b.identity_bn) k = fold_bn(k, *b.identity_bn);
    out.push_back(std::move(k));
  }
  return out;
}

inline FusedConv fuse_branches(const BranchBlock& b) {
  return {sum_kernels(normalized_branches(b))};
}

// Reference forward pass of the unfused block: each branch evaluated on its
// own and the outputs summed.
inline Tensor4 block_forward(const Tensor4& x, const BranchBlock& b) {
  b.check();
  require(x.c == b.in_channels, ErrorKind::kInvalidArgument, "block_forward: channel mismatch");
  Tensor4 sum(x.n, b.out_channels, x.h, x.w);
  auto accumulate = [&sum](const Tensor4& t) {
    for (std::size_t j = 0; j < sum.values.size(); ++j) sum.values[j] += t.values[j];
  };
  for (const auto& br : b.branches) {
    Tensor4 y = conv2d_direct(x, br.conv);
    if (br.bn) y = batch_norm(y, *br.bn);
    accumulate(y);
  }
  if (b.identity) accumulate(b.identity_bn ? batch_norm(x, *b.identity_bn) : x);
  return sum;
}

inline double max_abs_diff(const Tensor4& a, const Tensor4& b) {
  require(a.values.size() == b.values.size(), ErrorKind::kInvalidArgument,
          "max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    m = std::max(m, std::abs(a.values[j] - b.values[j]));
  }
  return m;
}

// Learnable parameters: weights and biases, plus gamma and beta per batch
// norm. Running mean and variance are buffers and not counted.
inline std::int64_t count_params(const ConvSpec& c) {
  return static_cast<std::int64_t>(c.weights.size() + c.bias.size());
}
inline std::int64_t count_params(const BNSpec& bn) {
  return static_cast<std::int64_t>(2 * bn.channels());
}
inline std::int64_t count_params(const FusedConv& f) { return count_params(f.conv); }
inline std::int64_t count_params(const BranchBlock& b) {
  std::int64_t n = 0;
  for (const auto& br : b.branches) {
    n += count_params(br.conv);
    if (br.bn) n += count_params(*br.bn);
  }
  if (b.identity_bn) n += count_params(*b.identity_bn);
  return n;
}

// Multiply-accumulates count as two operations.
inline std::int64_t count_flops(const ConvSpec& c, int h, int w) {
  return 2LL * c.kernel * c.kernel * c.in_channels * c.out_channels * h * w;
}
inline std::int64_t count_flops(const FusedConv& f, int h, int w) {
  return count_flops(f.conv, h, w);
}
// Branch convolutions plus the additions that merge branch outputs.
inline std::int64_t count_flops(const BranchBlock& b, int h, int w) {
  std::int64_t n = 0;
  for (const auto& br : b.branches) n += count_flops(br.conv, h, w);
  const auto paths = static_cast<std::int64_t>(b.branches.size()) + (b.identity ? 1 : 0);
  if (paths > 1) n += (paths - 1) * b.out_channels * static_cast<std::int64_t>(h) * w;
  return n;
}

inline Tensor4 random_tensor(int n, int c, int h, int w, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor4 t(n, c, h, w);
  for (double& v : t.values) v = normal(gen);
  return t;
}

inline ConvSpec random_conv(int in, int out, int k, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ConvSpec c(in, out, k);
  for (double& v : c.weights) v = normal(gen);
  for (double& v : c.bias) v = normal(gen);
  return c;
}

inline BNSpec random_bn(int channels, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> positive(0.25, 2.0);
  BNSpec bn;
  for (int ch = 0; ch < channels; ++ch) {
    bn.gamma.push_back(positive(gen));
    bn.beta.push_back(normal(gen));
    bn.mean.push_back(normal(gen));
    bn.var.push_back(positive(gen));
  }
  return bn;
}

// Subset mask bits: 1 = 3x3 conv, 2 = 1x1 conv, 4 = identity.
inline BranchBlock random_block(int channels, unsigned mask, bool with_bn, std::mt19937_64& gen) {
  require((mask & 7u) != 0, ErrorKind::kInvalidArgument, "random_block: empty branch mask");
  BranchBlock b;
  b.in_channels = channels;
  b.out_channels = channels;
  for (int k : {3, 1}) {
    if (!(mask & (k == 3 ? 1u : 2u))) continue;
    Branch br{random_conv(channels, channels, k, gen), std::nullopt};
    if (with_bn) br.bn = random_bn(channels, gen);
    b.branches.push_back(std::move(br));
  }
  if (mask & 4u) {
    b.identity = true;
    if (with_bn) b.identity_bn = random_bn(channels, gen);
  }
  return b;
}

}  // namespace streamap::reparam

#endif  // STREAMAP_REPARAM_HPP_
