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

#ifndef STREAMAP_ATTENTION_HPP_
#define STREAMAP_ATTENTION_HPP_

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "streamap/error.hpp"

namespace streamap::attention {

// Rows are tokens, columns are channels.
using TokenMatrix = Eigen::MatrixXd;
using Weights = Eigen::MatrixXd;
using Bias = Eigen::RowVectorXd;

struct ProjectionSet {
  Weights w_q, w_k, w_v;  // d x d
  Bias b_q, b_k, b_v;     // empty means no bias
};

struct Projected {
  TokenMatrix q, k, v;
};

namespace detail {

inline TokenMatrix affine(const TokenMatrix& x, const Weights& w, const Bias& b,
                          const char* what) {
  require(x.cols() == w.rows(), ErrorKind::kInvalidArgument,
          std::string(what) + ": input width " + std::to_string(x.cols()) +
              " does not match weight rows " + std::to_string(w.rows()));
  TokenMatrix y = x * w;
  if (b.size() != 0) {
    require(b.size() == w.cols(), ErrorKind::kInvalidArgument,
            std::string(what) + ": bias length mismatch");
    y.rowwise() += b;
  }
  return y;
}

}  // namespace detail

inline Projected project(const TokenMatrix& x, const ProjectionSet& p) {
  for (const Weights* w : {&p.w_q, &p.w_k, &p.w_v}) {
    require(w->rows() == x.cols() && w->cols() == x.cols(), ErrorKind::kInvalidArgument,
            "project: projections must be d x d with d = token width");
  }
  return {detail::affine(x, p.w_q, p.b_q, "project"), detail::affine(x, p.w_k, p.b_k, "project"),
          detail::affine(x, p.w_v, p.b_v, "project")};
}

// Row softmax with max subtraction.
inline Eigen::MatrixXd row_softmax(Eigen::MatrixXd logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - m).exp().matrix();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

// softmax(Q K^T / sqrt(d)), one row per query.
inline Eigen::MatrixXd attention_weights(const TokenMatrix& q, const TokenMatrix& k) {
  require(q.cols() == k.cols() && q.cols() >= 1, ErrorKind::kInvalidArgument,
          "attention: query and key widths differ");
  require(k.rows() >= 1, ErrorKind::kInvalidArgument, "attention: no keys");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return row_softmax((q * k.transpose()) * scale);
}

inline TokenMatrix scaled_attention(const TokenMatrix& q, const TokenMatrix& k,
                                    const TokenMatrix& v) {
  require(k.rows() == v.rows(), ErrorKind::kInvalidArgument,
          "attention: key and value token counts differ");
  require(q.cols() == v.cols(), ErrorKind::kInvalidArgument,
          "attention: value width differs from query width");
  return attention_weights(q, k) * v;
}

struct LayerConfig {
  int heads = 4;
  int mlp_hidden = 0;  // 0 means 4 * d
  double layernorm_eps = 1e-5;
};

// Pre-norm block: X + MHA(LN1(X)), then + MLP(LN2(.)).
struct LayerWeights {
  ProjectionSet qkv;
  Weights w_o;  // d x d
  Bias b_o;
  Bias ln1_gamma, ln1_beta;
  Bias ln2_gamma, ln2_beta;
  Weights w_1;  // d x hidden
  Bias b_1;
  Weights w_2;  // hidden x d
  Bias b_2;
};

inline TokenMatrix layer_norm(const TokenMatrix& x, const Bias& gamma, const Bias& beta,
                              double eps) {
  TokenMatrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    y.row(i) = ((x.row(i).array() - mean) / std::sqrt(var + eps)).matrix();
  }
  if (gamma.size() != 0) y = (y.array().rowwise() * gamma.array()).matrix();
  if (beta.size() != 0) y.rowwise() += beta;
  return y;
}

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

inline TokenMatrix multi_head_attention(const TokenMatrix& x, const LayerWeights& w, int heads) {
  const Eigen::Index d = x.cols();
  require(heads >= 1 && d % heads == 0, ErrorKind::kInvalidArgument,
          "transformer_layer: head count must divide the channel dimension");
  const Projected p = project(x, w.qkv);
  const Eigen::Index hd = d / heads;
  TokenMatrix concat(x.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Eigen::Index c0 = h * hd;
    concat.middleCols(c0, hd) =
        scaled_attention(p.q.middleCols(c0, hd), p.k.middleCols(c0, hd), p.v.middleCols(c0, hd));
  }
  return detail::affine(concat, w.w_o, w.b_o, "output projection");
}

inline TokenMatrix transformer_layer(const TokenMatrix& x, const LayerWeights& w,
                                     const LayerConfig& cfg) {
  require(x.rows() >= 1 && x.cols() >= 1, ErrorKind::kInvalidArgument,
          "transformer_layer: empty input");
  TokenMatrix y =
      x + multi_head_attention(layer_norm(x, w.ln1_gamma, w.ln1_beta, cfg.layernorm_eps), w,
                               cfg.heads);
  TokenMatrix hidden =
      detail::affine(layer_norm(y, w.ln2_gamma, w.ln2_beta, cfg.layernorm_eps), w.w_1, w.b_1,
                     "mlp");
  hidden = hidden.unaryExpr([](double v) { return gelu(v); });
  return y + detail::affine(hidden, w.w_2, w.b_2, "mlp");
}

inline LayerWeights zero_layer_weights(int d, const LayerConfig& cfg) {
  const int hidden = cfg.mlp_hidden > 0 ? cfg.mlp_hidden : 4 * d;
  LayerWeights w;
  w.qkv = {Weights::Zero(d, d), Weights::Zero(d, d), Weights::Zero(d, d),
           Bias::Zero(d),       Bias::Zero(d),       Bias::Zero(d)};
  w.w_o = Weights::Zero(d, d);
  w.b_o = Bias::Zero(d);
  w.ln1_gamma = Bias::Ones(d);
  w.ln1_beta = Bias::Zero(d);
  w.ln2_gamma = Bias::Ones(d);
  w.ln2_beta = Bias::Zero(d);
  w.w_1 = Weights::Zero(d, hidden);
  w.b_1 = Bias::Zero(hidden);
  w.w_2 = Weights::Zero(hidden, d);
  w.b_2 = Bias::Zero(d);
  return w;
}

// Weights drawn from N(0, 1/fan_in), biases from N(0, 0.01).
inline LayerWeights random_layer_weights(int d, const LayerConfig& cfg, std::mt19937_64& gen) {
  LayerWeights w = zero_layer_weights(d, cfg);
  auto fill = [&gen](auto& m, double stddev) {
    std::normal_distribution<double> normal(0.0, stddev);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(gen);
  };
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  fill(w.qkv.w_q, sd);
  fill(w.qkv.w_k, sd);
  fill(w.qkv.w_v, sd);
  fill(w.qkv.b_q, 0.1);
  fill(w.qkv.b_k, 0.1);
  fill(w.qkv.b_v, 0.1);
  fill(w.w_o, sd);
  fill(w.b_o, 0.1);
  fill(w.w_1, sd);
  fill(w.b_1, 0.1);
  fill(w.w_2, 1.0 / std::sqrt(static_cast<double>(w.w_2.rows())));
  fill(w.b_2, 0.1);
  return w;
}

}  // namespace streamap::attention

#endif  // STREAMAP_ATTENTION_HPP_
