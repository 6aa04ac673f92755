// Copyright 2026 The Hypnos Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hypnos/sequence/attention.hpp"

#include <cmath>

#include "hypnos/error.hpp"

namespace hypnos::sequence {

namespace nn = torch::nn;

torch::Tensor scaled_dot_product_attention(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v,
                                           torch::Tensor* weights) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.size(-1)));
  auto w = torch::softmax(q.matmul(k.transpose(-2, -1)) * scale, -1);
  if (weights != nullptr) *weights = w;
  return w.matmul(v);
}

MultiHeadAttentionImpl::MultiHeadAttentionImpl(std::int64_t model_dim, std::int64_t heads) : heads_(heads) {
  if (heads < 1 || model_dim % heads != 0) throw ConfigError("model_dim must be divisible by heads");
  query_ = register_module("query", nn::Linear(model_dim, model_dim));
  key_ = register_module("key", nn::Linear(model_dim, model_dim));
  value_ = register_module("value", nn::Linear(model_dim, model_dim));
  output_ = register_module("output", nn::Linear(model_dim, model_dim));
}

AttentionOutput MultiHeadAttentionImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 3) throw ShapeError("attention expects [B, T, D] input");
  const auto b = x.size(0), t = x.size(1), d = x.size(2);
  const auto dh = d / heads_;
  auto split = [&](const torch::Tensor& y) { return y.view({b, t, heads_, dh}).transpose(1, 2); };
  AttentionOutput out;
  auto heads = scaled_dot_product_attention(split(query_(x)), split(key_(x)), split(value_(x)), &out.weights);
  out.output = output_(heads.transpose(1, 2).reshape({b, t, d}));
  return out;
}

EncoderLayerImpl::EncoderLayerImpl(const TransformerConfig& c) {
  attention_ = register_module("attention", MultiHeadAttention(c.model_dim, c.heads));
  ff1_ = register_module("ff1", nn::Linear(c.model_dim, c.feed_forward_dim));
  ff2_ = register_module("ff2", nn::Linear(c.feed_forward_dim, c.model_dim));
  norm1_ = register_module("norm1", nn::LayerNorm(nn::LayerNormOptions({c.model_dim})));
  norm2_ = register_module("norm2", nn::LayerNorm(nn::LayerNormOptions({c.model_dim})));
  dropout_ = register_module("dropout", nn::Dropout(c.dropout));
}

torch::Tensor EncoderLayerImpl::forward(const torch::Tensor& x, torch::Tensor* attention_weights) {
  auto attn = attention_(x);
  if (attention_weights != nullptr) *attention_weights = attn.weights;
  auto h = norm1_(x + dropout_(attn.output));
  return norm2_(h + dropout_(ff2_(dropout_(torch::relu(ff1_(h))))));
}

torch::Tensor sinusoidal_positions(std::int64_t length, std::int64_t dim) {
  auto table = torch::zeros({length, dim}, torch::kFloat64);
  auto acc = table.accessor<double, 2>();
  for (std::int64_t p = 0; p < length; ++p) {
    for (std::int64_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      acc[p][i] = (i % 2 == 0) ? std::sin(p * rate) : std::cos(p * rate);
    }
  }
  return table;
}

TransformerEncoderImpl::TransformerEncoderImpl(std::int64_t input_dim, const TransformerConfig& config)
    : input_dim_(input_dim), config_(config) {
  config_.validate();
  input_ = register_module("input", nn::Linear(input_dim, config_.model_dim));
  layers_ = nn::ModuleList();
  for (std::int64_t i = 0; i < config_.layers; ++i) layers_->push_back(EncoderLayer(config_));
  layers_ = register_module("layers", layers_);
}

torch::Tensor TransformerEncoderImpl::forward(const torch::Tensor& z) {
  if (z.dim() != 3 || z.size(2) != input_dim_) {
    throw ShapeError("transformer expects [B, T, " + std::to_string(input_dim_) + "] input");
  }
  auto h = input_(z);
  if (config_.positional_encoding) {
    h = h + sinusoidal_positions(z.size(1), config_.model_dim).to(h.scalar_type()).unsqueeze(0);
  }
  for (const auto& layer : *layers_) h = layer->as<EncoderLayer>()->forward(h);
  return h;
}

}  // namespace hypnos::sequence
