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

#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "hypnos/sequence/config.hpp"

namespace hypnos::sequence {

// softmax(q k^T / sqrt(d)) v over the last two dims. When weights is
// non-null it receives the attention matrix.
torch::Tensor scaled_dot_product_attention(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v,
                                           torch::Tensor* weights = nullptr);

struct AttentionOutput {
  torch::Tensor output;   // [B, T, D]
  torch::Tensor weights;  // [B, H, T, T]
};

class MultiHeadAttentionImpl : public torch::nn::Module {
 public:
  MultiHeadAttentionImpl(std::int64_t model_dim, std::int64_t heads);
  AttentionOutput forward(const torch::Tensor& x);  // x: [B, T, D]

 private:
  std::int64_t heads_;
  torch::nn::Linear query_{nullptr}, key_{nullptr}, value_{nullptr}, output_{nullptr};
};
TORCH_MODULE(MultiHeadAttention);

// Post-norm encoder block: x + attn -> norm -> x + ff -> norm.
class EncoderLayerImpl : public torch::nn::Module {
 public:
  explicit EncoderLayerImpl(const TransformerConfig& config);
  torch::Tensor forward(const torch::Tensor& x, torch::Tensor* attention_weights = nullptr);

 private:
  MultiHeadAttention attention_{nullptr};
  torch::nn::Linear ff1_{nullptr}, ff2_{nullptr};
  torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr};
  torch::nn::Dropout dropout_{nullptr};
};
TORCH_MODULE(EncoderLayer);

// Sinusoidal position table [T, D].
torch::Tensor sinusoidal_positions(std::int64_t length, std::int64_t dim);

class TransformerEncoderImpl : public torch::nn::Module {
 public:
  TransformerEncoderImpl(std::int64_t input_dim, const TransformerConfig& config);
  // z: [B, T, input_dim] -> [B, T, model_dim]. Throws ShapeError otherwise.
  torch::Tensor forward(const torch::Tensor& z);

 private:
  std::int64_t input_dim_;
  TransformerConfig config_;
  torch::nn::Linear input_{nullptr};
  torch::nn::ModuleList layers_{nullptr};
};
TORCH_MODULE(TransformerEncoder);

}  // namespace hypnos::sequence
