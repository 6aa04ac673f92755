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
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "hypnos/features/config.hpp"

namespace hypnos::features {

// Diagonal Gaussian given by its mean and log-variance, both [B, L].
struct GaussianParams {
  torch::Tensor mean;
  torch::Tensor log_variance;
};

class BottleneckImpl : public torch::nn::Module {
 public:
  BottleneckImpl(std::int64_t in_channels, std::int64_t width, std::int64_t expansion, std::int64_t stride);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv1d conv1_{nullptr}, conv2_{nullptr}, conv3_{nullptr};
  torch::nn::BatchNorm1d bn1_{nullptr}, bn2_{nullptr}, bn3_{nullptr};
  torch::nn::Sequential downsample_{nullptr};
};
TORCH_MODULE(Bottleneck);

// Bottleneck residual network over a single-channel signal, ending in two
// linear heads for the posterior mean and log-variance.
class ResNetEncoderImpl : public torch::nn::Module {
 public:
  ResNetEncoderImpl(const EncoderConfig& config, std::int64_t stem_kernel, std::int64_t latent_dim);
  GaussianParams forward(const torch::Tensor& x);  // x: [B, N]

  std::int64_t feature_channels() const { return feature_channels_; }

 private:
  torch::nn::Conv1d stem_{nullptr};
  torch::nn::BatchNorm1d stem_bn_{nullptr};
  torch::nn::Sequential stages_{nullptr};
  torch::nn::Linear mean_{nullptr}, log_variance_{nullptr};
  std::int64_t feature_channels_ = 0;
};
TORCH_MODULE(ResNetEncoder);

class DecoderImpl : public torch::nn::Module {
 public:
  DecoderImpl(std::int64_t latent_dim, std::int64_t hidden, std::int64_t channels, std::int64_t epoch_length);
  torch::Tensor forward(const torch::Tensor& z_d, const torch::Tensor& z_y);  // -> [B, N]

 private:
  torch::nn::Linear fc1_{nullptr}, fc2_{nullptr};
  torch::nn::ConvTranspose1d up1_{nullptr}, up2_{nullptr}, up3_{nullptr};
  std::int64_t channels_ = 0;
  std::int64_t base_length_ = 0;
  std::int64_t epoch_length_ = 0;
};
TORCH_MODULE(Decoder);

// Conditional prior: one-hot label -> three-layer MLP -> Gaussian.
class ConditionalPriorImpl : public torch::nn::Module {
 public:
  ConditionalPriorImpl(std::int64_t num_classes, std::int64_t hidden, std::int64_t latent_dim);
  GaussianParams forward(const torch::Tensor& labels);  // labels: [B] int64

 private:
  std::int64_t num_classes_;
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(ConditionalPrior);

// Two-layer MLP followed by projection onto the unit sphere.
class ProjectionImpl : public torch::nn::Module {
 public:
  ProjectionImpl(std::int64_t latent_dim, std::int64_t hidden, std::int64_t out_dim);
  torch::Tensor forward(const torch::Tensor& z);

 private:
  torch::nn::Linear fc1_{nullptr}, fc2_{nullptr};
};
TORCH_MODULE(Projection);

class FeatureNetImpl : public torch::nn::Module {
 public:
  explicit FeatureNetImpl(const FeatureNetConfig& config);

  const FeatureNetConfig& config() const { return config_; }

  // Throws ShapeError unless x is [B, N] with N the configured epoch length.
  std::pair<GaussianParams, GaussianParams> encode(const torch::Tensor& x);
  GaussianParams encode_subject(const torch::Tensor& x);
  GaussianParams encode_sleep(const torch::Tensor& x);
  torch::Tensor decode(const torch::Tensor& z_d, const torch::Tensor& z_y);

  // Posterior mean of the sleep encoder, in evaluation mode and without
  // gradient tracking. Restores the previous training flag.
  torch::Tensor extract_sleep_representation(const torch::Tensor& x);

  ResNetEncoder encoder_subject{nullptr};
  ResNetEncoder encoder_sleep{nullptr};
  Decoder decoder{nullptr};
  ConditionalPrior prior_subject{nullptr};
  ConditionalPrior prior_sleep{nullptr};
  torch::nn::Linear classifier_subject{nullptr};
  torch::nn::Linear classifier_sleep{nullptr};
  Projection projection_subject{nullptr};
  Projection projection_sleep{nullptr};

 private:
  void check_input(const torch::Tensor& x) const;

  FeatureNetConfig config_;
};
TORCH_MODULE(FeatureNet);

// Parameter names whose shapes depend on the sampling rate.
bool is_rate_dependent(const std::string& parameter_name);

}  // namespace hypnos::features
