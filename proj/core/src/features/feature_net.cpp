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

#include "hypnos/features/feature_net.hpp"

#include "hypnos/error.hpp"

namespace hypnos::features {

namespace nn = torch::nn;

BottleneckImpl::BottleneckImpl(std::int64_t in_channels, std::int64_t width, std::int64_t expansion,
                               std::int64_t stride) {
  const std::int64_t out_channels = width * expansion;
  conv1_ = register_module("conv1", nn::Conv1d(nn::Conv1dOptions(in_channels, width, 1).bias(false)));
  bn1_ = register_module("bn1", nn::BatchNorm1d(width));
  conv2_ = register_module(
      "conv2", nn::Conv1d(nn::Conv1dOptions(width, width, 3).stride(stride).padding(1).bias(false)));
  bn2_ = register_module("bn2", nn::BatchNorm1d(width));
  conv3_ = register_module("conv3", nn::Conv1d(nn::Conv1dOptions(width, out_channels, 1).bias(false)));
  bn3_ = register_module("bn3", nn::BatchNorm1d(out_channels));
  if (stride != 1 || in_channels != out_channels) {
    downsample_ = register_module(
        "downsample",
        nn::Sequential(nn::Conv1d(nn::Conv1dOptions(in_channels, out_channels, 1).stride(stride).bias(false)),
                       nn::BatchNorm1d(out_channels)));
  }
}

torch::Tensor BottleneckImpl::forward(const torch::Tensor& x) {
  auto out = torch::relu(bn1_(conv1_(x)));
  out = torch::relu(bn2_(conv2_(out)));
  out = bn3_(conv3_(out));
  const auto identity = downsample_ ? downsample_->forward(x) : x;
  return torch::relu(out + identity);
}

ResNetEncoderImpl::ResNetEncoderImpl(const EncoderConfig& config, std::int64_t stem_kernel,
                                     std::int64_t latent_dim) {
  const std::int64_t base = config.base_width;
  stem_ = register_module(
      "stem", nn::Conv1d(nn::Conv1dOptions(1, base, stem_kernel).stride(2).padding(stem_kernel / 2).bias(false)));
  stem_bn_ = register_module("stem_bn", nn::BatchNorm1d(base));
  stages_ = nn::Sequential();
  std::int64_t channels = base;
  for (std::size_t s = 0; s < config.blocks.size(); ++s) {
    const std::int64_t width = base << s;
    for (std::int64_t b = 0; b < config.blocks[s]; ++b) {
      const std::int64_t stride = (s > 0 && b == 0) ? 2 : 1;
      stages_->push_back(Bottleneck(channels, width, config.expansion, stride));
      channels = width * config.expansion;
    }
  }
  stages_ = register_module("stages", stages_);
  feature_channels_ = channels;
  mean_ = register_module("mean", nn::Linear(channels, latent_dim));
  log_variance_ = register_module("log_variance", nn::Linear(channels, latent_dim));
}

GaussianParams ResNetEncoderImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(stem_bn_(stem_(x.unsqueeze(1))));
  h = torch::max_pool1d(h, 3, 2, 1);
  h = stages_->forward(h);
  h = h.mean(-1);
  return {mean_(h), log_variance_(h)};
}

DecoderImpl::DecoderImpl(std::int64_t latent_dim, std::int64_t hidden, std::int64_t channels,
                         std::int64_t epoch_length)
    : channels_(channels), base_length_((epoch_length + 7) / 8), epoch_length_(epoch_length) {
  fc1_ = register_module("fc1", nn::Linear(latent_dim, hidden));
  fc2_ = register_module("fc2", nn::Linear(hidden, channels * base_length_));
  auto up = [](std::int64_t in, std::int64_t out) {
    return nn::ConvTranspose1d(nn::ConvTranspose1dOptions(in, out, 4).stride(2).padding(1));
  };
  up1_ = register_module("up1", up(channels, channels));
  up2_ = register_module("up2", up(channels, channels));
  up3_ = register_module("up3", up(channels, 1));
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& z_d, const torch::Tensor& z_y) {
  auto h = torch::relu(fc1_(torch::cat({z_d, z_y}, 1)));
  h = torch::relu(fc2_(h)).view({-1, channels_, base_length_});
  h = torch::relu(up1_(h));
  h = torch::relu(up2_(h));
  h = up3_(h).squeeze(1);
  return h.narrow(1, 0, epoch_length_);
}

ConditionalPriorImpl::ConditionalPriorImpl(std::int64_t num_classes, std::int64_t hidden, std::int64_t latent_dim)
    : num_classes_(num_classes) {
  net_ = register_module("net", nn::Sequential(nn::Linear(num_classes, hidden), nn::ReLU(),
                                               nn::Linear(hidden, hidden), nn::ReLU(),
                                               nn::Linear(hidden, 2 * latent_dim)));
}

GaussianParams ConditionalPriorImpl::forward(const torch::Tensor& labels) {
  const auto dtype = parameters().front().scalar_type();
  const auto one_hot = torch::one_hot(labels, num_classes_).to(dtype);
  const auto out = net_->forward(one_hot).chunk(2, 1);
  return {out[0], out[1]};
}

ProjectionImpl::ProjectionImpl(std::int64_t latent_dim, std::int64_t hidden, std::int64_t out_dim) {
  fc1_ = register_module("fc1", nn::Linear(latent_dim, hidden));
  fc2_ = register_module("fc2", nn::Linear(hidden, out_dim));
}

torch::Tensor ProjectionImpl::forward(const torch::Tensor& z) {
  return torch::nn::functional::normalize(fc2_(torch::relu(fc1_(z))),
                                          torch::nn::functional::NormalizeFuncOptions().dim(1));
}

FeatureNetImpl::FeatureNetImpl(const FeatureNetConfig& config) : config_(config) {
  config_.validate();
  const auto& c = config_;
  encoder_subject = register_module("encoder_subject", ResNetEncoder(c.encoder, c.stem_kernel(), c.latent_dim_subject));
  encoder_sleep = register_module("encoder_sleep", ResNetEncoder(c.encoder, c.stem_kernel(), c.latent_dim_sleep));
  decoder = register_module("decoder", Decoder(c.latent_dim_subject + c.latent_dim_sleep, c.decoder_hidden,
                                               c.decoder_channels, c.epoch_length()));
  prior_subject = register_module("prior_subject", ConditionalPrior(c.num_subjects, c.prior_hidden, c.latent_dim_subject));
  prior_sleep = register_module("prior_sleep", ConditionalPrior(5, c.prior_hidden, c.latent_dim_sleep));
  classifier_subject = register_module("classifier_subject", nn::Linear(c.latent_dim_subject, c.num_subjects));
  classifier_sleep = register_module("classifier_sleep", nn::Linear(c.latent_dim_sleep, 5));
  projection_subject = register_module(
      "projection_subject", Projection(c.latent_dim_subject, c.projection_hidden, c.projection_dim));
  projection_sleep = register_module(
      "projection_sleep", Projection(c.latent_dim_sleep, c.projection_hidden, c.projection_dim));
}

void FeatureNetImpl::check_input(const torch::Tensor& x) const {
  if (x.dim() != 2 || x.size(1) != config_.epoch_length()) {
    throw ShapeError("feature net expects [B, " + std::to_string(config_.epoch_length()) + "] input, got " +
                     std::to_string(x.dim()) + "-d tensor with last dim " +
                     std::to_string(x.dim() > 0 ? x.size(-1) : 0));
  }
}

std::pair<GaussianParams, GaussianParams> FeatureNetImpl::encode(const torch::Tensor& x) {
  check_input(x);
  return {encoder_subject(x), encoder_sleep(x)};
}

GaussianParams FeatureNetImpl::encode_subject(const torch::Tensor& x) {
  check_input(x);
  return encoder_subject(x);
}

GaussianParams FeatureNetImpl::encode_sleep(const torch::Tensor& x) {
  check_input(x);
  return encoder_sleep(x);
}

torch::Tensor FeatureNetImpl::decode(const torch::Tensor& z_d, const torch::Tensor& z_y) {
  return decoder(z_d, z_y);
}

torch::Tensor FeatureNetImpl::extract_sleep_representation(const torch::Tensor& x) {
  check_input(x);
  const bool was_training = encoder_sleep->is_training();
  encoder_sleep->eval();
  torch::NoGradGuard no_grad;
  auto mean = encoder_sleep(x).mean;
  encoder_sleep->train(was_training);
  return mean;
}

bool is_rate_dependent(const std::string& name) {
  return name.find(".stem.") != std::string::npos || name.rfind("decoder.fc2.", 0) == 0;
}

}  // namespace hypnos::features
