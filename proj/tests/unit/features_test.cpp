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

#include <cmath>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "hypnos/error.hpp"
#include "hypnos/features/feature_net.hpp"
#include "hypnos/features/losses.hpp"

namespace hypnos::features {
namespace {

FeatureNetConfig small_config(int rate = 4) {
  FeatureNetConfig c;
  c.sampling_rate_hz = rate;
  c.num_subjects = 3;
  c.latent_dim_subject = 6;
  c.latent_dim_sleep = 5;
  c.encoder.base_width = 4;
  c.encoder.blocks = {1, 1};
  c.encoder.expansion = 2;
  c.decoder_hidden = 16;
  c.decoder_channels = 4;
  c.prior_hidden = 8;
  c.projection_hidden = 8;
  c.projection_dim = 4;
  return c;
}

ViewBatch batch(std::int64_t n = 8, std::int64_t length = 120) {
  ViewBatch b;
  b.x = torch::randn({n, length});
  b.subjects = torch::arange(n, torch::kInt64).div(2, "floor").remainder(3);
  b.stages = torch::arange(n, torch::kInt64).div(2, "floor").remainder(2);
  return b;
}

TEST(FeatureNet, ShapesThroughEveryBranch) {
  torch::manual_seed(1);
  FeatureNet net(small_config());
  const auto b = batch();
  const auto [q_d, q_y] = net->encode(b.x);
  EXPECT_EQ(q_d.mean.sizes(), (std::vector<std::int64_t>{8, 6}));
  EXPECT_EQ(q_y.log_variance.sizes(), (std::vector<std::int64_t>{8, 5}));
  EXPECT_EQ(net->decode(q_d.mean, q_y.mean).sizes(), b.x.sizes());
  EXPECT_EQ(net->prior_subject(b.subjects).mean.sizes(), q_d.mean.sizes());
  EXPECT_EQ(net->prior_sleep(b.stages).mean.sizes(), q_y.mean.sizes());
  const auto proj = net->projection_sleep(q_y.mean);
  EXPECT_TRUE(torch::allclose(proj.norm(2, 1), torch::ones({8}), 1e-5, 1e-5));
}

TEST(FeatureNet, DecoderHandlesEveryEpochLength) {
  for (int rate : {1, 3, 7, 100}) {
    FeatureNet net(small_config(rate));
    const auto z_d = torch::zeros({2, 6});
    const auto z_y = torch::zeros({2, 5});
    EXPECT_EQ(net->decode(z_d, z_y).size(1), 30 * rate);
  }
}

TEST(FeatureNet, RejectsWrongInputShapes) {
  FeatureNet net(small_config());
  EXPECT_THROW(net->encode(torch::zeros({2, 121})), ShapeError);
  EXPECT_THROW(net->encode(torch::zeros({120})), ShapeError);
}

TEST(FeatureNet, ExtractionIsDeterministicAndRestoresMode) {
  FeatureNet net(small_config());
  net->train();
  const auto x = torch::randn({4, 120});
  const auto a = net->extract_sleep_representation(x);
  const auto b = net->extract_sleep_representation(x);
  EXPECT_TRUE(net->is_training());
  EXPECT_TRUE(torch::equal(a, b));
  EXPECT_FALSE(a.requires_grad());
}

TEST(FeatureNet, RateDependentParameters) {
  EXPECT_TRUE(is_rate_dependent("encoder_sleep.stem.weight"));
  EXPECT_TRUE(is_rate_dependent("decoder.fc2.bias"));
  EXPECT_FALSE(is_rate_dependent("decoder.fc1.weight"));
  EXPECT_FALSE(is_rate_dependent("encoder_sleep.stages.0.0.conv1.weight"));
  // Only those tensors change shape when the rate changes.
  FeatureNet slow(small_config(4));
  FeatureNet fast(small_config(100));
  const auto fast_params = fast->named_parameters();
  for (const auto& p : slow->named_parameters()) {
    const bool same = p.value().sizes() == fast_params[p.key()].sizes();
    EXPECT_EQ(same, !is_rate_dependent(p.key())) << p.key();
  }
}

TEST(Losses, GaussianKlClosedForms) {
  const GaussianParams standard{torch::zeros({1, 2}), torch::zeros({1, 2})};
  EXPECT_NEAR(gaussian_kl(standard, standard).item<double>(), 0.0, 1e-12);
  const GaussianParams shifted{torch::ones({1, 2}), torch::zeros({1, 2})};
  EXPECT_NEAR(gaussian_kl(shifted, standard).item<double>(), 1.0, 1e-6);
  // KL(N(0, e) || N(0, 1)) = 0.5 (e - 1 - 1) per dimension.
  const GaussianParams wide{torch::zeros({1, 1}), torch::ones({1, 1})};
  EXPECT_NEAR(gaussian_kl(wide, GaussianParams{torch::zeros({1, 1}), torch::zeros({1, 1})}).item<double>(),
              0.5 * (std::exp(1.0) - 2.0), 1e-6);
  const auto q = GaussianParams{torch::randn({5, 3}), torch::randn({5, 3})};
  const auto p = GaussianParams{torch::randn({5, 3}), torch::randn({5, 3})};
  EXPECT_TRUE((gaussian_kl(q, p) >= -1e-6).all().item<bool>());
}

TEST(Losses, ReparameterizationFollowsTheGenerator) {
  const GaussianParams q{torch::full({2, 3}, 2.0), torch::full({2, 3}, std::log(4.0))};
  auto g1 = at::detail::createCPUGenerator(3);
  auto g2 = at::detail::createCPUGenerator(3);
  const auto a = reparameterize(q, g1);
  EXPECT_TRUE(torch::equal(a, reparameterize(q, g2)));
  const GaussianParams sharp{torch::full({2, 3}, 2.0), torch::full({2, 3}, -80.0)};
  EXPECT_TRUE(torch::allclose(reparameterize(sharp, g1), torch::full({2, 3}, 2.0)));
}

TEST(Losses, ClassificationChecksLabels) {
  const auto logits = torch::zeros({2, 5});
  EXPECT_NEAR(classification_loss(logits, torch::tensor({0, 4})).item<double>(), std::log(5.0), 1e-6);
  EXPECT_THROW(classification_loss(logits, torch::tensor({0, 5})), LabelError);
  EXPECT_THROW(classification_loss(logits, torch::tensor({-1, 0})), LabelError);
}

TEST(Losses, ContrastiveRewardsAlignedPairs) {
  // Identical views far from the others score better than shuffled pairs.
  auto e = torch::tensor({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}});
  auto shuffled = torch::tensor({{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}});
  EXPECT_LT(contrastive_self(e, 0.5).item<double>(), contrastive_self(shuffled, 0.5).item<double>());
  // With all embeddings equal every partner is as likely as any other: log(2B - 1).
  EXPECT_NEAR(contrastive_self(torch::ones({6, 2}) / std::sqrt(2.0), 0.5).item<double>(), std::log(5.0), 1e-6);
  EXPECT_THROW(contrastive_self(torch::ones({3, 2}), 0.5), BatchError);
  EXPECT_THROW(contrastive_self(torch::ones({2, 2}), 0.0), ConfigError);
}

TEST(Losses, SupervisedContrastiveSkipsAnchorsWithoutPositives) {
  const auto e = torch::nn::functional::normalize(torch::randn({5, 3}));
  const auto with_loner = torch::tensor({0, 0, 1, 1, 2});
  const auto value = contrastive_supervised(e, with_loner, 0.5).item<double>();
  EXPECT_TRUE(std::isfinite(value));
  // Manual value over anchors 0..3.
  const auto logits = e.matmul(e.t()) / 0.5;
  double manual = 0.0;
  for (int i = 0; i < 4; ++i) {
    double denom = 0.0;
    for (int a = 0; a < 5; ++a) {
      if (a != i) denom += std::exp(logits[i][a].item<double>());
    }
    const int partner = i ^ 1;
    manual += -(logits[i][partner].item<double>() - std::log(denom));
  }
  EXPECT_NEAR(value, manual / 4.0, 1e-5);
  EXPECT_THROW(contrastive_supervised(e, torch::tensor({0, 1, 2, 3, 4}), 0.5), DegenerateBatchError);
}

TEST(Losses, LabeledObjectiveRecombinesAndHonoursSwitches) {
  torch::manual_seed(2);
  FeatureNet net(small_config());
  const auto b = batch();
  const FeatureLossWeights w;
  auto g = at::detail::createCPUGenerator(1);
  const auto t = feature_loss_labeled(net, b, w, g);
  EXPECT_NEAR(t.total.item<double>(), combine_terms(t, w).item<double>(), 1e-3);
  EXPECT_NEAR(t.elbo.item<double>(),
              (t.reconstruction - w.beta * (t.kl_subject + t.kl_sleep)).item<double>(), 1e-4);
  EXPECT_LE(t.reconstruction.item<double>(), 0.0);

  auto g2 = at::detail::createCPUGenerator(1);
  const auto s = LossSwitches::without_subject_labels();
  const auto partial = feature_loss_labeled(net, b, w, g2, s);
  EXPECT_EQ(partial.kl_subject.item<double>(), 0.0);
  EXPECT_EQ(partial.ce_subject.item<double>(), 0.0);
  EXPECT_NEAR(partial.ce_sleep.item<double>(), t.ce_sleep.item<double>(), 1e-6);
}

TEST(Losses, UnlabeledObjectiveTouchesOnlyTheSubjectBranch) {
  torch::manual_seed(3);
  FeatureNet net(small_config());
  auto b = batch();
  b.stages = torch::Tensor();
  auto g = at::detail::createCPUGenerator(1);
  feature_loss_unlabeled(net, b, FeatureLossWeights{}, g).backward();
  for (const auto& p : net->named_parameters()) {
    const bool touched = p.value().grad().defined() && p.value().grad().abs().sum().item<double>() > 0.0;
    const bool subject_branch = p.key().rfind("encoder_subject.", 0) == 0 || p.key().rfind("projection_subject.", 0) == 0;
    if (!subject_branch) EXPECT_FALSE(touched) << p.key();
  }
}

}  // namespace
}  // namespace hypnos::features
