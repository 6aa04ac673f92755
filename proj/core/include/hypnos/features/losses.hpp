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

#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "hypnos/features/config.hpp"
#include "hypnos/features/feature_net.hpp"

namespace hypnos::features {

// KL(q || p) between diagonal Gaussians, summed over latent dimensions: [B].
torch::Tensor gaussian_kl(const GaussianParams& q, const GaussianParams& p);

// mean + exp(log_variance / 2) * eps with eps ~ N(0, I) drawn from generator.
torch::Tensor reparameterize(const GaussianParams& posterior, torch::Generator& generator);

// Cross-entropy averaged over the batch; throws LabelError when a label is
// outside [0, logits.size(1)).
torch::Tensor classification_loss(const torch::Tensor& logits, const torch::Tensor& labels);

// Self-supervised contrastive loss over 2B unit vectors where rows 2k and
// 2k+1 are the two views of source epoch k. Throws BatchError below 2 rows
// or on an odd row count.
torch::Tensor contrastive_self(const torch::Tensor& embeddings, double rho);

// Supervised contrastive loss; anchors without a same-label partner are
// skipped. Throws DegenerateBatchError when no anchor has one.
torch::Tensor contrastive_supervised(const torch::Tensor& embeddings, const torch::Tensor& labels, double rho);

// Which terms of the labeled objective are active.
struct LossSwitches {
  bool elbo = true;           // -L_VAE
  bool subject_prior = true;  // KL against the subject prior inside L_VAE
  bool ce_subject = true;     // alpha_d * L_VAE_d
  bool ce_sleep = true;       // alpha_y * L_VAE_y
  bool cl_subject = true;     // gamma_d * L_CL_d
  bool scl = true;            // gamma_y * L_SCL_y

  // Subject-conditioned terms need subjects inside the training vocabulary.
  static LossSwitches without_subject_labels() {
    LossSwitches s;
    s.subject_prior = false;
    s.ce_subject = false;
    return s;
  }
};

// Unweighted components of the labeled objective plus the weighted total.
struct FeatureLossTerms {
  torch::Tensor reconstruction;  // -MSE; part of L_VAE
  torch::Tensor kl_subject;
  torch::Tensor kl_sleep;
  torch::Tensor elbo;            // L_VAE (to be maximized)
  torch::Tensor ce_subject;      // L_VAE_d
  torch::Tensor ce_sleep;        // L_VAE_y
  torch::Tensor cl_subject;      // L_CL_d
  torch::Tensor scl_sleep;       // L_SCL_y
  torch::Tensor total;
};

// Views batch: x [2B, N], subjects [2B] (vocabulary indices), stages [2B].
struct ViewBatch {
  torch::Tensor x;
  torch::Tensor subjects;
  torch::Tensor stages;  // undefined for unlabeled batches
};

// The labeled objective -L_VAE + a_d L_d + a_y L_y + g_d L_CL + g_y L_SCL.
// Throws NumericalError naming the first non-finite component.
FeatureLossTerms feature_loss_labeled(FeatureNet& net, const ViewBatch& batch, const FeatureLossWeights& weights,
                                      torch::Generator& generator, const LossSwitches& switches = {});

// gamma_d * L_CL_d on an unlabeled views batch. Only the subject branch runs.
torch::Tensor feature_loss_unlabeled(FeatureNet& net, const ViewBatch& batch, const FeatureLossWeights& weights,
                                     torch::Generator& generator);

// Weighted recombination of precomputed terms (used for recomputation checks).
torch::Tensor combine_terms(const FeatureLossTerms& terms, const FeatureLossWeights& weights,
                            const LossSwitches& switches = {});

}  // namespace hypnos::features
