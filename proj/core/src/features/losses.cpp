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

#include "hypnos/features/losses.hpp"

#include <cmath>
#include <limits>

#include "hypnos/error.hpp"

namespace hypnos::features {

namespace {

void require_finite(const torch::Tensor& value, const char* term) {
  if (!std::isfinite(value.item<double>())) throw NumericalError(std::string("non-finite loss term ") + term);
}

// Row-wise log-softmax of cosine similarities over A(k) = all rows but k.
torch::Tensor anchor_log_probs(const torch::Tensor& embeddings, double rho) {
  if (!(rho > 0.0)) throw ConfigError("contrastive temperature must be positive");
  const auto n = embeddings.size(0);
  auto logits = embeddings.matmul(embeddings.t()) / rho;
  const auto self = torch::eye(n, torch::TensorOptions().dtype(torch::kBool));
  logits = logits.masked_fill(self, -std::numeric_limits<double>::infinity());
  return torch::log_softmax(logits, 1);
}

}  // namespace

torch::Tensor gaussian_kl(const GaussianParams& q, const GaussianParams& p) {
  const auto var_ratio = torch::exp(q.log_variance - p.log_variance);
  const auto diff = q.mean - p.mean;
  const auto per_dim =
      0.5 * (p.log_variance - q.log_variance + var_ratio + diff * diff * torch::exp(-p.log_variance) - 1.0);
  return per_dim.sum(1);
}

torch::Tensor reparameterize(const GaussianParams& posterior, torch::Generator& generator) {
  const auto eps = torch::randn(posterior.mean.sizes(), generator, posterior.mean.options());
  return posterior.mean + torch::exp(0.5 * posterior.log_variance) * eps;
}

torch::Tensor classification_loss(const torch::Tensor& logits, const torch::Tensor& labels) {
  if (labels.numel() > 0) {
    const auto lo = labels.min().item<std::int64_t>();
    const auto hi = labels.max().item<std::int64_t>();
    if (lo < 0 || hi >= logits.size(1)) {
      throw LabelError("label " + std::to_string(lo < 0 ? lo : hi) + " outside vocabulary of size " +
                       std::to_string(logits.size(1)));
    }
  }
  return torch::nn::functional::cross_entropy(logits, labels);
}

torch::Tensor contrastive_self(const torch::Tensor& embeddings, double rho) {
  const auto n = embeddings.size(0);
  if (n < 2 || n % 2 != 0) throw BatchError("contrastive loss needs an even number (>= 2) of views");
  const auto log_probs = anchor_log_probs(embeddings, rho);
  const auto partner = torch::arange(n, torch::kLong).bitwise_xor(1);
  return -log_probs.gather(1, partner.unsqueeze(1)).mean();
}

torch::Tensor contrastive_supervised(const torch::Tensor& embeddings, const torch::Tensor& labels, double rho) {
  const auto n = embeddings.size(0);
  if (n < 2) throw BatchError("supervised contrastive loss needs at least 2 views");
  const auto log_probs = anchor_log_probs(embeddings, rho);
  auto positives = labels.unsqueeze(0).eq(labels.unsqueeze(1));
  positives.fill_diagonal_(false);
  const auto counts = positives.sum(1);
  const auto has_positive = counts.gt(0);
  if (!has_positive.any().item<bool>()) throw DegenerateBatchError("no anchor has a same-label positive");
  const auto mask = positives.to(log_probs.scalar_type());
  // Masked entries include -inf on the diagonal; zero them before summing.
  const auto safe = log_probs.masked_fill(~positives, 0.0);
  const auto per_anchor = -(safe * mask).sum(1).index({has_positive}) /
                          counts.index({has_positive}).to(log_probs.scalar_type());
  return per_anchor.mean();
}

torch::Tensor combine_terms(const FeatureLossTerms& t, const FeatureLossWeights& w, const LossSwitches& s) {
  auto total = torch::zeros({}, t.elbo.options());
  if (s.elbo) total = total - t.elbo;
  if (s.ce_subject) total = total + w.alpha_d * t.ce_subject;
  if (s.ce_sleep) total = total + w.alpha_y * t.ce_sleep;
  if (s.cl_subject) total = total + w.gamma_d * t.cl_subject;
  if (s.scl) total = total + w.gamma_y * t.scl_sleep;
  return total;
}

FeatureLossTerms feature_loss_labeled(FeatureNet& net, const ViewBatch& batch, const FeatureLossWeights& w,
                                      torch::Generator& generator, const LossSwitches& switches) {
  auto [q_d, q_y] = net->encode(batch.x);
  const auto z_d = reparameterize(q_d, generator);
  const auto z_y = reparameterize(q_y, generator);

  FeatureLossTerms t;
  const auto recon = net->decode(z_d, z_y);
  t.reconstruction = -torch::mse_loss(recon, batch.x);
  const auto zero = torch::zeros({}, t.reconstruction.options());
  t.kl_subject = switches.subject_prior ? gaussian_kl(q_d, net->prior_subject(batch.subjects)).mean() : zero;
  t.kl_sleep = gaussian_kl(q_y, net->prior_sleep(batch.stages)).mean();
  t.elbo = t.reconstruction - w.beta * t.kl_subject - w.beta * t.kl_sleep;
  t.ce_subject = switches.ce_subject ? classification_loss(net->classifier_subject(z_d), batch.subjects) : zero;
  t.ce_sleep = classification_loss(net->classifier_sleep(z_y), batch.stages);
  t.cl_subject = contrastive_self(net->projection_subject(z_d), w.rho);
  t.scl_sleep = contrastive_supervised(net->projection_sleep(z_y), batch.stages, w.rho);

  require_finite(t.reconstruction, "reconstruction");
  require_finite(t.kl_subject, "kl_subject");
  require_finite(t.kl_sleep, "kl_sleep");
  require_finite(t.ce_subject, "ce_subject");
  require_finite(t.ce_sleep, "ce_sleep");
  require_finite(t.cl_subject, "cl_subject");
  require_finite(t.scl_sleep, "scl_sleep");
  t.total = combine_terms(t, w, switches);
  return t;
}

torch::Tensor feature_loss_unlabeled(FeatureNet& net, const ViewBatch& batch, const FeatureLossWeights& w,
                                     torch::Generator& generator) {
  const auto q_d = net->encode_subject(batch.x);
  const auto z_d = reparameterize(q_d, generator);
  const auto cl = contrastive_self(net->projection_subject(z_d), w.rho);
  require_finite(cl, "cl_subject");
  return w.gamma_d * cl;
}

}  // namespace hypnos::features
