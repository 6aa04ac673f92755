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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace hypnos::testing {

struct GradCheckResult {
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double worst_element = 0.0;   // largest per-element |analytic - numeric| / max(1, |analytic|, |numeric|)
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
  std::int64_t elements = 0;
};

// Compares autograd gradients of a scalar function with central finite
// differences over every element of `inputs` (double tensors that require
// grad). `fn` must be deterministic for fixed inputs.
inline GradCheckResult check_gradients(const std::function<torch::Tensor()>& fn,
                                       const std::vector<torch::Tensor>& inputs, double step = 1e-4) {
  for (const auto& t : inputs) {
    if (t.grad().defined()) t.mutable_grad().zero_();
  }
  fn().backward();
  GradCheckResult r;
  double diff2 = 0.0;
  double analytic2 = 0.0;
  double numeric2 = 0.0;
  torch::NoGradGuard no_grad;
  for (const auto& t : inputs) {
    const auto grad = t.grad().defined() ? t.grad().clone() : torch::zeros_like(t);
    auto flat = t.view(-1);
    const auto g = grad.reshape(-1);
    for (std::int64_t i = 0; i < flat.numel(); ++i) {
      const double original = flat[i].item<double>();
      flat[i] = original + step;
      const double up = fn().item<double>();
      flat[i] = original - step;
      const double down = fn().item<double>();
      flat[i] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = g[i].item<double>();
      diff2 += (analytic - numeric) * (analytic - numeric);
      analytic2 += analytic * analytic;
      numeric2 += numeric * numeric;
      const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      r.worst_element = std::max(r.worst_element, std::abs(analytic - numeric) / scale);
      ++r.elements;
    }
  }
  const double denom = std::max({std::sqrt(analytic2), std::sqrt(numeric2), 1e-300});
  r.relative_error = std::sqrt(diff2) / denom;
  r.analytic_norm = std::sqrt(analytic2);
  r.numeric_norm = std::sqrt(numeric2);
  return r;
}

// Parameters of a module, in registration order.
inline std::vector<torch::Tensor> parameter_list(const torch::nn::Module& module) {
  std::vector<torch::Tensor> out;
  for (const auto& p : module.parameters()) out.push_back(p);
  return out;
}

inline std::int64_t parameter_count(const torch::nn::Module& module) {
  std::int64_t n = 0;
  for (const auto& p : module.parameters()) n += p.numel();
  return n;
}

}  // namespace hypnos::testing
