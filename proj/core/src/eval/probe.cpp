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

#include "hypnos/eval/probe.hpp"

#include <algorithm>
#include <numeric>

#include "hypnos/error.hpp"
#include "hypnos/random.hpp"

namespace hypnos::eval {

ProbeResult linear_probe(const torch::Tensor& features, const torch::Tensor& labels, std::int64_t num_classes,
                         std::uint64_t seed, double train_fraction, double l2) {
  const auto n = features.size(0);
  if (n < 2 || labels.size(0) != n) throw ShapeError("probe needs matching features and labels (n >= 2)");
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed, SeedPurpose::kProbe);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = std::clamp<std::int64_t>(static_cast<std::int64_t>(train_fraction * n), 1, n - 1);
  const auto idx = torch::tensor(order, torch::kInt64);
  const auto train_idx = idx.narrow(0, 0, n_train);
  const auto test_idx = idx.narrow(0, n_train, n - n_train);

  torch::NoGradGuard outer;
  const auto x = features.detach().to(torch::kFloat64);
  const auto y = labels.detach().to(torch::kInt64);
  const auto x_train = x.index_select(0, train_idx);
  const auto mean = x_train.mean(0, true);
  const auto scale = x_train.std(0, false, true).clamp_min(1e-8);
  const auto xs_train = (x_train - mean) / scale;
  const auto xs_test = (x.index_select(0, test_idx) - mean) / scale;
  const auto y_train = y.index_select(0, train_idx);
  const auto y_test = y.index_select(0, test_idx);

  auto weight = torch::zeros({x.size(1), num_classes}, torch::kFloat64).requires_grad_(true);
  auto bias = torch::zeros({num_classes}, torch::kFloat64).requires_grad_(true);
  torch::optim::LBFGS optimizer({weight, bias},
                                torch::optim::LBFGSOptions(1.0).max_iter(200).line_search_fn("strong_wolfe"));
  auto closure = [&] {
    torch::AutoGradMode enable(true);
    optimizer.zero_grad();
    auto loss = torch::nn::functional::cross_entropy(xs_train.matmul(weight) + bias, y_train) +
                l2 * weight.pow(2).sum();
    loss.backward();
    return loss;
  };
  {
    torch::AutoGradMode enable(true);
    optimizer.step(closure);
  }
  auto accuracy = [&](const torch::Tensor& xs, const torch::Tensor& ys) {
    const auto predicted = (xs.matmul(weight) + bias).argmax(1);
    return 100.0 * predicted.eq(ys).to(torch::kFloat64).mean().item<double>();
  };
  return {accuracy(xs_train, y_train), accuracy(xs_test, y_test)};
}

}  // namespace hypnos::eval
