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

#include "hypnos/train/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "hypnos/error.hpp"

namespace hypnos::train {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "blob format assumes a little-endian host");

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

torch::Tensor as_f32(const torch::Tensor& t) { return t.detach().to(torch::kFloat32).contiguous(); }

std::string blob_name(const std::string& tensor_name) { return tensor_name + ".f32"; }

}  // namespace

TensorMap module_state(const torch::nn::Module& module, const std::string& prefix) {
  TensorMap out;
  for (const auto& p : module.named_parameters(true)) out[prefix + p.key()] = p.value().detach().clone();
  for (const auto& b : module.named_buffers(true)) out[prefix + b.key()] = b.value().detach().clone();
  return out;
}

void load_module_state(torch::nn::Module& module, const TensorMap& tensors, const std::string& prefix, bool strict) {
  torch::NoGradGuard no_grad;
  auto assign = [&](const std::string& name, torch::Tensor& target) {
    const auto it = tensors.find(prefix + name);
    if (it == tensors.end()) {
      if (strict) throw CheckpointError("checkpoint lacks tensor '" + prefix + name + "'");
      return;
    }
    if (it->second.sizes() != target.sizes()) {
      if (!strict) return;
      throw CheckpointError("tensor '" + prefix + name + "' has shape " + c10::str(it->second.sizes()) +
                            ", model expects " + c10::str(target.sizes()));
    }
    target.copy_(it->second.to(target.scalar_type()));
  };
  for (auto& p : module.named_parameters(true)) assign(p.key(), p.value());
  for (auto& b : module.named_buffers(true)) assign(b.key(), b.value());
}

std::string tensor_digest(const TensorMap& tensors) {
  std::uint64_t h = kFnvOffset;
  for (const auto& [name, t] : tensors) {
    fnv(h, name.data(), name.size());
    for (auto s : t.sizes()) fnv(h, &s, sizeof s);
    const auto c = as_f32(t);
    fnv(h, c.data_ptr(), static_cast<std::size_t>(c.numel()) * sizeof(float));
  }
  return hex(h);
}

std::string module_digest(const torch::nn::Module& module) { return tensor_digest(module_state(module)); }

std::string checkpoint_id(const Checkpoint& ckpt) {
  std::uint64_t h = kFnvOffset;
  const std::string body = tensor_digest(ckpt.tensors) + ckpt.stage + ckpt.parent_id + ckpt.config.dump();
  fnv(h, body.data(), body.size());
  return hex(h);
}

std::string save_checkpoint(const fs::path& dir, Checkpoint& ckpt) {
  ckpt.id = checkpoint_id(ckpt);

  const fs::path tmp = dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp / "tensors");
  json manifest;
  manifest["format"] = "hypnos-checkpoint/1";
  manifest["id"] = ckpt.id;
  manifest["stage"] = ckpt.stage;
  manifest["parent_id"] = ckpt.parent_id;
  manifest["config"] = ckpt.config;
  manifest["epoch"] = ckpt.epoch;
  manifest["history"] = ckpt.history;
  manifest["extra"] = ckpt.extra;
  manifest["tensors"] = json::array();
  for (const auto& [name, t] : ckpt.tensors) {
    const auto c = as_f32(t);
    manifest["tensors"].push_back({{"name", name}, {"shape", c.sizes().vec()}, {"file", blob_name(name)}});
    std::ofstream out(tmp / "tensors" / blob_name(name), std::ios::binary | std::ios::trunc);
    out.write(static_cast<const char*>(c.data_ptr()), static_cast<std::streamsize>(c.numel() * sizeof(float)));
    if (!out) throw CheckpointError("cannot write tensor blob for '" + name + "'");
  }
  {
    std::ofstream out(tmp / "manifest.json", std::ios::trunc);
    out << manifest.dump(2) << "\n";
    if (!out) throw CheckpointError("cannot write checkpoint manifest under " + tmp.string());
  }
  fs::remove_all(dir);
  if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
  fs::rename(tmp, dir);
  return ckpt.id;
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw CheckpointError("no checkpoint at " + dir.string());
  Checkpoint ckpt;
  try {
    const json m = json::parse(in);
    ckpt.id = m.at("id").get<std::string>();
    ckpt.stage = m.at("stage").get<std::string>();
    ckpt.parent_id = m.value("parent_id", "");
    ckpt.config = m.value("config", json::object());
    ckpt.epoch = m.value("epoch", 0);
    ckpt.history = m.value("history", json::array());
    ckpt.extra = m.value("extra", json::object());
    for (const auto& entry : m.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
      auto t = torch::empty(shape, torch::kFloat32);
      const fs::path blob = dir / "tensors" / entry.at("file").get<std::string>();
      std::ifstream b(blob, std::ios::binary);
      const auto bytes = static_cast<std::streamsize>(t.numel() * sizeof(float));
      if (!b || (bytes > 0 && !b.read(static_cast<char*>(t.data_ptr()), bytes))) {
        throw CheckpointError("tensor blob " + blob.string() + " is missing or truncated");
      }
      if (b.peek() != std::char_traits<char>::eof()) {
        throw CheckpointError("tensor blob " + blob.string() + " is longer than its shape");
      }
      ckpt.tensors.emplace(name, std::move(t));
    }
  } catch (const json::exception& e) {
    throw CheckpointError("malformed checkpoint manifest in " + dir.string() + ": " + e.what());
  }
  return ckpt;
}

TensorMap adam_state(torch::optim::Adam& optimizer, const torch::nn::Module& module) {
  TensorMap out;
  auto& state = optimizer.state();
  for (const auto& p : module.named_parameters(true)) {
    const auto it = state.find(p.value().unsafeGetTensorImpl());
    if (it == state.end()) continue;
    const auto& s = static_cast<const torch::optim::AdamParamState&>(*it->second);
    out["optim." + p.key() + ".exp_avg"] = s.exp_avg().detach().clone();
    out["optim." + p.key() + ".exp_avg_sq"] = s.exp_avg_sq().detach().clone();
    out["optim." + p.key() + ".step"] = torch::tensor({static_cast<float>(s.step())});
  }
  return out;
}

void load_adam_state(torch::optim::Adam& optimizer, const torch::nn::Module& module, const TensorMap& tensors) {
  auto& state = optimizer.state();
  for (const auto& p : module.named_parameters(true)) {
    const std::string base = "optim." + p.key();
    const auto avg = tensors.find(base + ".exp_avg");
    if (avg == tensors.end()) continue;
    auto s = std::make_unique<torch::optim::AdamParamState>();
    s->exp_avg(avg->second.to(p.value().scalar_type()).clone());
    s->exp_avg_sq(tensors.at(base + ".exp_avg_sq").to(p.value().scalar_type()).clone());
    s->step(static_cast<std::int64_t>(tensors.at(base + ".step").item<float>()));
    state[p.value().unsafeGetTensorImpl()] = std::move(s);
  }
}

}  // namespace hypnos::train
