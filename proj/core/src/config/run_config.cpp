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

#include "hypnos/config/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <set>
#include <type_traits>

#include "hypnos/error.hpp"

namespace hypnos::config {

using nlohmann::json;

namespace {

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "size_t config fields are read as uint64");

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(display() + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  void require(const char* key) const {
    if (!j_.contains(key)) throw ConfigError("missing required key '" + join(key) + "'");
  }

  void get(const char* key, bool& out) { read(key, out, "a boolean", [](const json& v) { return v.is_boolean(); }); }
  void get(const char* key, std::string& out) { read(key, out, "a string", [](const json& v) { return v.is_string(); }); }
  void get(const char* key, double& out) { read(key, out, "a number", [](const json& v) { return v.is_number(); }); }
  void get(const char* key, int& out) { read(key, out, "an integer", [](const json& v) { return v.is_number_integer(); }); }
  void get(const char* key, std::int64_t& out) {
    read(key, out, "an integer", [](const json& v) { return v.is_number_integer(); });
  }
  void get(const char* key, std::uint64_t& out) {
    read(key, out, "a nonnegative integer", [](const json& v) {
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    });
  }
  void get(const char* key, std::vector<std::int64_t>& out) {
    read(key, out, "an integer array", [](const json& v) {
      if (!v.is_array()) return false;
      for (const auto& e : v) {
        if (!e.is_number_integer()) return false;
      }
      return true;
    });
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    return ObjectReader(j_.contains(key) ? j_.at(key) : kEmpty, join(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + join(key.c_str()) + "'");
    }
  }

 private:
  template <typename T, typename Check>
  void read(const char* key, T& out, const char* expected, Check check) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!check(v)) throw ConfigError("key '" + join(key) + "' must be " + expected);
    out = v.get<T>();
  }

  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

}  // namespace

RunConfig from_json(const json& j) {
  RunConfig c;
  ObjectReader root(j, "");
  root.require("seed");
  root.require("output_dir");
  root.get("seed", c.seed);
  root.get("output_dir", c.output_dir);
  root.get("variant", c.variant);

  {
    ObjectReader d = root.child("data");
    d.require("manifest");
    d.get("manifest", c.data.manifest);
    d.get("unlabeled_manifest", c.data.unlabeled_manifest);
    d.get("sequence_length", c.data.sequence_length);
    d.get("stride", c.data.stride);
    d.get("folds", c.data.folds);
    d.get("val_fraction", c.data.val_fraction);
    d.get("max_folds", c.data.max_folds);
    d.get("emd_max_samples", c.data.emd_max_samples);
    d.finish();
  }
  {
    ObjectReader f = root.child("feature_net");
    auto& fn = c.feature_net;
    f.get("latent_dim_subject", fn.latent_dim_subject);
    f.get("latent_dim_sleep", fn.latent_dim_sleep);
    f.get("encoder_base_width", fn.encoder.base_width);
    f.get("encoder_blocks", fn.encoder.blocks);
    f.get("encoder_expansion", fn.encoder.expansion);
    f.get("decoder_hidden", fn.decoder_hidden);
    f.get("decoder_channels", fn.decoder_channels);
    f.get("prior_hidden", fn.prior_hidden);
    f.get("projection_hidden", fn.projection_hidden);
    f.get("projection_dim", fn.projection_dim);
    f.finish();
  }
  {
    ObjectReader k = root.child("classifier");
    std::string head(sequence::head_kind_name(c.classifier.head));
    k.get("head", head);
    c.classifier.head = sequence::parse_head_kind(head);
    auto& t = c.classifier.transformer;
    k.get("layers", t.layers);
    k.get("heads", t.heads);
    k.get("model_dim", t.model_dim);
    k.get("feed_forward_dim", t.feed_forward_dim);
    k.get("dropout", t.dropout);
    k.get("positional_encoding", t.positional_encoding);
    k.finish();
  }
  {
    ObjectReader l = root.child("loss");
    auto& w = c.train.weights;
    l.get("alpha_d", w.alpha_d);
    l.get("alpha_y", w.alpha_y);
    l.get("beta", w.beta);
    l.get("gamma_d", w.gamma_d);
    l.get("gamma_y", w.gamma_y);
    l.get("rho", w.rho);
    l.finish();
  }
  {
    ObjectReader a = root.child("augmentation");
    auto& ac = c.train.augmentation;
    a.get("enabled", ac.enabled);
    std::string mode = ac.mode == augment::ViewMode::kCompose ? "compose" : "one_of";
    a.get("mode", mode);
    if (mode == "one_of") {
      ac.mode = augment::ViewMode::kOneOf;
    } else if (mode == "compose") {
      ac.mode = augment::ViewMode::kCompose;
    } else {
      throw ConfigError("augmentation.mode must be 'one_of' or 'compose'");
    }
    a.get("min_chunks", ac.min_chunks);
    a.get("max_chunks", ac.max_chunks);
    a.get("min_crop_ratio", ac.min_crop_ratio);
    a.get("max_crop_ratio", ac.max_crop_ratio);
    a.finish();
  }
  {
    ObjectReader t = root.child("train");
    auto& tc = c.train;
    t.get("batch_size", tc.batch_size);
    t.get("learning_rate", tc.learning_rate);
    t.get("feature_epochs", tc.feature_epochs);
    t.get("classifier_epochs", tc.classifier_epochs);
    t.get("patience", tc.patience);
    t.get("clip_norm", tc.clip_norm);
    t.finish();
  }
  root.finish();

  c.train.seed = c.seed;
  const std::string variant = c.variant;
  c = apply_variant(std::move(c), variant);
  if (c.data.sequence_length < 1) throw ConfigError("data.sequence_length must be at least 1");
  if (!(c.data.val_fraction >= 0.0 && c.data.val_fraction < 1.0)) {
    throw ConfigError("data.val_fraction must be in [0, 1)");
  }
  c.train.validate();
  c.classifier.transformer.validate();
  return c;
}

json to_json(const RunConfig& c) {
  const auto& fn = c.feature_net;
  const auto& t = c.classifier.transformer;
  const auto& w = c.train.weights;
  const auto& a = c.train.augmentation;
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["variant"] = c.variant;
  j["data"] = {{"manifest", c.data.manifest},
               {"unlabeled_manifest", c.data.unlabeled_manifest},
               {"sequence_length", c.data.sequence_length},
               {"stride", c.data.stride},
               {"folds", c.data.folds},
               {"val_fraction", c.data.val_fraction},
               {"max_folds", c.data.max_folds},
               {"emd_max_samples", c.data.emd_max_samples}};
  j["feature_net"] = {{"latent_dim_subject", fn.latent_dim_subject},
                      {"latent_dim_sleep", fn.latent_dim_sleep},
                      {"encoder_base_width", fn.encoder.base_width},
                      {"encoder_blocks", fn.encoder.blocks},
                      {"encoder_expansion", fn.encoder.expansion},
                      {"decoder_hidden", fn.decoder_hidden},
                      {"decoder_channels", fn.decoder_channels},
                      {"prior_hidden", fn.prior_hidden},
                      {"projection_hidden", fn.projection_hidden},
                      {"projection_dim", fn.projection_dim}};
  j["classifier"] = {{"head", std::string(sequence::head_kind_name(c.classifier.head))},
                     {"layers", t.layers},
                     {"heads", t.heads},
                     {"model_dim", t.model_dim},
                     {"feed_forward_dim", t.feed_forward_dim},
                     {"dropout", t.dropout},
                     {"positional_encoding", t.positional_encoding}};
  j["loss"] = {{"alpha_d", w.alpha_d}, {"alpha_y", w.alpha_y}, {"beta", w.beta},
               {"gamma_d", w.gamma_d}, {"gamma_y", w.gamma_y}, {"rho", w.rho}};
  j["augmentation"] = {{"enabled", a.enabled},
                       {"mode", a.mode == augment::ViewMode::kCompose ? "compose" : "one_of"},
                       {"min_chunks", a.min_chunks},
                       {"max_chunks", a.max_chunks},
                       {"min_crop_ratio", a.min_crop_ratio},
                       {"max_crop_ratio", a.max_crop_ratio}};
  j["train"] = {{"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"feature_epochs", c.train.feature_epochs},
                {"classifier_epochs", c.train.classifier_epochs},
                {"patience", c.train.patience},
                {"clip_norm", c.train.clip_norm}};
  return j;
}

void apply_override(json& j, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + dotted_key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = parse_value(value);
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    if (!node->is_object()) throw ConfigError("override key '" + dotted_key + "' descends into a non-object");
    start = dot + 1;
  }
}

void apply_environment(json& j, char** envp) {
  if (envp == nullptr) return;
  const std::size_t prefix_len = std::strlen(kEnvPrefix);
  std::vector<std::pair<std::string, std::string>> found;
  for (char** e = envp; *e != nullptr; ++e) {
    std::string entry(*e);
    if (entry.compare(0, prefix_len, kEnvPrefix) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(prefix_len, eq - prefix_len);
    std::string key;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (name[i] == '_' && i + 1 < name.size() && name[i + 1] == '_') {
        key += '.';
        ++i;
      } else {
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(name[i])));
      }
    }
    found.emplace_back(key, entry.substr(eq + 1));
  }
  // Deterministic order regardless of environment layout.
  std::sort(found.begin(), found.end());
  for (const auto& [key, value] : found) apply_override(j, key, value);
}

RunConfig load_run_config(const std::filesystem::path& path, char** envp,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  apply_environment(j, envp);
  for (const auto& [key, value] : overrides) apply_override(j, key, value);
  RunConfig c = from_json(j);
  // Relative dataset paths resolve against the config file's directory.
  const auto base = path.parent_path();
  auto resolve = [&base](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.data.manifest);
  resolve(c.data.unlabeled_manifest);
  resolve(c.output_dir);
  return c;
}

RunConfig apply_variant(RunConfig c, const std::string& variant) {
  c.variant = variant;
  if (variant == "full") return c;
  if (variant == "no_crf") {
    if (c.classifier.head == sequence::HeadKind::kTransformerCrf) c.classifier.head = sequence::HeadKind::kTransformerLinear;
    if (c.classifier.head == sequence::HeadKind::kLogisticCrf) c.classifier.head = sequence::HeadKind::kLogistic;
  } else if (variant == "no_vae_losses") {
    c.train.ablation.no_vae_losses = true;
  } else if (variant == "no_scl") {
    c.train.ablation.no_scl = true;
  } else if (variant == "no_augmentation") {
    c.train.ablation.no_augmentation = true;
  } else if (variant == "logistic") {
    c.classifier.head = sequence::HeadKind::kLogistic;
  } else if (variant == "logistic_crf") {
    c.classifier.head = sequence::HeadKind::kLogisticCrf;
  } else {
    throw ConfigError("unknown variant '" + variant + "'");
  }
  return c;
}

std::vector<std::pair<std::string, RunConfig>> ablation_variants(const RunConfig& base) {
  std::vector<std::pair<std::string, RunConfig>> out;
  for (const char* v : {"no_crf", "no_vae_losses", "no_scl", "no_augmentation", "logistic_crf", "logistic"}) {
    out.emplace_back(v, apply_variant(base, v));
  }
  return out;
}

}  // namespace hypnos::config
