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

#include "hypnos/train/pipeline.hpp"

#include <set>

#include "hypnos/error.hpp"
#include "hypnos/train/feature_trainer.hpp"

namespace hypnos::train {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kSleepBranch[] = {"encoder_sleep.", "classifier_sleep.", "projection_sleep."};

bool in_sleep_branch(const std::string& name) {
  for (const char* prefix : kSleepBranch) {
    if (name.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

std::vector<std::string> subject_ids(const std::vector<EpochTable>& tables) {
  std::vector<std::string> out;
  for (const auto& t : tables) out.push_back(t.subject_id());
  return out;
}

}  // namespace

json feature_config_json(const features::FeatureNetConfig& c) {
  return {{"sampling_rate_hz", c.sampling_rate_hz},
          {"num_subjects", c.num_subjects},
          {"latent_dim_subject", c.latent_dim_subject},
          {"latent_dim_sleep", c.latent_dim_sleep},
          {"encoder_base_width", c.encoder.base_width},
          {"encoder_blocks", c.encoder.blocks},
          {"encoder_expansion", c.encoder.expansion},
          {"decoder_hidden", c.decoder_hidden},
          {"decoder_channels", c.decoder_channels},
          {"prior_hidden", c.prior_hidden},
          {"projection_hidden", c.projection_hidden},
          {"projection_dim", c.projection_dim}};
}

features::FeatureNetConfig feature_config_from_json(const json& j) {
  features::FeatureNetConfig c;
  try {
    c.sampling_rate_hz = j.at("sampling_rate_hz").get<int>();
    c.num_subjects = j.at("num_subjects").get<std::int64_t>();
    c.latent_dim_subject = j.at("latent_dim_subject").get<std::int64_t>();
    c.latent_dim_sleep = j.at("latent_dim_sleep").get<std::int64_t>();
    c.encoder.base_width = j.at("encoder_base_width").get<std::int64_t>();
    c.encoder.blocks = j.at("encoder_blocks").get<std::vector<std::int64_t>>();
    c.encoder.expansion = j.at("encoder_expansion").get<std::int64_t>();
    c.decoder_hidden = j.at("decoder_hidden").get<std::int64_t>();
    c.decoder_channels = j.at("decoder_channels").get<std::int64_t>();
    c.prior_hidden = j.at("prior_hidden").get<std::int64_t>();
    c.projection_hidden = j.at("projection_hidden").get<std::int64_t>();
    c.projection_dim = j.at("projection_dim").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("feature-net config in checkpoint: ") + e.what());
  }
  return c;
}

json classifier_config_json(const sequence::ClassifierConfig& c) {
  const auto& t = c.transformer;
  return {{"head", std::string(sequence::head_kind_name(c.head))},
          {"input_dim", c.input_dim},
          {"layers", t.layers},
          {"heads", t.heads},
          {"model_dim", t.model_dim},
          {"feed_forward_dim", t.feed_forward_dim},
          {"dropout", t.dropout},
          {"positional_encoding", t.positional_encoding}};
}

sequence::ClassifierConfig classifier_config_from_json(const json& j) {
  sequence::ClassifierConfig c;
  try {
    c.head = sequence::parse_head_kind(j.at("head").get<std::string>());
    c.input_dim = j.at("input_dim").get<std::int64_t>();
    c.transformer.layers = j.at("layers").get<std::int64_t>();
    c.transformer.heads = j.at("heads").get<std::int64_t>();
    c.transformer.model_dim = j.at("model_dim").get<std::int64_t>();
    c.transformer.feed_forward_dim = j.at("feed_forward_dim").get<std::int64_t>();
    c.transformer.dropout = j.at("dropout").get<double>();
    c.transformer.positional_encoding = j.at("positional_encoding").get<bool>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("classifier config in checkpoint: ") + e.what());
  }
  return c;
}

FeatureStageResult train_feature_stage(const FeatureStageInputs& inputs, features::FeatureNetConfig config,
                                       const TrainConfig& train_config, const fs::path& state_dir) {
  if (inputs.labeled.empty()) throw EmptyDatasetError("stage 1 needs labeled subjects");
  FeatureStageResult result;
  result.vocabulary = SubjectVocabulary(subject_ids(inputs.labeled));
  config.num_subjects = result.vocabulary.size();
  config.sampling_rate_hz = inputs.labeled.front().sampling_rate_hz();

  FeatureTrainer trainer(config, train_config, stack_epochs(inputs.labeled, result.vocabulary, true),
                         stack_epochs(inputs.unlabeled, result.vocabulary, false),
                         stack_epochs(inputs.validation, result.vocabulary, true));
  if (!state_dir.empty() && fs::exists(state_dir / "manifest.json")) trainer.restore(load_checkpoint(state_dir));
  while (!trainer.finished()) {
    trainer.run_epoch();
    if (!state_dir.empty()) {
      auto state = trainer.state();
      save_checkpoint(state_dir, state);
    }
  }
  trainer.run();  // no epochs remain; restores the best weights

  result.net = trainer.net();
  result.history = trainer.history();
  result.best_epoch = trainer.best_epoch();
  auto& ckpt = result.checkpoint;
  ckpt.stage = "feature";
  ckpt.config = {{"feature_net", feature_config_json(config)}, {"subjects", result.vocabulary.ids()}};
  ckpt.epoch = trainer.best_epoch();
  ckpt.history = result.history;
  ckpt.tensors = module_state(*result.net);
  ckpt.id = checkpoint_id(ckpt);
  return result;
}

features::FeatureNet load_feature_net(const Checkpoint& c) {
  if (c.stage != "feature") throw CheckpointError("expected a feature checkpoint, found stage '" + c.stage + "'");
  features::FeatureNet net(feature_config_from_json(c.config.at("feature_net")));
  load_module_state(*net, c.tensors);
  net->eval();
  return net;
}

sequence::SequenceClassifier load_classifier(const Checkpoint& c) {
  if (c.stage != "classifier") {
    throw CheckpointError("expected a classifier checkpoint, found stage '" + c.stage + "'");
  }
  sequence::SequenceClassifier classifier(classifier_config_from_json(c.config.at("classifier")));
  load_module_state(*classifier, c.tensors);
  classifier->eval();
  return classifier;
}

ClassifierStageResult train_classifier_stage(const Checkpoint& feature_checkpoint, const std::vector<EpochTable>& train,
                                             const std::vector<EpochTable>& validation,
                                             sequence::ClassifierConfig config, const TrainConfig& train_config,
                                             const SequenceOptions& sequences, const fs::path& state_dir,
                                             const TensorMap* initial_weights) {
  auto frozen = load_feature_net(feature_checkpoint);
  for (auto& p : frozen->parameters()) p.set_requires_grad(false);
  ClassifierStageResult result;
  result.encoder_digest_before = module_digest(*frozen->encoder_sleep);

  config.input_dim = frozen->config().latent_dim_sleep;
  const auto stride = sequences.effective_stride();
  ClassifierTrainer trainer(config, train_config, build_sequence_set(frozen, train, sequences.length, stride),
                            build_sequence_set(frozen, validation, sequences.length, stride));
  if (initial_weights != nullptr) trainer.initialize_from(*initial_weights);
  if (!state_dir.empty() && fs::exists(state_dir / "manifest.json")) trainer.restore(load_checkpoint(state_dir));
  while (!trainer.finished()) {
    trainer.run_epoch();
    if (!state_dir.empty()) {
      auto state = trainer.state();
      save_checkpoint(state_dir, state);
    }
  }
  trainer.run();

  result.encoder_digest_after = module_digest(*frozen->encoder_sleep);
  result.classifier = trainer.classifier();
  result.history = trainer.history();
  result.best_epoch = trainer.best_epoch();
  auto& ckpt = result.checkpoint;
  ckpt.stage = "classifier";
  ckpt.parent_id = feature_checkpoint.id;
  ckpt.config = {{"classifier", classifier_config_json(config)},
                 {"sequence_length", sequences.length},
                 {"stride", stride},
                 {"sampling_rate_hz", frozen->config().sampling_rate_hz}};
  ckpt.epoch = trainer.best_epoch();
  ckpt.history = result.history;
  ckpt.tensors = module_state(*result.classifier);
  ckpt.id = checkpoint_id(ckpt);
  return result;
}

LoadedModel load_model(const Checkpoint& feature_checkpoint, const Checkpoint& classifier_checkpoint) {
  if (classifier_checkpoint.parent_id != feature_checkpoint.id) {
    throw CheckpointError("classifier checkpoint was trained on feature checkpoint " +
                          classifier_checkpoint.parent_id + ", not " + feature_checkpoint.id);
  }
  LoadedModel m;
  m.features = load_feature_net(feature_checkpoint);
  m.classifier = load_classifier(classifier_checkpoint);
  m.sequences.length = classifier_checkpoint.config.at("sequence_length").get<std::size_t>();
  m.sequences.stride = classifier_checkpoint.config.value("stride", std::size_t{0});
  m.sampling_rate_hz = m.features->config().sampling_rate_hz;
  return m;
}

sequence::DecodedSequence classify_sequence(features::FeatureNet& features, sequence::SequenceClassifier& classifier,
                                            const torch::Tensor& epochs) {
  const auto z = features->extract_sleep_representation(epochs);
  return classifier->decode(z);
}

FineTuneResult fine_tune(const Checkpoint& source_features, const Checkpoint& source_classifier,
                         const FeatureStageInputs& target, const TrainConfig& train_config,
                         const SequenceOptions& sequences) {
  if (target.labeled.empty()) throw EmptyDatasetError("fine-tuning needs labeled target subjects");
  if (source_classifier.parent_id != source_features.id) {
    throw CheckpointError("source classifier does not descend from the source feature checkpoint");
  }
  const auto source_config = feature_config_from_json(source_features.config.at("feature_net"));
  FineTuneResult result;
  result.features.vocabulary = SubjectVocabulary(subject_ids(target.labeled));
  auto config = source_config;
  config.sampling_rate_hz = target.labeled.front().sampling_rate_hz();
  config.num_subjects = result.features.vocabulary.size();
  const bool rate_changed = config.sampling_rate_hz != source_config.sampling_rate_hz;

  FeatureTrainerOptions options;
  options.switches.elbo = false;
  options.switches.subject_prior = false;
  options.switches.ce_subject = false;
  options.switches.cl_subject = false;
  options.trainable_prefixes.assign(std::begin(kSleepBranch), std::end(kSleepBranch));
  FeatureTrainer trainer(config, train_config, stack_epochs(target.labeled, result.features.vocabulary, true),
                         EpochData{}, stack_epochs(target.validation, result.features.vocabulary, true), options);

  TensorMap transfer;
  for (const auto& [name, target_tensor] : module_state(*trainer.net())) {
    const auto it = source_features.tensors.find(name);
    const bool fits = it != source_features.tensors.end() && it->second.sizes() == target_tensor.sizes();
    if (fits && !(rate_changed && features::is_rate_dependent(name))) {
      transfer.emplace(name, it->second);
      result.transferred.push_back(name);
      continue;
    }
    if (in_sleep_branch(name) && !features::is_rate_dependent(name)) {
      throw TransferError("tensor '" + name + "' does not fit the target architecture");
    }
    result.reinitialized.push_back(name);
  }
  trainer.initialize_from(transfer);
  trainer.run();

  auto& fr = result.features;
  fr.net = trainer.net();
  fr.history = trainer.history();
  fr.best_epoch = trainer.best_epoch();
  fr.checkpoint.stage = "feature";
  fr.checkpoint.parent_id = source_features.id;
  fr.checkpoint.config = {{"feature_net", feature_config_json(config)}, {"subjects", fr.vocabulary.ids()}};
  fr.checkpoint.epoch = fr.best_epoch;
  fr.checkpoint.history = fr.history;
  fr.checkpoint.tensors = module_state(*fr.net);
  fr.checkpoint.id = checkpoint_id(fr.checkpoint);

  const auto classifier_config = classifier_config_from_json(source_classifier.config.at("classifier"));
  sequence::SequenceClassifier probe(classifier_config);
  for (const auto& [name, t] : module_state(*probe)) {
    const auto it = source_classifier.tensors.find(name);
    if (it == source_classifier.tensors.end() || it->second.sizes() != t.sizes()) {
      throw TransferError("classifier tensor '" + name + "' does not fit the target architecture");
    }
  }
  result.classifier = train_classifier_stage(fr.checkpoint, target.labeled, target.validation, classifier_config,
                                             train_config, sequences, {}, &source_classifier.tensors);
  return result;
}

}  // namespace hypnos::train
