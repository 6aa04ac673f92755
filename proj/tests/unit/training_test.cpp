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

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "hypnos/error.hpp"
#include "hypnos/ingest/synthetic.hpp"
#include "hypnos/train/checkpoint.hpp"
#include "hypnos/train/feature_trainer.hpp"
#include "hypnos/train/pipeline.hpp"
#include "temp_dir.hpp"

namespace hypnos::train {
namespace {

namespace fs = std::filesystem;

features::FeatureNetConfig tiny_net(int rate) {
  features::FeatureNetConfig c;
  c.sampling_rate_hz = rate;
  c.latent_dim_subject = 4;
  c.latent_dim_sleep = 4;
  c.encoder.base_width = 4;
  c.encoder.blocks = {1};
  c.encoder.expansion = 2;
  c.decoder_hidden = 8;
  c.decoder_channels = 4;
  c.prior_hidden = 8;
  c.projection_hidden = 8;
  c.projection_dim = 4;
  return c;
}

sequence::ClassifierConfig tiny_classifier() {
  sequence::ClassifierConfig c;
  c.input_dim = 4;
  c.transformer.layers = 1;
  c.transformer.heads = 2;
  c.transformer.model_dim = 8;
  c.transformer.feed_forward_dim = 8;
  return c;
}

TrainConfig tiny_train() {
  TrainConfig c;
  c.batch_size = 16;
  c.feature_epochs = 2;
  c.classifier_epochs = 2;
  c.patience = 0;
  c.seed = 17;
  return c;
}

std::vector<EpochTable> tables(int subjects, int rate, const std::string& prefix = "S") {
  ingest::SyntheticConfig c;
  c.subjects = subjects;
  c.epochs_per_subject = 40;
  c.sampling_rate_hz = rate;
  c.subject_prefix = prefix;
  c.seed = 23;
  return ingest::make_synthetic(c);
}

TEST(Checkpoint, RoundTripsTensorsAndMetadata) {
  hypnos::testing::TempDir dir("ckpt");
  torch::manual_seed(1);
  features::FeatureNet net(tiny_net(2));
  Checkpoint c;
  c.stage = "feature";
  c.config = {{"note", "x"}};
  c.epoch = 3;
  c.history = nlohmann::json::array({{{"epoch", 1}}});
  c.tensors = module_state(*net);
  const auto id = save_checkpoint(dir / "a", c);
  EXPECT_EQ(id, c.id);
  EXPECT_EQ(id, checkpoint_id(c));

  const auto back = load_checkpoint(dir / "a");
  EXPECT_EQ(back.id, id);
  EXPECT_EQ(back.stage, "feature");
  EXPECT_EQ(back.epoch, 3);
  EXPECT_EQ(back.config, c.config);
  EXPECT_EQ(back.history, c.history);
  EXPECT_EQ(tensor_digest(back.tensors), tensor_digest(c.tensors));
  EXPECT_EQ(checkpoint_id(back), id);

  features::FeatureNet other(tiny_net(2));
  load_module_state(*other, back.tensors);
  EXPECT_EQ(module_digest(*other), module_digest(*net));
  EXPECT_EQ(save_checkpoint(dir / "b", c), id);
}

TEST(Checkpoint, DetectsDamage) {
  hypnos::testing::TempDir dir("ckpt_damage");
  features::FeatureNet net(tiny_net(2));
  Checkpoint c;
  c.stage = "feature";
  c.tensors = module_state(*net);
  save_checkpoint(dir / "c", c);

  EXPECT_THROW(load_checkpoint(dir / "missing"), CheckpointError);
  const auto blob = *fs::directory_iterator(dir / "c" / "tensors");
  fs::resize_file(blob.path(), fs::file_size(blob.path()) - 1);
  EXPECT_THROW(load_checkpoint(dir / "c"), CheckpointError);
  std::ofstream(dir / "c" / "manifest.json") << "{\"id\": 3";
  EXPECT_THROW(load_checkpoint(dir / "c"), CheckpointError);
}

TEST(Checkpoint, StrictLoadingNamesTheProblem) {
  features::FeatureNet small(tiny_net(2));
  features::FeatureNet fast(tiny_net(8));
  auto state = module_state(*fast);
  EXPECT_THROW(load_module_state(*small, state), CheckpointError);
  EXPECT_NO_THROW(load_module_state(*small, state, {}, false));
  state.erase(state.begin());
  EXPECT_THROW(load_module_state(*fast, state), CheckpointError);
}

TEST(Data, VocabularyAndStacking) {
  const auto t = tables(3, 2);
  SubjectVocabulary vocab({"S02", "S00"});
  EXPECT_EQ(vocab.ids(), (std::vector<std::string>{"S00", "S02"}));
  EXPECT_EQ(vocab.index("S02"), 1);
  EXPECT_EQ(vocab.index("S01"), -1);
  const auto data = stack_epochs(t, vocab, true);
  EXPECT_EQ(data.size(), 120);
  EXPECT_EQ(data.epoch_length(), 60);
  EXPECT_EQ(data.subjects[40].item<std::int64_t>(), -1);
  EXPECT_EQ(data.subjects[80].item<std::int64_t>(), 1);
  auto mixed = t;
  mixed.push_back(tables(1, 4, "F").front());
  EXPECT_THROW(stack_epochs(mixed, vocab, true), ShapeError);
}

TEST(FeatureTrainer, ResumingMatchesAnUninterruptedRun) {
  torch::set_num_threads(1);
  const auto t = tables(3, 2);
  SubjectVocabulary vocab({"S00", "S01", "S02"});
  auto net = tiny_net(2);
  net.num_subjects = 3;
  const auto data = stack_epochs(t, vocab, true);

  FeatureTrainer straight(net, tiny_train(), data, {}, {});
  straight.run_epoch();
  straight.run_epoch();

  hypnos::testing::TempDir dir("resume");
  FeatureTrainer first(net, tiny_train(), data, {}, {});
  first.run_epoch();
  auto state = first.state();
  save_checkpoint(dir / "state", state);

  FeatureTrainer resumed(net, tiny_train(), data, {}, {});
  resumed.restore(load_checkpoint(dir / "state"));
  EXPECT_EQ(resumed.epochs_done(), 1);
  resumed.run_epoch();
  EXPECT_EQ(module_digest(*resumed.net()), module_digest(*straight.net()));
  EXPECT_EQ(resumed.history().size(), 2u);
}

TEST(FeatureTrainer, RestoreRejectsOtherStages) {
  const auto t = tables(2, 2);
  SubjectVocabulary vocab({"S00", "S01"});
  auto net = tiny_net(2);
  net.num_subjects = 2;
  FeatureTrainer trainer(net, tiny_train(), stack_epochs(t, vocab, true), {}, {});
  Checkpoint wrong;
  wrong.stage = "classifier-state";
  EXPECT_THROW(trainer.restore(wrong), CheckpointError);
}

TEST(Pipeline, StageTwoLeavesTheEncoderUntouched) {
  torch::set_num_threads(1);
  const auto t = tables(3, 2);
  const auto stage1 = train_feature_stage({t, {}, {}}, tiny_net(2), tiny_train());
  EXPECT_EQ(stage1.checkpoint.stage, "feature");
  EXPECT_EQ(stage1.vocabulary.size(), 3);
  const auto before = tensor_digest(stage1.checkpoint.tensors);

  const auto stage2 = train_classifier_stage(stage1.checkpoint, t, {}, tiny_classifier(), tiny_train(), {10, 0});
  EXPECT_EQ(stage2.encoder_digest_before, stage2.encoder_digest_after);
  EXPECT_EQ(tensor_digest(stage1.checkpoint.tensors), before);
  EXPECT_EQ(stage2.checkpoint.parent_id, stage1.checkpoint.id);
  EXPECT_EQ(stage2.history.size(), 2u);

  auto model = load_model(stage1.checkpoint, stage2.checkpoint);
  EXPECT_EQ(model.sequences.length, 10u);
  EXPECT_EQ(model.sampling_rate_hz, 2);
  const auto x = torch::from_blob(const_cast<float*>(t[0].samples(0).data()), {10, 60}, torch::kFloat32);
  EXPECT_EQ(classify_sequence(model.features, model.classifier, x).stages.size(), 10u);

  auto orphan = stage2.checkpoint;
  orphan.parent_id = "0000";
  EXPECT_THROW(load_model(stage1.checkpoint, orphan), CheckpointError);
  EXPECT_THROW(train_classifier_stage(stage2.checkpoint, t, {}, tiny_classifier(), tiny_train(), {10, 0}),
               CheckpointError);
}

TEST(Pipeline, FineTuneReinitializesRateDependentLayers) {
  torch::set_num_threads(1);
  auto train = tiny_train();
  train.feature_epochs = 1;
  train.classifier_epochs = 1;
  const auto source = tables(2, 2);
  const auto stage1 = train_feature_stage({source, {}, {}}, tiny_net(2), train);
  const auto stage2 = train_classifier_stage(stage1.checkpoint, source, {}, tiny_classifier(), train, {10, 0});

  const auto target = tables(2, 4, "T");
  const auto result = fine_tune(stage1.checkpoint, stage2.checkpoint, {target, {}, {}}, train, {10, 0});
  auto has = [](const std::vector<std::string>& names, const std::string& prefix) {
    return std::any_of(names.begin(), names.end(), [&](const std::string& n) { return n.rfind(prefix, 0) == 0; });
  };
  EXPECT_TRUE(has(result.reinitialized, "encoder_sleep.stem."));
  EXPECT_TRUE(has(result.reinitialized, "decoder.fc2."));
  EXPECT_FALSE(has(result.reinitialized, "encoder_sleep.mean."));
  EXPECT_TRUE(has(result.transferred, "encoder_sleep.mean."));
  EXPECT_TRUE(has(result.transferred, "decoder.fc1."));
  EXPECT_EQ(result.features.net->config().sampling_rate_hz, 4);
  EXPECT_EQ(result.classifier.checkpoint.parent_id, result.features.checkpoint.id);

  auto unrelated = stage2.checkpoint;
  unrelated.parent_id = "other";
  EXPECT_THROW(fine_tune(stage1.checkpoint, unrelated, {target, {}, {}}, train, {10, 0}), CheckpointError);
}

}  // namespace
}  // namespace hypnos::train
