// Copyright 2026 The ssid Authors.
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

#include "ssid/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <memory>

#include "ssid/errors.hpp"
#include "ssid/synthdata.hpp"
#include "test_util.hpp"

namespace ssid {
namespace {

TEST(CosineLr, Schedule) {
  TrainConfig c;
  c.lr0 = 1e-3;
  c.lr_floor = 0.0;
  EXPECT_DOUBLE_EQ(cosine_lr(c, 0, 100), 1e-3);
  EXPECT_NEAR(cosine_lr(c, 50, 100), 5e-4, 1e-15);
  EXPECT_NEAR(cosine_lr(c, 100, 100), 0.0, 1e-18);
  c.lr_floor = 1e-5;
  EXPECT_NEAR(cosine_lr(c, 100, 100), 1e-5, 1e-18);
  EXPECT_NEAR(cosine_lr(c, 250, 100), 1e-5, 1e-18);
  double prev = 1.0;
  for (int s = 0; s <= 100; ++s) {
    const double lr = cosine_lr(c, s, 100);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lr0 = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.min_crop_s = 3;
  c.max_crop_s = 2;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Adam, FirstStepMovesByLr) {
  // After one step with bias correction, mhat = g and vhat = g^2,
  // so every weight moves by lr * g / (|g| + eps).
  std::vector<Param<float>> p(1);
  p[0].value = {1.0f, -2.0f, 0.5f};
  p[0].grad = {0.3f, -4.0f, 0.0f};
  Adam adam(0.9, 0.999, 1e-8);
  adam.init(p);
  adam.step(p, 0.01);
  EXPECT_NEAR(p[0].value[0], 0.99f, 1e-6);
  EXPECT_NEAR(p[0].value[1], -1.99f, 1e-6);
  EXPECT_FLOAT_EQ(p[0].value[2], 0.5f);
  EXPECT_EQ(adam.steps(), 1);
  // Second step with the same gradient: m and v unchanged after correction.
  adam.step(p, 0.01);
  EXPECT_NEAR(p[0].value[0], 0.98f, 1e-6);
}

// Feature-file corpus of synthetic speakers.
struct FeatCorpus {
  testing::TempDir dir{"trainer"};
  TrainingManifest manifest;

  FeatCorpus(int n_spk, int n_utt, uint64_t seed) {
    const auto spk = make_speakers(n_spk, "spk", seed);
    const LogMelExtractor ex;
    std::vector<UtteranceRecord> recs;
    for (const auto& s : spk) {
      for (int u = 0; u < n_utt; ++u) {
        UtteranceRecord r;
        r.utt_id = s.speaker_id + "_" + std::to_string(u);
        r.speaker_id = s.speaker_id;
        r.origin = Origin::kGenuineSource;
        r.media_kind = MediaKind::kFeat;
        r.media_path = r.utt_id + ".feat";
        write_feature_file(dir / r.media_path, ex.compute(synth_utterance(s, 2.0, seed * 1000 + u).samples));
        recs.push_back(r);
      }
    }
    manifest = TrainingManifest(recs, dir.path());
  }
};

NetworkConfig tiny(int classes) {
  NetworkConfig n;
  n.stem_stride = 2;
  n.widths = {4, 8};
  n.blocks = {1, 1};
  n.embedding_dim = 16;
  n.n_classes = classes;
  return n;
}

TrainConfig quick(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 8;
  c.lr0 = 3e-3;
  c.min_crop_s = 1.0;
  c.max_crop_s = 1.5;
  c.seed = 5;
  return c;
}

TrainOptions no_aug() {
  TrainOptions o;
  o.augment = {1.0, 0.0, 0.0};
  return o;
}

TEST(Train, ZeroEpochsReturnsInitialWeights) {
  FeatCorpus c(2, 4, 1);
  const Checkpoint init = initial_checkpoint(c.manifest, tiny(2), quick(0), {});
  const Checkpoint out = train(c.manifest, tiny(2), quick(0), no_aug());
  EXPECT_EQ(out.params, init.params);
  EXPECT_EQ(out.epochs_done, 0);
}

TEST(Train, RejectsBadInputs) {
  FeatCorpus c(2, 4, 1);
  EXPECT_THROW(train(c.manifest, tiny(3), quick(1), no_aug()), ConfigError);
  EXPECT_THROW(train(TrainingManifest{}, tiny(2), quick(1), no_aug()), DataError);
  NetworkConfig wrong_bins = tiny(2);
  wrong_bins.input_bins = 40;
  EXPECT_THROW(train(c.manifest, wrong_bins, quick(1), no_aug()), ConfigError);
}

TEST(Train, OverfitsTwoSpeakers) {
  FeatCorpus c(2, 20, 3);
  std::vector<EpochStats> hist;
  TrainOptions o = no_aug();
  o.on_epoch = [&](const EpochStats& s) { hist.push_back(s); };
  const Checkpoint ck = train(c.manifest, tiny(2), quick(30), o);
  ASSERT_EQ(hist.size(), 30u);
  EXPECT_EQ(ck.history.size(), 30u);
  EXPECT_LT(hist.back().loss, hist.front().loss);
  // Best of the final three epochs, so a single unlucky crop batch cannot fail it.
  double best = 0;
  for (size_t i = hist.size() - 3; i < hist.size(); ++i) best = std::max(best, hist[i].accuracy);
  EXPECT_GE(best, 0.95);
}

TEST(Train, ResumeIsBitIdentical) {
  FeatCorpus c(3, 6, 4);
  testing::TempDir d("resume");
  const Checkpoint full = train(c.manifest, tiny(3), quick(4), no_aug());

  TrainOptions o = no_aug();
  o.checkpoint_path = d / "ck.sckp";
  struct Interrupt {};
  o.on_epoch = [](const EpochStats& s) {
    if (s.epoch == 2) throw Interrupt{};
  };
  EXPECT_THROW(train(c.manifest, tiny(3), quick(4), o), Interrupt);
  EXPECT_EQ(load_checkpoint(o.checkpoint_path).epochs_done, 2);
  o.on_epoch = nullptr;
  const Checkpoint resumed = train(c.manifest, tiny(3), quick(4), o);
  EXPECT_EQ(resumed.epochs_done, 4);
  EXPECT_EQ(resumed.params, full.params);
  EXPECT_EQ(resumed.buffers, full.buffers);
  EXPECT_EQ(resumed.adam_step, full.adam_step);
}

// Results must not depend on where buffers land in memory.
TEST(Train, IndependentOfHeapLayout) {
  FeatCorpus c(3, 6, 8);
  NetworkConfig net = tiny(3);
  net.widths = {8, 16};
  net.embedding_dim = 24;
  const Checkpoint a = train(c.manifest, net, quick(2), no_aug());
  std::vector<std::unique_ptr<char[]>> junk;
  for (int i = 0; i < 7; ++i) junk.emplace_back(new char[24 + 8 * i]);
  const Checkpoint b = train(c.manifest, net, quick(2), no_aug());
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.buffers, b.buffers);
}

TEST(Checkpoint, RoundtripAndCorruption) {
  FeatCorpus c(2, 4, 2);
  testing::TempDir d("ckpt");
  const Checkpoint ck = train(c.manifest, tiny(2), quick(1), no_aug());
  save_checkpoint(d / "a.sckp", ck);
  const Checkpoint back = load_checkpoint(d / "a.sckp");
  EXPECT_EQ(back.params, ck.params);
  EXPECT_EQ(back.buffers, ck.buffers);
  EXPECT_EQ(back.adam_m, ck.adam_m);
  EXPECT_EQ(back.class_labels, ck.class_labels);
  EXPECT_EQ(back.network, ck.network);
  EXPECT_EQ(back.train, ck.train);
  EXPECT_EQ(back.epochs_done, 1);

  {
    std::ofstream os(d / "bad.sckp", std::ios::binary);
    os << "SCKP garbage";
  }
  EXPECT_THROW(load_checkpoint(d / "bad.sckp"), DataError);
  const auto size = std::filesystem::file_size(d / "a.sckp");
  std::filesystem::copy_file(d / "a.sckp", d / "trunc.sckp");
  std::filesystem::resize_file(d / "trunc.sckp", size - 10);
  EXPECT_THROW(load_checkpoint(d / "trunc.sckp"), DataError);
  EXPECT_THROW(load_checkpoint(d / "missing.sckp"), DataError);
}

TEST(Extract, CardinalityDeterminismAndDuplicates) {
  FeatCorpus c(2, 5, 6);
  const Checkpoint ck = train(c.manifest, tiny(2), quick(1), no_aug());
  const auto a = extract_embeddings(c.manifest, ck);
  const auto b = extract_embeddings(c.manifest, ck);
  ASSERT_EQ(a.size(), c.manifest.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].utt_id, c.manifest.records()[i].utt_id);
    EXPECT_EQ(a[i].vector.size(), 16u);
    EXPECT_EQ(a[i].vector, b[i].vector);
  }
  // Same media under two ids yields the same embedding.
  std::vector<UtteranceRecord> recs = c.manifest.records();
  UtteranceRecord dup = recs[0];
  dup.utt_id = "dup";
  recs.push_back(dup);
  const auto e = extract_embeddings(TrainingManifest(recs, c.manifest.base_dir()), ck);
  EXPECT_EQ(e.back().vector, e.front().vector);
  const EmbeddingStore store = to_store(e);
  EXPECT_EQ(store.size(), recs.size());
  EXPECT_THROW(to_store({a[0], a[0]}), DataError);
}

}  // namespace
}  // namespace ssid
