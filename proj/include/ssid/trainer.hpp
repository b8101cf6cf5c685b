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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ssid/augment.hpp"
#include "ssid/corpus.hpp"
#include "ssid/embedding_store.hpp"
#include "ssid/features.hpp"
#include "ssid/network.hpp"

namespace ssid {

struct TrainConfig {
  double lr0 = 1e-3;
  double lr_floor = 0.0;
  int epochs = 30;
  int batch_size = 64;
  uint64_t seed = 1;
  double min_crop_s = 2.0;
  double max_crop_s = 4.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// floor + (lr0 - floor) * (1 + cos(pi * step / total_steps)) / 2
double cosine_lr(const TrainConfig& cfg, int64_t step, int64_t total_steps);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double lr = 0.0;  // learning rate of the epoch's last step
};

// Everything needed to resume training or run inference.
struct Checkpoint {
  NetworkConfig network;
  TrainConfig train;
  FrontEndConfig front_end;
  std::vector<std::string> class_labels;  // speaker inventory, index = class
  std::vector<std::vector<float>> params;
  std::vector<std::vector<float>> buffers;
  std::vector<std::vector<float>> adam_m;
  std::vector<std::vector<float>> adam_v;
  int64_t adam_step = 0;
  int epochs_done = 0;
  std::string rng_state;  // engine state for the next epoch's shuffle
  std::vector<EpochStats> history;

  // Network with the stored weights and running statistics.
  SpeakerNet<float> make_network() const;
};

// Versioned binary container: "SCKP", uint32 version, uint64 header length,
// JSON header (configs, labels, history, optimizer step, RNG state, tensor
// sizes), then float32 blobs for params, buffers, Adam m and Adam v.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Adam with bias correction over a parameter list.
class Adam {
 public:
  Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void init(const std::vector<Param<float>>& params);
  void step(std::vector<Param<float>>& params, double lr);

  int64_t steps() const { return t_; }
  std::vector<std::vector<float>>& m() { return m_; }
  std::vector<std::vector<float>>& v() { return v_; }
  void set_steps(int64_t t) { t_ = t; }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

struct TrainOptions {
  FrontEndConfig front_end;
  AugmentPolicy augment;
  const AugmentCorpus* corpus = nullptr;  // may be null when p_none == 1
  // When set, a checkpoint is written after every epoch and an existing
  // compatible checkpoint is resumed from.
  std::filesystem::path checkpoint_path;
  std::function<void(const EpochStats&)> on_epoch;
};

// Softmax training of the speaker network on the manifest's labels
// (converted records count as their source speaker). Each batch is cropped
// to one duration drawn uniformly in [min_crop_s, max_crop_s]; wav records
// are cropped in samples, augmented and featurized on the fly, feat records
// are cropped to the same frame count. Adam with a per-step cosine schedule.
Checkpoint train(const TrainingManifest& manifest, const NetworkConfig& net,
                 const TrainConfig& cfg, const TrainOptions& opts);

// Checkpoint of an untrained network (also what a zero-epoch run returns).
Checkpoint initial_checkpoint(const TrainingManifest& manifest, const NetworkConfig& net,
                              const TrainConfig& cfg, const FrontEndConfig& front_end);

// One embedding per record from full-length features (no crop, no
// augmentation), inference-mode batch norm, records processed in parallel.
std::vector<SpeakerEmbedding> extract_embeddings(const TrainingManifest& manifest,
                                                 const Checkpoint& ckpt);
EmbeddingStore to_store(const std::vector<SpeakerEmbedding>& embeddings);

// [1, 1, bins, T] input tensor from a T x bins feature matrix.
Tensor<float> to_input(const FeatureMatrix& feats);

}  // namespace ssid
