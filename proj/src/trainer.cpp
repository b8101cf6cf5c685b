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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ssid/config_io.hpp"
#include "ssid/errors.hpp"
#include "ssid/media.hpp"
#include "ssid/parallel.hpp"
#include "ssid/rng.hpp"

namespace ssid {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw ConfigError("train: lr0 must be > 0");
  if (!(lr_floor >= 0.0 && lr_floor <= lr0)) throw ConfigError("train: need 0 <= lr_floor <= lr0");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch_size < 2) throw ConfigError("train: batch_size must be >= 2 (batch norm)");
  if (!(min_crop_s > 0.0 && min_crop_s <= max_crop_s)) {
    throw ConfigError("train: need 0 < min_crop_s <= max_crop_s");
  }
}

double cosine_lr(const TrainConfig& cfg, int64_t step, int64_t total_steps) {
  if (total_steps <= 0) return cfg.lr0;
  const double progress = std::clamp(static_cast<double>(step) / total_steps, 0.0, 1.0);
  return cfg.lr_floor + (cfg.lr0 - cfg.lr_floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

SpeakerNet<float> Checkpoint::make_network() const {
  SpeakerNet<float> net(network, 0);
  auto& p = net.params();
  auto& b = net.buffers();
  if (p.size() != params.size() || b.size() != buffers.size()) {
    throw DataError("checkpoint does not match its network configuration");
  }
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i].value.size() != params[i].size()) throw DataError("checkpoint tensor size mismatch");
    p[i].value.assign(params[i].begin(), params[i].end());
  }
  for (size_t i = 0; i < b.size(); ++i) {
    if (b[i].value.size() != buffers[i].size()) throw DataError("checkpoint buffer size mismatch");
    b[i].value.assign(buffers[i].begin(), buffers[i].end());
  }
  return net;
}

namespace {

constexpr uint32_t kCheckpointVersion = 1;

std::vector<size_t> sizes_of(const std::vector<std::vector<float>>& ts) {
  std::vector<size_t> s;
  for (const auto& t : ts) s.push_back(t.size());
  return s;
}

void write_blobs(std::ofstream& os, const std::vector<std::vector<float>>& ts) {
  for (const auto& t : ts) {
    os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
}

std::vector<std::vector<float>> read_blobs(std::ifstream& is, const std::vector<size_t>& sizes) {
  std::vector<std::vector<float>> ts;
  for (size_t n : sizes) {
    std::vector<float> t(n);
    is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(n * sizeof(float)));
    ts.push_back(std::move(t));
  }
  return ts;
}

void capture(Checkpoint& ckpt, const SpeakerNet<float>& net) {
  ckpt.params.clear();
  ckpt.buffers.clear();
  for (const auto& p : net.params()) ckpt.params.emplace_back(p.value.begin(), p.value.end());
  for (const auto& b : net.buffers()) ckpt.buffers.emplace_back(b.value.begin(), b.value.end());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json header = {
      {"network", ckpt.network},
      {"train", ckpt.train},
      {"front_end", ckpt.front_end},
      {"class_labels", ckpt.class_labels},
      {"adam_step", ckpt.adam_step},
      {"epochs_done", ckpt.epochs_done},
      {"rng_state", ckpt.rng_state},
      {"history", ckpt.history},
      {"param_sizes", sizes_of(ckpt.params)},
      {"buffer_sizes", sizes_of(ckpt.buffers)},
      {"adam_m_sizes", sizes_of(ckpt.adam_m)},
      {"adam_v_sizes", sizes_of(ckpt.adam_v)},
  };
  const std::string text = header.dump();
  // Written to a sibling file and renamed so a crash never leaves a torn checkpoint.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw DataError("cannot write checkpoint: " + tmp.string());
    const uint64_t len = text.size();
    os.write("SCKP", 4);
    os.write(reinterpret_cast<const char*>(&kCheckpointVersion), 4);
    os.write(reinterpret_cast<const char*>(&len), 8);
    os.write(text.data(), static_cast<std::streamsize>(len));
    write_blobs(os, ckpt.params);
    write_blobs(os, ckpt.buffers);
    write_blobs(os, ckpt.adam_m);
    write_blobs(os, ckpt.adam_v);
    if (!os) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path.string());
  char magic[4];
  uint32_t version = 0;
  uint64_t len = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&len), 8);
  if (!is || std::memcmp(magic, "SCKP", 4) != 0) throw DataError("not a checkpoint: " + path.string());
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  Checkpoint c;
  try {
    const json h = json::parse(text);
    c.network = h.at("network").get<NetworkConfig>();
    c.train = h.at("train").get<TrainConfig>();
    c.front_end = h.at("front_end").get<FrontEndConfig>();
    c.class_labels = h.at("class_labels").get<std::vector<std::string>>();
    c.adam_step = h.at("adam_step").get<int64_t>();
    c.epochs_done = h.at("epochs_done").get<int>();
    c.rng_state = h.at("rng_state").get<std::string>();
    c.history = h.at("history").get<std::vector<EpochStats>>();
    c.params = read_blobs(is, h.at("param_sizes").get<std::vector<size_t>>());
    c.buffers = read_blobs(is, h.at("buffer_sizes").get<std::vector<size_t>>());
    c.adam_m = read_blobs(is, h.at("adam_m_sizes").get<std::vector<size_t>>());
    c.adam_v = read_blobs(is, h.at("adam_v_sizes").get<std::vector<size_t>>());
  } catch (const json::exception& e) {
    throw DataError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  if (!is) throw DataError("truncated checkpoint: " + path.string());
  return c;
}

void Adam::init(const std::vector<Param<float>>& params) {
  m_.clear();
  v_.clear();
  for (const auto& p : params) {
    m_.emplace_back(p.value.size(), 0.0f);
    v_.emplace_back(p.value.size(), 0.0f);
  }
  t_ = 0;
}

void Adam::step(std::vector<Param<float>>& params, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t k = 0; k < p.value.size(); ++k) {
      const float g = p.grad[k];
      m[k] = b1 * m[k] + (1.0f - b1) * g;
      v[k] = b2 * v[k] + (1.0f - b2) * g * g;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p.value[k] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

namespace {

std::string engine_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void check_class_count(const TrainingManifest& manifest, const NetworkConfig& net) {
  if (manifest.empty()) throw DataError("train: empty manifest");
  if (static_cast<size_t>(net.n_classes) != manifest.speaker_inventory().size()) {
    throw ConfigError("train: network has " + std::to_string(net.n_classes) +
                      " classes but the manifest has " +
                      std::to_string(manifest.speaker_inventory().size()) + " training speakers");
  }
}

// Training and resumed runs must agree on everything that shapes the result.
bool resumable(const Checkpoint& c, const TrainingManifest& manifest, const NetworkConfig& net,
               const TrainConfig& cfg, const FrontEndConfig& fe) {
  return c.network == net && c.train == cfg && json(c.front_end) == json(fe) &&
         c.class_labels == manifest.speaker_inventory() && c.epochs_done <= cfg.epochs;
}

}  // namespace

Checkpoint initial_checkpoint(const TrainingManifest& manifest, const NetworkConfig& net,
                              const TrainConfig& cfg, const FrontEndConfig& front_end) {
  check_class_count(manifest, net);
  cfg.validate();
  Checkpoint c;
  c.network = net;
  c.train = cfg;
  c.front_end = front_end;
  c.class_labels = manifest.speaker_inventory();
  const SpeakerNet<float> model(net, derive_seed(cfg.seed, {0x1417}));
  capture(c, model);
  for (const auto& p : c.params) {
    c.adam_m.emplace_back(p.size(), 0.0f);
    c.adam_v.emplace_back(p.size(), 0.0f);
  }
  c.rng_state = engine_state(Rng(derive_seed(cfg.seed, {0})));
  return c;
}

Tensor<float> to_input(const FeatureMatrix& feats) {
  Tensor<float> x(1, 1, feats.bins, feats.frames);
  for (int t = 0; t < feats.frames; ++t)
    for (int m = 0; m < feats.bins; ++m) x.v[static_cast<size_t>(m) * feats.frames + t] = feats.at(t, m);
  return x;
}

Checkpoint train(const TrainingManifest& manifest, const NetworkConfig& net,
                 const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  opts.front_end.validate();
  opts.augment.validate();
  if (net.input_bins != opts.front_end.n_mels) {
    throw ConfigError("train: network input_bins != front end n_mels");
  }

  Checkpoint ckpt = initial_checkpoint(manifest, net, cfg, opts.front_end);
  if (!opts.checkpoint_path.empty() && std::filesystem::exists(opts.checkpoint_path)) {
    Checkpoint prev = load_checkpoint(opts.checkpoint_path);
    if (resumable(prev, manifest, net, cfg, opts.front_end)) ckpt = std::move(prev);
  }
  if (ckpt.epochs_done >= cfg.epochs) return ckpt;

  SpeakerNet<float> model = ckpt.make_network();
  Adam adam(cfg.beta1, cfg.beta2, cfg.adam_eps);
  adam.init(model.params());
  adam.m() = ckpt.adam_m;
  adam.v() = ckpt.adam_v;
  adam.set_steps(ckpt.adam_step);

  const MediaCache media(manifest, opts.front_end);
  const LogMelExtractor extractor(opts.front_end);
  static const AugmentCorpus kNoCorpus;
  const AugmentCorpus& corpus = opts.corpus != nullptr ? *opts.corpus : kNoCorpus;

  std::vector<int> labels(manifest.size());
  for (size_t i = 0; i < manifest.size(); ++i) {
    labels[i] = manifest.label_index(manifest.records()[i].utt_id);
  }

  const size_t n = manifest.size();
  const size_t batch = std::min<size_t>(cfg.batch_size, n);
  if (batch < 2) throw DataError("train: need at least two records");
  // A trailing batch of one record is dropped (batch norm needs two).
  const size_t steps_per_epoch = n / batch + ((n % batch) >= 2 ? 1 : 0);
  const int64_t total_steps = static_cast<int64_t>(steps_per_epoch) * cfg.epochs;
  const int sr = opts.front_end.sample_rate;
  const auto min_len = static_cast<uint64_t>(std::llround(cfg.min_crop_s * sr));
  const auto max_len = static_cast<uint64_t>(std::llround(cfg.max_crop_s * sr));

  for (int epoch = ckpt.epochs_done; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, {static_cast<uint64_t>(epoch)}));
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);

    double loss_sum = 0.0;
    size_t correct = 0, seen = 0;
    double lr = cfg.lr0;
    for (size_t b = 0; b < steps_per_epoch; ++b) {
      const size_t begin = b * batch;
      const size_t count = std::min(batch, n - begin);
      Rng batch_rng(derive_seed(cfg.seed, {static_cast<uint64_t>(epoch), b, 0xC0}));
      const size_t crop_len = min_len + uniform_index(batch_rng, max_len - min_len + 1);
      const int frames = num_frames(crop_len, opts.front_end);

      Tensor<float> x(static_cast<int>(count), 1, opts.front_end.n_mels, frames);
      std::vector<int> y(count);
      parallel_for(static_cast<std::ptrdiff_t>(count), [&](std::ptrdiff_t i) {
        const size_t rec = order[begin + i];
        Rng rng(derive_seed(cfg.seed, {static_cast<uint64_t>(epoch), b, static_cast<uint64_t>(i) + 1}));
        const MediaCache::Item& item = media[rec];
        FeatureMatrix f;
        if (item.kind == MediaKind::kWav) {
          const CropResult crop = crop_to_length(item.wave.samples, crop_len, rng);
          const AugmentResult aug = augment(crop.samples, opts.augment, corpus, rng);
          f = extractor.compute(aug.samples);
        } else {
          f = crop_frames(item.feats, frames, rng);
          if (opts.front_end.mean_norm) apply_mean_norm(f);
        }
        float* dst = x.sample(static_cast<int>(i));
        for (int t = 0; t < frames; ++t)
          for (int m = 0; m < f.bins; ++m) dst[static_cast<size_t>(m) * frames + t] = f.at(t, m);
        y[i] = labels[rec];
      });

      const auto stats = model.forward_backward(x, y);
      lr = cosine_lr(cfg, adam.steps(), total_steps);
      adam.step(model.params(), lr);
      loss_sum += stats.loss * stats.batch;
      correct += stats.correct;
      seen += stats.batch;
    }

    EpochStats es{epoch + 1, loss_sum / seen, static_cast<double>(correct) / seen, lr};
    ckpt.history.push_back(es);
    ckpt.epochs_done = epoch + 1;
    capture(ckpt, model);
    ckpt.adam_m = adam.m();
    ckpt.adam_v = adam.v();
    ckpt.adam_step = adam.steps();
    ckpt.rng_state = engine_state(Rng(derive_seed(cfg.seed, {static_cast<uint64_t>(epoch + 1)})));
    if (!opts.checkpoint_path.empty()) save_checkpoint(opts.checkpoint_path, ckpt);
    if (opts.on_epoch) opts.on_epoch(es);
  }
  return ckpt;
}

std::vector<SpeakerEmbedding> extract_embeddings(const TrainingManifest& manifest,
                                                 const Checkpoint& ckpt) {
  const SpeakerNet<float> model = ckpt.make_network();
  std::vector<SpeakerEmbedding> out(manifest.size());
  parallel_for(static_cast<std::ptrdiff_t>(manifest.size()), [&](std::ptrdiff_t i) {
    const UtteranceRecord& r = manifest.records()[i];
    FeatureMatrix f = load_features(manifest, r, ckpt.front_end);
    if (f.frames < model.min_frames()) {
      Rng unused(0);
      f = crop_frames(f, model.min_frames(), unused);
    }
    out[i] = {r.utt_id, model.embed(to_input(f))};
  });
  return out;
}

EmbeddingStore to_store(const std::vector<SpeakerEmbedding>& embeddings) {
  EmbeddingStore store;
  for (const auto& e : embeddings) store.add(e.utt_id, e.vector);
  return store;
}

}  // namespace ssid
