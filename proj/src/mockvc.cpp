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

#include "ssid/mockvc.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "ssid/errors.hpp"
#include "ssid/media.hpp"
#include "ssid/parallel.hpp"

namespace ssid {

std::string to_string(MockVariant v) {
  switch (v) {
    case MockVariant::kA: return "A";
    case MockVariant::kB: return "B";
    case MockVariant::kC: return "C";
  }
  return "?";
}

MockVariant parse_mock_variant(const std::string& s) {
  if (s == "A") return MockVariant::kA;
  if (s == "B") return MockVariant::kB;
  if (s == "C") return MockVariant::kC;
  throw ConfigError("unknown mock VC variant '" + s + "' (expected A, B or C)");
}

double default_leak(MockVariant v) {
  switch (v) {
    case MockVariant::kA: return 0.25;
    case MockVariant::kB: return 0.35;
    case MockVariant::kC: return 0.30;
  }
  return 0.0;
}

std::vector<int> band_permutation(MockVariant v, int bins) {
  std::vector<int> perm(bins);
  std::iota(perm.begin(), perm.end(), 0);
  if (v == MockVariant::kB) {
    for (int m = 0; m + 1 < bins; m += 2) std::swap(perm[m], perm[m + 1]);
  } else if (v == MockVariant::kC) {
    for (int g = 0; g + 4 <= bins; g += 4) {
      for (int i = 0; i < 4; ++i) perm[g + i] = g + (i + 1) % 4;
    }
  }
  return perm;
}

void MockVCConfig::validate() const {
  if (vc_model_id.empty()) throw ConfigError("mock VC: empty vc_model_id");
  if (!(leak >= 0.0 && leak <= 1.0)) throw ConfigError("mock VC: leak must be in [0, 1]");
}

namespace {

std::vector<double> band_means(const FeatureMatrix& f) {
  std::vector<double> mean(f.bins, 0.0);
  for (int t = 0; t < f.frames; ++t)
    for (int m = 0; m < f.bins; ++m) mean[m] += f.at(t, m);
  for (double& v : mean) v /= f.frames;
  return mean;
}

}  // namespace

FeatureMatrix mock_convert(const FeatureMatrix& source, const FeatureMatrix& target,
                           const MockVCConfig& config) {
  config.validate();
  if (source.bins != target.bins) {
    throw DataError("mock_convert: mel dimension mismatch (" + std::to_string(source.bins) +
                    " vs " + std::to_string(target.bins) + ")");
  }
  if (source.frames < 1 || target.frames < 1) throw DataError("mock_convert: empty input");
  const std::vector<double> ms = band_means(source);
  const std::vector<double> mt = band_means(target);
  const std::vector<int> perm = band_permutation(config.variant, source.bins);

  FeatureMatrix out(source.frames, source.bins);
  out.sample_rate = source.sample_rate;
  out.hop_s = source.hop_s;
  for (int t = 0; t < source.frames; ++t) {
    for (int m = 0; m < source.bins; ++m) {
      const double mean = config.leak * ms[m] + (1.0 - config.leak) * mt[m];
      const double dev = source.at(t, perm[m]) - ms[perm[m]];
      out.at(t, m) = static_cast<float>(mean + dev);
    }
  }
  return out;
}

std::string converted_utt_id(const ConversionPair& pair, const std::string& vc_model_id) {
  return vc_model_id + "_" + pair.source_utt_id + "_to_" + pair.target_utt_id;
}

TrainingManifest convert_pairs(std::span<const ConversionPair> pairs,
                               const TrainingManifest& sources, const TrainingManifest& targets,
                               const MockVCConfig& config, const FrontEndConfig& front_end,
                               const std::filesystem::path& out_dir) {
  config.validate();
  std::filesystem::create_directories(out_dir);

  // Features of every referenced utterance, computed once.
  std::map<std::string, FeatureMatrix> feats;
  std::vector<std::pair<const TrainingManifest*, const UtteranceRecord*>> needed;
  const auto need = [&](const TrainingManifest& m, const std::string& utt) {
    const UtteranceRecord* r = m.find(utt);
    if (r == nullptr) throw DataError("conversion pair references unknown utterance '" + utt + "'");
    if (feats.emplace(utt, FeatureMatrix{}).second) needed.emplace_back(&m, r);
    return r;
  };
  for (const ConversionPair& p : pairs) {
    need(sources, p.source_utt_id);
    need(targets, p.target_utt_id);
  }
  std::vector<FeatureMatrix> computed(needed.size());
  parallel_for(static_cast<std::ptrdiff_t>(needed.size()), [&](std::ptrdiff_t i) {
    computed[i] = load_features(*needed[i].first, *needed[i].second, front_end);
  });
  for (size_t i = 0; i < needed.size(); ++i) feats[needed[i].second->utt_id] = std::move(computed[i]);

  std::vector<UtteranceRecord> records(pairs.size());
  parallel_for(static_cast<std::ptrdiff_t>(pairs.size()), [&](std::ptrdiff_t i) {
    const ConversionPair& p = pairs[i];
    const UtteranceRecord& src = *sources.find(p.source_utt_id);
    const UtteranceRecord& tgt = *targets.find(p.target_utt_id);
    const FeatureMatrix out = mock_convert(feats.at(p.source_utt_id), feats.at(p.target_utt_id), config);
    UtteranceRecord r;
    r.utt_id = converted_utt_id(p, config.vc_model_id);
    r.media_path = r.utt_id + ".feat";
    r.media_kind = MediaKind::kFeat;
    r.speaker_id = src.speaker_id;
    r.origin = Origin::kConverted;
    r.duration_s = out.frames * out.hop_s;
    r.conversion = ConversionRecord{src.utt_id, src.speaker_id, tgt.utt_id, tgt.speaker_id,
                                    config.vc_model_id};
    write_feature_file(out_dir / r.media_path, out);
    records[i] = std::move(r);
  });
  return TrainingManifest(std::move(records), out_dir);
}

}  // namespace ssid
