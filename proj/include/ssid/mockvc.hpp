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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ssid/corpus.hpp"
#include "ssid/features.hpp"

namespace ssid {

// Deterministic feature-domain stand-in for a voice conversion model.
//
//   out[t][m] = leak * mean_s[m] + (1 - leak) * mean_t[m]
//             + (src[t][perm[m]] - mean_s[perm[m]])
//
// The output keeps the source's frame count and temporal dynamics (through
// the variant's band permutation) and moves the per-band mean towards the
// target by (1 - leak).
enum class MockVariant { kA, kB, kC };

std::string to_string(MockVariant v);
MockVariant parse_mock_variant(const std::string& s);

// Variant parameter sets:
//   A: identity band map,                      default leak 0.25
//   B: swap neighbouring bands (2k <-> 2k+1),  default leak 0.35
//   C: rotate bands within groups of four,     default leak 0.30
double default_leak(MockVariant v);
std::vector<int> band_permutation(MockVariant v, int bins);

struct MockVCConfig {
  std::string vc_model_id;
  double leak = 0.25;
  MockVariant variant = MockVariant::kA;

  void validate() const;
  static MockVCConfig for_variant(std::string id, MockVariant v) {
    return {std::move(id), default_leak(v), v};
  }
};

FeatureMatrix mock_convert(const FeatureMatrix& source, const FeatureMatrix& target,
                           const MockVCConfig& config);

// Converts every pair with `config`, writing one feature file per converted
// utterance into out_dir. Source and target utterances are looked up in the
// given manifests (wav or feat media). Returns a manifest of converted
// records with media paths relative to out_dir.
TrainingManifest convert_pairs(std::span<const ConversionPair> pairs,
                               const TrainingManifest& sources, const TrainingManifest& targets,
                               const MockVCConfig& config, const FrontEndConfig& front_end,
                               const std::filesystem::path& out_dir);

// Id of the converted utterance for (pair, model).
std::string converted_utt_id(const ConversionPair& pair, const std::string& vc_model_id);

}  // namespace ssid
