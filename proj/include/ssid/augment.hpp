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

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ssid/rng.hpp"

namespace ssid {

struct SnrRange {
  double low = 0.0;
  double high = 15.0;
};

// Exactly one branch per call: untouched, additive noise, or reverberation.
struct AugmentPolicy {
  double p_none = 0.4;
  double p_noise = 0.3;
  double p_reverb = 0.3;
  std::map<std::string, SnrRange> snr_range_db{
      {"noise", {0.0, 15.0}}, {"music", {5.0, 15.0}}, {"babble", {13.0, 20.0}}};
  // category -> directory of WAV files (searched recursively).
  std::map<std::string, std::string> noise_corpus_dirs;
  std::vector<std::string> rir_corpus_dirs;

  void validate() const;
};

struct Clip {
  std::string name;
  std::vector<float> samples;
};

// In-memory noise and impulse-response clips.
struct AugmentCorpus {
  std::map<std::string, std::vector<Clip>> noise;  // by category
  std::vector<Clip> rirs;

  bool empty() const;
  // Loads every *.wav below the policy's directories, in sorted path order.
  static AugmentCorpus load(const AugmentPolicy& policy, int sample_rate);
};

constexpr double kNoNoiseSnr = std::numeric_limits<double>::infinity();

struct NoiseResult {
  std::vector<float> samples;
  double noise_scale = 0.0;
  double clipped_fraction = 0.0;
};

// wave + g * noise, with g chosen so that power(wave) / power(g * noise)
// equals 10^(snr_db / 10). The noise is read cyclically starting at
// noise_offset. snr_db = +inf returns the input unchanged. Output samples
// are clipped to [-1, 1].
NoiseResult add_noise(std::span<const float> wave, std::span<const float> noise, double snr_db,
                      size_t noise_offset = 0);

// Full convolution with the impulse response, truncated to the input length
// and rescaled to the input's peak magnitude. Long responses use FFT
// convolution.
std::vector<float> add_reverb(std::span<const float> wave, std::span<const float> rir);

enum class AugmentBranch { kNone, kNoise, kReverb };
std::string to_string(AugmentBranch b);

struct AugmentResult {
  std::vector<float> samples;
  AugmentBranch branch = AugmentBranch::kNone;
  std::string category;  // noise category, empty otherwise
  std::string clip;      // name of the noise or RIR clip used
  double snr_db = kNoNoiseSnr;
  double clipped_fraction = 0.0;
};

AugmentResult augment(std::span<const float> wave, const AugmentPolicy& policy,
                      const AugmentCorpus& corpus, Rng& rng);

}  // namespace ssid
