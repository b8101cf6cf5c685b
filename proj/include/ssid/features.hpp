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

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "ssid/rng.hpp"
#include "ssid/wav.hpp"

namespace ssid {

struct FrontEndConfig {
  int sample_rate = 16000;
  int win_length = 320;  // 20 ms
  int hop_length = 160;  // 10 ms
  int fft_size = 512;
  int n_mels = 80;
  double fmin_hz = 20.0;
  double fmax_hz = 7600.0;
  double power_floor = 1e-10;
  // Per-utterance mean subtraction of every mel band. Off by default.
  bool mean_norm = false;

  void validate() const;
};

// T x M log-mel matrix, row-major with one row per frame.
struct FeatureMatrix {
  int frames = 0;
  int bins = 0;
  std::vector<float> data;
  int sample_rate = 16000;
  double hop_s = 0.01;

  FeatureMatrix() = default;
  FeatureMatrix(int t, int m) : frames(t), bins(m), data(static_cast<size_t>(t) * m, 0.0f) {}

  float& at(int t, int m) { return data[static_cast<size_t>(t) * bins + m]; }
  float at(int t, int m) const { return data[static_cast<size_t>(t) * bins + m]; }
  std::span<const float> row(int t) const {
    return {data.data() + static_cast<size_t>(t) * bins, static_cast<size_t>(bins)};
  }
};

// floor((n - win) / hop) + 1; throws DataError when n < win.
int num_frames(size_t n_samples, const FrontEndConfig& cfg = {});

// Hz <-> mel (HTK formula).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Windowed power spectrum -> triangular mel filterbank -> log(power + floor).
// Frames are processed in parallel. The filterbank is stored densely as
// n_mels x (fft_size / 2 + 1).
class LogMelExtractor {
 public:
  explicit LogMelExtractor(const FrontEndConfig& cfg = {});

  FeatureMatrix compute(std::span<const float> samples) const;

  const FrontEndConfig& config() const { return cfg_; }
  const std::vector<float>& window() const { return window_; }
  const std::vector<float>& filterbank() const { return filterbank_; }
  // Center frequency (Hz) of every mel band.
  const std::vector<double>& center_frequencies() const { return centers_; }

 private:
  FrontEndConfig cfg_;
  std::vector<float> window_;
  std::vector<float> filterbank_;
  std::vector<double> centers_;
};

FeatureMatrix logmel(const Waveform& wave, const FrontEndConfig& cfg = {});

// Subtracts every band's time mean in place.
void apply_mean_norm(FeatureMatrix& feats);

struct CropResult {
  std::vector<float> samples;
  size_t offset = 0;    // start index in the source
  bool padded = false;  // true when the source was wrap-padded
};

// Contiguous slice of `len` samples at a uniformly drawn offset. Sources
// shorter than `len` are wrap-padded (tiled) to `len`, offset 0, and flagged.
// Draws: offset = rng() % (n - len + 1), skipped when padding.
CropResult crop_to_length(std::span<const float> wave, size_t len, Rng& rng);

// Draws a duration uniform in [min_s, max_s] (as an integer sample count,
// len = min + rng() % (max - min + 1)), caps it at the input length, then
// crops. Inputs shorter than min_s are wrap-padded to min_s.
CropResult random_crop(std::span<const float> wave, int sample_rate, double min_s, double max_s,
                       Rng& rng);

// Frame-domain analogue for precomputed features: `frames` consecutive rows,
// wrap-padded if the matrix is shorter.
FeatureMatrix crop_frames(const FeatureMatrix& feats, int frames, Rng& rng);

// Feature file container: "SFEA", uint32 frames, uint32 bins, then
// frames * bins little-endian float32 values, row = frame.
void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& feats);
FeatureMatrix read_feature_file(const std::filesystem::path& path);

}  // namespace ssid
