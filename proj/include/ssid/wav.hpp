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
#include <vector>

namespace ssid {

// Mono PCM audio held as floats in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a 16-bit mono PCM RIFF/WAVE file. Throws DataError otherwise.
Waveform read_wav(const std::filesystem::path& path);

// Writes 16-bit mono PCM; samples outside [-1, 1] are clipped.
void write_wav(const std::filesystem::path& path, const Waveform& wave);

}  // namespace ssid
