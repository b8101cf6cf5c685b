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

#include <vector>

#include "ssid/corpus.hpp"
#include "ssid/features.hpp"
#include "ssid/wav.hpp"

namespace ssid {

// Full-length log-mel features of a record: computed from the waveform for
// wav media, read from disk for feat media.
FeatureMatrix load_features(const TrainingManifest& manifest, const UtteranceRecord& record,
                            const FrontEndConfig& front_end);

// One decoded item per manifest record, held in memory. Wav records keep
// their samples (the training front end crops and augments them); feat
// records keep their feature matrix.
class MediaCache {
 public:
  struct Item {
    MediaKind kind = MediaKind::kWav;
    Waveform wave;
    FeatureMatrix feats;
  };

  MediaCache(const TrainingManifest& manifest, const FrontEndConfig& front_end);

  const Item& operator[](size_t i) const { return items_[i]; }
  size_t size() const { return items_.size(); }

 private:
  std::vector<Item> items_;
};

}  // namespace ssid
