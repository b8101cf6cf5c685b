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

#include "ssid/media.hpp"

#include "ssid/errors.hpp"
#include "ssid/parallel.hpp"

namespace ssid {

FeatureMatrix load_features(const TrainingManifest& manifest, const UtteranceRecord& record,
                            const FrontEndConfig& front_end) {
  const auto path = manifest.resolve_media(record);
  if (record.media_kind == MediaKind::kFeat) {
    FeatureMatrix f = read_feature_file(path);
    if (f.bins != front_end.n_mels) {
      throw DataError(path.string() + ": " + std::to_string(f.bins) + " mel bins, expected " +
                      std::to_string(front_end.n_mels));
    }
    f.sample_rate = front_end.sample_rate;
    f.hop_s = static_cast<double>(front_end.hop_length) / front_end.sample_rate;
    return f;
  }
  return logmel(read_wav(path), front_end);
}

MediaCache::MediaCache(const TrainingManifest& manifest, const FrontEndConfig& front_end)
    : items_(manifest.size()) {
  parallel_for(static_cast<std::ptrdiff_t>(items_.size()), [&](std::ptrdiff_t i) {
    const UtteranceRecord& r = manifest.records()[i];
    Item& item = items_[i];
    item.kind = r.media_kind;
    if (r.media_kind == MediaKind::kWav) {
      item.wave = read_wav(manifest.resolve_media(r));
      if (item.wave.sample_rate != front_end.sample_rate) {
        throw DataError(r.utt_id + ": sample rate " + std::to_string(item.wave.sample_rate) +
                        " != " + std::to_string(front_end.sample_rate));
      }
    } else {
      item.feats = load_features(manifest, r, front_end);
    }
  });
}

}  // namespace ssid
