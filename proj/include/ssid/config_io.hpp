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

// JSON mappings for the configuration structs. Missing keys keep their
// defaults.

#include "json.hpp"
#include "ssid/augment.hpp"
#include "ssid/features.hpp"
#include "ssid/mockvc.hpp"
#include "ssid/network.hpp"
#include "ssid/trainer.hpp"

namespace ssid {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FrontEndConfig, sample_rate, win_length,
                                                hop_length, fft_size, n_mels, fmin_hz, fmax_hz,
                                                power_floor, mean_norm)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NetworkConfig, input_bins, stem_stride, widths,
                                                blocks, embedding_dim, n_classes, bn_eps,
                                                bn_momentum, pool_eps)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, lr0, lr_floor, epochs, batch_size,
                                                seed, min_crop_s, max_crop_s, beta1, beta2,
                                                adam_eps)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SnrRange, low, high)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AugmentPolicy, p_none, p_noise, p_reverb,
                                                snr_range_db, noise_corpus_dirs, rir_corpus_dirs)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EpochStats, epoch, loss, accuracy, lr)

inline void to_json(nlohmann::json& j, const MockVCConfig& c) {
  j = {{"vc_model_id", c.vc_model_id}, {"leak", c.leak}, {"variant", to_string(c.variant)}};
}

// "leak" defaults to the variant's default leak.
inline void from_json(const nlohmann::json& j, MockVCConfig& c) {
  c.vc_model_id = j.at("vc_model_id").get<std::string>();
  c.variant = parse_mock_variant(j.value("variant", std::string("A")));
  c.leak = j.value("leak", default_leak(c.variant));
}

}  // namespace ssid
