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
#include <string>
#include <vector>

#include "ssid/corpus.hpp"
#include "ssid/wav.hpp"

namespace ssid {

// A parametric voice: harmonics of fundamental_hz shaped by a spectral tilt
// and a shared vowel inventory whose formants are scaled per speaker.
struct SyntheticSpeakerSpec {
  std::string speaker_id;
  double fundamental_hz = 120.0;           // [80, 300]
  std::vector<double> formant_offsets;     // relative formant scale, one per formant, |x| <= 0.25
  double spectral_tilt = 1.5;              // harmonic k has weight k^-tilt, tilt in [1.2, 3]
  uint64_t seed = 0;

  void validate() const;
};

// Two speakers are distinct when at least one parameter differs by its margin.
struct SpeakerMargins {
  double fundamental_hz = 6.0;
  double formant_offset = 0.04;
  double spectral_tilt = 0.15;
};

bool distinct(const SyntheticSpeakerSpec& a, const SyntheticSpeakerSpec& b,
              const SpeakerMargins& margins = {});

// n pairwise-distinct speakers with ids prefix000, prefix001, ...; drawn by
// rejection sampling against every previously accepted speaker (including
// `taken`).
std::vector<SyntheticSpeakerSpec> make_speakers(int n, const std::string& prefix, uint64_t seed,
                                                const std::vector<SyntheticSpeakerSpec>& taken = {},
                                                const SpeakerMargins& margins = {});

// Syllable-like segments, each voiced with one vowel of the shared inventory,
// a slow vibrato, per-syllable intonation and a raised-cosine envelope.
// Deterministic per (spec, utt_seed).
Waveform synth_utterance(const SyntheticSpeakerSpec& spec, double duration_s, uint64_t utt_seed,
                         int sample_rate = 16000);

struct ToyCorpusOptions {
  double min_duration_s = 2.0;
  double max_duration_s = 3.0;
  int sample_rate = 16000;
  std::string id_prefix;  // prepended to speaker ids, e.g. to keep test speakers apart
};

struct ToyCorpora {
  std::vector<SyntheticSpeakerSpec> source_speakers;
  std::vector<SyntheticSpeakerSpec> target_speakers;
  TrainingManifest source;  // origin genuine_source
  TrainingManifest target;  // origin genuine_target
};

// Writes out_dir/{source,target}/<speaker>/<utt>.wav plus
// out_dir/source.tsv and out_dir/target.tsv.
ToyCorpora make_toy_corpora(int n_source_speakers, int n_target_speakers, int utts_per_speaker,
                            uint64_t seed, const std::filesystem::path& out_dir,
                            const ToyCorpusOptions& opts = {});

// Small noise (white/brown), music (chords) and babble (overlapped toy voices)
// clips under out_dir/noise/<category>/ and exponentially decaying impulse
// responses under out_dir/rir/.
void make_toy_augment_corpus(const std::filesystem::path& out_dir, uint64_t seed,
                             int sample_rate = 16000);

}  // namespace ssid
