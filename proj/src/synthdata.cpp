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

#include "ssid/synthdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "ssid/errors.hpp"
#include "ssid/parallel.hpp"
#include "ssid/rng.hpp"

namespace ssid {
namespace {

constexpr int kFormants = 3;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Shared vowel inventory (F1, F2, F3 in Hz).
constexpr std::array<std::array<double, kFormants>, 5> kVowels{{
    {730, 1090, 2440},
    {270, 2290, 3010},
    {300, 870, 2240},
    {530, 1840, 2480},
    {570, 840, 2410},
}};
constexpr std::array<double, kFormants> kBandwidths{90, 120, 170};

constexpr double kVibratoDepth = 0.01;
constexpr double kIntonation = 0.02;
constexpr double kFormantGain = 1.0;  // keeps the fundamental the strongest harmonic
constexpr double kTopHz = 7800.0;

double resonance(double f, double centre, double bw) {
  const double x = (f - centre) / bw;
  return 1.0 / (1.0 + x * x);
}

}  // namespace

void SyntheticSpeakerSpec::validate() const {
  if (speaker_id.empty()) throw ConfigError("synthetic speaker without id");
  if (!(fundamental_hz >= 80.0 && fundamental_hz <= 300.0)) {
    throw ConfigError("speaker " + speaker_id + ": fundamental must lie in [80, 300] Hz");
  }
  if (formant_offsets.size() != kFormants) {
    throw ConfigError("speaker " + speaker_id + ": expected 3 formant offsets");
  }
  for (double o : formant_offsets) {
    if (!(std::abs(o) <= 0.25)) throw ConfigError("speaker " + speaker_id + ": formant offset out of range");
  }
  if (!(spectral_tilt >= 1.2 && spectral_tilt <= 3.0)) {
    throw ConfigError("speaker " + speaker_id + ": spectral tilt must lie in [1.2, 3]");
  }
}

bool distinct(const SyntheticSpeakerSpec& a, const SyntheticSpeakerSpec& b,
              const SpeakerMargins& m) {
  if (std::abs(a.fundamental_hz - b.fundamental_hz) >= m.fundamental_hz) return true;
  if (std::abs(a.spectral_tilt - b.spectral_tilt) >= m.spectral_tilt) return true;
  const size_t n = std::min(a.formant_offsets.size(), b.formant_offsets.size());
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(a.formant_offsets[i] - b.formant_offsets[i]) >= m.formant_offset) return true;
  }
  return false;
}

std::vector<SyntheticSpeakerSpec> make_speakers(int n, const std::string& prefix, uint64_t seed,
                                                const std::vector<SyntheticSpeakerSpec>& taken,
                                                const SpeakerMargins& margins) {
  if (n < 0) throw ConfigError("make_speakers: negative count");
  Rng rng(derive_seed(seed, {0x5b}));
  std::vector<SyntheticSpeakerSpec> all = taken;
  std::vector<SyntheticSpeakerSpec> out;
  for (int i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%03d", i);
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      SyntheticSpeakerSpec s;
      s.speaker_id = prefix + id;
      s.fundamental_hz = uniform_real(rng, 85.0, 290.0);
      for (int f = 0; f < kFormants; ++f) s.formant_offsets.push_back(uniform_real(rng, -0.2, 0.2));
      s.spectral_tilt = uniform_real(rng, 1.3, 2.5);
      s.seed = derive_seed(seed, {static_cast<uint64_t>(i), 0x5eed});
      placed = std::all_of(all.begin(), all.end(),
                           [&](const SyntheticSpeakerSpec& o) { return distinct(s, o, margins); });
      if (placed) {
        all.push_back(s);
        out.push_back(std::move(s));
      }
    }
    if (!placed) throw ConfigError("make_speakers: cannot place speaker " + prefix + id);
  }
  return out;
}

Waveform synth_utterance(const SyntheticSpeakerSpec& spec, double duration_s, uint64_t utt_seed,
                         int sample_rate) {
  spec.validate();
  if (!(duration_s >= 2.0)) throw ConfigError("synth_utterance: duration must be >= 2 s");
  if (sample_rate < 16000) throw ConfigError("synth_utterance: sample rate must be >= 16 kHz");
  Rng rng(derive_seed(spec.seed, {utt_seed}));
  const auto n = static_cast<size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> y(n, 0.0);

  const double vib_rate = uniform_real(rng, 4.0, 6.0);
  const double vib_phase = uniform_real(rng, 0.0, kTwoPi);
  const int harmonics = static_cast<int>(kTopHz / (spec.fundamental_hz * (1.0 + kIntonation + kVibratoDepth)));
  std::vector<double> amp(harmonics + 1);
  double phase = uniform_real(rng, 0.0, kTwoPi);

  size_t pos = 0;
  while (pos < n) {
    const auto len = static_cast<size_t>(uniform_real(rng, 0.18, 0.32) * sample_rate);
    const auto gap = static_cast<size_t>(uniform_real(rng, 0.0, 0.04) * sample_rate);
    const auto& vowel = kVowels[uniform_index(rng, kVowels.size())];
    const double f0 = spec.fundamental_hz * (1.0 + uniform_real(rng, -kIntonation, kIntonation));
    const double level = uniform_real(rng, 0.7, 1.0);
    for (int k = 1; k <= harmonics; ++k) {
      const double f = k * f0;
      double peak = 0.0;
      for (int j = 0; j < kFormants; ++j) {
        peak = std::max(peak, resonance(f, vowel[j] * (1.0 + spec.formant_offsets[j]), kBandwidths[j]));
      }
      amp[k] = level * std::pow(k, -spec.spectral_tilt) * (1.0 + kFormantGain * peak);
    }
    const size_t end = std::min(n, pos + len);
    const size_t ramp = std::max<size_t>(1, std::min(len / 2, static_cast<size_t>(0.03 * sample_rate)));
    for (size_t i = pos; i < end; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      const double fi = f0 * (1.0 + kVibratoDepth * std::sin(kTwoPi * vib_rate * t + vib_phase));
      phase += kTwoPi * fi / sample_rate;
      if (phase > kTwoPi) phase -= kTwoPi;
      const size_t into = i - pos, left = pos + len - 1 - i;
      double env = 1.0;
      if (into < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * into / ramp);
      if (left < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * left / ramp));
      // sin(k phase) by the Chebyshev recurrence.
      const double c2 = 2.0 * std::cos(phase);
      double s_prev = 0.0, s_cur = std::sin(phase), acc = 0.0;
      for (int k = 1; k <= harmonics; ++k) {
        acc += amp[k] * s_cur;
        const double s_next = c2 * s_cur - s_prev;
        s_prev = s_cur;
        s_cur = s_next;
      }
      y[i] = env * acc;
    }
    pos = end + gap;
  }

  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  const double gain = peak > 0.0 ? uniform_real(rng, 0.25, 0.5) / peak : 0.0;
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    // Low breath noise keeps silent gaps off the log floor.
    w.samples[i] = static_cast<float>(gain * y[i] + 1e-4 * uniform_real(rng, -1.0, 1.0));
  }
  return w;
}

ToyCorpora make_toy_corpora(int n_source_speakers, int n_target_speakers, int utts_per_speaker,
                            uint64_t seed, const std::filesystem::path& out_dir,
                            const ToyCorpusOptions& opts) {
  if (n_source_speakers < 2 || n_target_speakers < 2) {
    throw ConfigError("make_toy_corpora: need at least 2 speakers per side");
  }
  if (utts_per_speaker < 1) throw ConfigError("make_toy_corpora: need at least 1 utterance per speaker");
  if (!(opts.min_duration_s >= 2.0 && opts.min_duration_s <= opts.max_duration_s)) {
    throw ConfigError("make_toy_corpora: need 2 <= min_duration_s <= max_duration_s");
  }
  ToyCorpora out;
  out.source_speakers = make_speakers(n_source_speakers, opts.id_prefix + "src", derive_seed(seed, {1}));
  out.target_speakers = make_speakers(n_target_speakers, opts.id_prefix + "tgt", derive_seed(seed, {2}), out.source_speakers);

  struct Job {
    const SyntheticSpeakerSpec* spec;
    std::string side;
    int side_index;
    int utt;
  };
  std::vector<Job> jobs;
  for (const auto& s : out.source_speakers)
    for (int u = 0; u < utts_per_speaker; ++u) jobs.push_back({&s, "source", 0, u});
  for (const auto& s : out.target_speakers)
    for (int u = 0; u < utts_per_speaker; ++u) jobs.push_back({&s, "target", 1, u});

  std::vector<UtteranceRecord> records(jobs.size());
  for (const auto& side : {"source", "target"}) {
    for (const auto& s : side == std::string("source") ? out.source_speakers : out.target_speakers) {
      std::filesystem::create_directories(out_dir / side / s.speaker_id);
    }
  }
  parallel_for(static_cast<std::ptrdiff_t>(jobs.size()), [&](std::ptrdiff_t i) {
    const Job& j = jobs[i];
    const uint64_t utt_seed = static_cast<uint64_t>(j.utt);
    Rng rng(derive_seed(j.spec->seed, {utt_seed, 0xd0}));
    const double dur = uniform_real(rng, opts.min_duration_s, opts.max_duration_s);
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_u%02d", j.utt);
    UtteranceRecord r;
    r.utt_id = j.spec->speaker_id + suffix;
    r.media_path = (std::filesystem::path(j.side) / j.spec->speaker_id / (r.utt_id + ".wav")).string();
    r.media_kind = MediaKind::kWav;
    r.speaker_id = j.spec->speaker_id;
    r.origin = j.side_index == 0 ? Origin::kGenuineSource : Origin::kGenuineTarget;
    const Waveform w = synth_utterance(*j.spec, dur, utt_seed, opts.sample_rate);
    r.duration_s = w.duration_s();
    write_wav(out_dir / r.media_path, w);
    records[i] = std::move(r);
  });

  const auto split = records.begin() + static_cast<std::ptrdiff_t>(out.source_speakers.size()) * utts_per_speaker;
  out.source = TrainingManifest(std::vector<UtteranceRecord>(records.begin(), split), out_dir);
  out.target = TrainingManifest(std::vector<UtteranceRecord>(split, records.end()), out_dir);
  write_manifest(out_dir / "source.tsv", out.source);
  write_manifest(out_dir / "target.tsv", out.target);
  return out;
}

void make_toy_augment_corpus(const std::filesystem::path& out_dir, uint64_t seed, int sample_rate) {
  const auto n = static_cast<size_t>(3 * sample_rate);
  auto emit = [&](const std::filesystem::path& path, std::vector<double> x) {
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    Waveform w;
    w.sample_rate = sample_rate;
    for (double v : x) w.samples.push_back(static_cast<float>(peak > 0 ? 0.5 * v / peak : 0.0));
    std::filesystem::create_directories(path.parent_path());
    write_wav(path, w);
  };

  for (int c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, {10, static_cast<uint64_t>(c)}));
    std::vector<double> x(n);
    double brown = 0.0;
    for (auto& v : x) {
      const double white = uniform_real(rng, -1.0, 1.0);
      brown = 0.98 * brown + 0.02 * white;
      v = c == 0 ? white : brown;
    }
    emit(out_dir / "noise" / "noise" / (c == 0 ? "white.wav" : "brown.wav"), std::move(x));
  }

  for (int c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, {11, static_cast<uint64_t>(c)}));
    std::vector<double> x(n);
    const size_t note = sample_rate / 4;
    for (size_t start = 0; start < n; start += note) {
      const double root = 110.0 * std::pow(2.0, static_cast<double>(uniform_index(rng, 24)) / 12.0);
      for (size_t i = start; i < std::min(n, start + note); ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        for (double ratio : {1.0, 1.26, 1.5}) x[i] += std::sin(kTwoPi * root * ratio * t);
      }
    }
    emit(out_dir / "noise" / "music" / ("chords" + std::to_string(c) + ".wav"), std::move(x));
  }

  const auto voices = make_speakers(4, "bab", derive_seed(seed, {12}));
  for (int c = 0; c < 2; ++c) {
    std::vector<double> x(n, 0.0);
    for (size_t v = 0; v < voices.size(); ++v) {
      const Waveform w = synth_utterance(voices[v], 3.0, static_cast<uint64_t>(c), sample_rate);
      for (size_t i = 0; i < n && i < w.samples.size(); ++i) x[i] += w.samples[i];
    }
    emit(out_dir / "noise" / "babble" / ("babble" + std::to_string(c) + ".wav"), std::move(x));
  }

  for (int c = 0; c < 3; ++c) {
    Rng rng(derive_seed(seed, {13, static_cast<uint64_t>(c)}));
    const double rt60 = 0.2 + 0.15 * c;
    const auto len = static_cast<size_t>(0.3 * sample_rate);
    std::vector<double> h(len);
    h[0] = 1.0;
    for (size_t i = 1; i < len; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      h[i] = 0.3 * uniform_real(rng, -1.0, 1.0) * std::pow(10.0, -3.0 * t / rt60);
    }
    emit(out_dir / "rir" / ("rir" + std::to_string(c) + ".wav"), std::move(h));
  }
}

}  // namespace ssid
