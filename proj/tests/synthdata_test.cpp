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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "ssid/errors.hpp"
#include "ssid/features.hpp"
#include "ssid/fft.hpp"
#include "test_util.hpp"

namespace ssid {
namespace {

SyntheticSpeakerSpec spec(double f0) {
  return {"s", f0, {0.05, -0.05, 0.1}, 1.8, 7};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

TEST(Synth, DeterministicPerSeed) {
  const Waveform a = synth_utterance(spec(140), 2.5, 3);
  const Waveform b = synth_utterance(spec(140), 2.5, 3);
  const Waveform c = synth_utterance(spec(140), 2.5, 4);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  EXPECT_EQ(a.samples.size(), 40000u);
  EXPECT_EQ(a.sample_rate, 16000);
  for (float x : a.samples) ASSERT_LE(std::abs(x), 1.0f);
}

TEST(Synth, FundamentalPeak) {
  const Waveform w = synth_utterance(spec(100), 4.0, 1);
  const int n = 65536;
  std::vector<float> in(n, 0.0f);
  std::copy_n(w.samples.begin(), std::min<size_t>(n, w.samples.size()), in.begin());
  std::vector<std::complex<float>> out(n / 2 + 1);
  RealFft(n).forward(in, out);
  const double hz_per_bin = 16000.0 / n;
  int best = 0;
  double best_mag = -1.0;
  for (int k = static_cast<int>(60 / hz_per_bin); k <= static_cast<int>(150 / hz_per_bin); ++k) {
    if (std::abs(out[k]) > best_mag) best_mag = std::abs(out[k]), best = k;
  }
  EXPECT_NEAR(best * hz_per_bin, 100.0, 4.0);
}

TEST(Synth, InvalidSpecsRejected) {
  EXPECT_THROW(synth_utterance(spec(50), 2.0, 1), ConfigError);
  EXPECT_THROW(synth_utterance(spec(400), 2.0, 1), ConfigError);
  auto s = spec(120);
  s.spectral_tilt = 0.5;
  EXPECT_THROW(s.validate(), ConfigError);
  s = spec(120);
  s.formant_offsets = {0.3, 0, 0};
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(synth_utterance(spec(120), 1.0, 1), ConfigError);
}

TEST(Synth, SpeakersAreDistinct) {
  const auto a = make_speakers(20, "a", 1);
  const auto b = make_speakers(20, "b", 2, a);
  ASSERT_EQ(a.size(), 20u);
  std::vector<SyntheticSpeakerSpec> all = a;
  all.insert(all.end(), b.begin(), b.end());
  for (size_t i = 0; i < all.size(); ++i) {
    all[i].validate();
    for (size_t j = i + 1; j < all.size(); ++j) EXPECT_TRUE(distinct(all[i], all[j]));
  }
  const auto again = make_speakers(20, "a", 1);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(again[i].fundamental_hz, a[i].fundamental_hz);
}

TEST(ToyCorpora, CardinalityAndReproducibility) {
  testing::TempDir d1("toy1"), d2("toy2");
  ToyCorpusOptions opts;
  opts.max_duration_s = 2.2;
  const ToyCorpora c = make_toy_corpora(8, 8, 10, 5, d1.path(), opts);
  EXPECT_EQ(c.source.size(), 80u);
  EXPECT_EQ(c.target.size(), 80u);
  EXPECT_EQ(c.source.count(Origin::kGenuineSource), 80u);
  EXPECT_EQ(c.target.count(Origin::kGenuineTarget), 80u);
  EXPECT_EQ(c.source.speaker_inventory().size(), 8u);
  for (const auto& r : c.source.records()) EXPECT_TRUE(std::filesystem::exists(c.source.resolve_media(r)));

  make_toy_corpora(8, 8, 10, 5, d2.path(), opts);
  EXPECT_EQ(slurp(d1 / "source.tsv"), slurp(d2 / "source.tsv"));
  EXPECT_EQ(slurp(d1 / "target.tsv"), slurp(d2 / "target.tsv"));
  const auto& r0 = c.target.records()[3];
  EXPECT_EQ(slurp(c.target.resolve_media(r0)), slurp(d2.path() / std::filesystem::relative(c.target.resolve_media(r0), d1.path())));
}

// Mean log-mel vectors separate speakers by nearest centroid.
TEST(ToyCorpora, SpeakersAreSeparableByMeanSpectrum) {
  const auto spk = make_speakers(8, "s", 9);
  const LogMelExtractor ex;
  int correct = 0, total = 0;
  std::vector<std::vector<double>> centroid(spk.size());
  const auto mean_vec = [&](const Waveform& w) {
    const FeatureMatrix f = ex.compute(w.samples);
    std::vector<double> m(f.bins, 0.0);
    for (int t = 0; t < f.frames; ++t)
      for (int b = 0; b < f.bins; ++b) m[b] += f.at(t, b) / f.frames;
    return m;
  };
  for (size_t s = 0; s < spk.size(); ++s) {
    centroid[s].assign(ex.config().n_mels, 0.0);
    for (int u = 0; u < 5; ++u) {
      const auto m = mean_vec(synth_utterance(spk[s], 2.0, 100 + u));
      for (size_t b = 0; b < m.size(); ++b) centroid[s][b] += m[b] / 5;
    }
  }
  for (size_t s = 0; s < spk.size(); ++s) {
    for (int u = 0; u < 5; ++u) {
      const auto m = mean_vec(synth_utterance(spk[s], 2.0, 200 + u));
      size_t best = 0;
      double best_d = 1e300;
      for (size_t c = 0; c < spk.size(); ++c) {
        double d = 0;
        for (size_t b = 0; b < m.size(); ++b) d += (m[b] - centroid[c][b]) * (m[b] - centroid[c][b]);
        if (d < best_d) best_d = d, best = c;
      }
      correct += best == s;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(correct) / total, 0.9);
}

TEST(ToyCorpora, AugmentCorpusLayout) {
  testing::TempDir d("aug");
  make_toy_augment_corpus(d.path(), 3);
  for (const char* f : {"noise/noise/white.wav", "noise/noise/brown.wav", "noise/music/chords0.wav",
                        "noise/babble/babble1.wav", "rir/rir0.wav", "rir/rir2.wav"}) {
    EXPECT_TRUE(std::filesystem::exists(d / f)) << f;
  }
}

}  // namespace
}  // namespace ssid
