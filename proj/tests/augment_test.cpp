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

#include "ssid/augment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ssid/errors.hpp"
#include "ssid/reference.hpp"
#include "ssid/synthdata.hpp"
#include "test_util.hpp"

namespace ssid {
namespace {

double power(std::span<const float> x) {
  double s = 0.0;
  for (float v : x) s += static_cast<double>(v) * v;
  return s / x.size();
}

TEST(AddNoise, InfiniteSnrIsIdentity) {
  const std::vector<float> wave{0.1f, -0.2f, 0.3f}, noise{1.0f, 1.0f};
  const NoiseResult r = add_noise(wave, noise, kNoNoiseSnr);
  EXPECT_EQ(r.samples, wave);
}

TEST(AddNoise, EqualPowerAtZeroDbHasUnitScale) {
  const std::vector<float> wave{0.5f, -0.5f, 0.5f, -0.5f}, noise{-0.5f, 0.5f};
  EXPECT_NEAR(add_noise(wave, noise, 0.0).noise_scale, 1.0, 1e-12);
}

TEST(AddNoise, HandSolvedScale) {
  const std::vector<float> wave{2.0f, -2.0f, 2.0f, -2.0f};  // power 4
  const std::vector<float> noise{1.0f, -1.0f};              // power 1
  const NoiseResult r = add_noise(wave, noise, 10.0);
  EXPECT_NEAR(r.noise_scale, std::sqrt(4.0 / 10.0), 1e-12);
  EXPECT_GT(r.clipped_fraction, 0.0);
}

TEST(AddNoise, MeasuredSnrWithinHalfDecibel) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> snr(-5.0, 30.0);
  std::uniform_int_distribution<size_t> len(200, 4000);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = len(rng), m = len(rng);
    const auto wave = testing::uniform_vector<float>(n, rng, -0.2, 0.2);
    const auto noise = testing::uniform_vector<float>(m, rng, -0.2, 0.2);
    const double target = snr(rng);
    const size_t offset = rng() % m;
    const NoiseResult r = add_noise(wave, noise, target, offset);
    ASSERT_EQ(r.clipped_fraction, 0.0);
    std::vector<float> added(n);
    for (size_t i = 0; i < n; ++i) added[i] = r.samples[i] - wave[i];
    const double measured = 10.0 * std::log10(power(wave) / power(added));
    ASSERT_NEAR(measured, target, 0.5) << "trial " << trial;
  }
}

TEST(AddNoise, ZeroEnergyNoiseThrows) {
  const std::vector<float> wave{0.1f, 0.2f}, noise{0.0f, 0.0f};
  EXPECT_THROW(add_noise(wave, noise, 5.0), DataError);
}

TEST(AddReverb, UnitImpulseIsIdentity) {
  std::mt19937_64 rng(1);
  const auto wave = testing::uniform_vector<float>(500, rng);
  const auto out = add_reverb(wave, std::vector<float>{1.0f});
  ASSERT_EQ(out.size(), wave.size());
  for (size_t i = 0; i < wave.size(); ++i) ASSERT_NEAR(out[i], wave[i], 1e-6);
}

TEST(AddReverb, DelayedImpulseShifts) {
  std::vector<float> wave(100, 0.1f);
  wave[10] = 0.9f;  // the peak survives the truncation
  std::vector<float> rir(5, 0.0f);
  rir[4] = 1.0f;
  const auto out = add_reverb(wave, rir);
  for (size_t i = 0; i < 4; ++i) EXPECT_EQ(out[i], 0.0f);
  for (size_t i = 4; i < 100; ++i) ASSERT_NEAR(out[i], wave[i - 4], 1e-6);
}

std::vector<double> expected_reverb(std::span<const float> wave, std::span<const float> rir) {
  auto full = reference::convolve_full(wave, rir);
  full.resize(wave.size());
  double in_peak = 0.0, out_peak = 0.0;
  for (float v : wave) in_peak = std::max(in_peak, std::abs(static_cast<double>(v)));
  for (double v : full) out_peak = std::max(out_peak, std::abs(v));
  for (double& v : full) v *= in_peak / out_peak;
  return full;
}

TEST(AddReverb, ShortResponseMatchesDirectSum) {
  std::mt19937_64 rng(2);
  const auto wave = testing::uniform_vector<float>(8, rng);
  const auto rir = testing::uniform_vector<float>(3, rng);
  const auto out = add_reverb(wave, rir);
  const auto ref = expected_reverb(wave, rir);
  for (size_t i = 0; i < 8; ++i) EXPECT_NEAR(out[i], ref[i], 1e-6);
}

TEST(AddReverb, LongResponseMatchesDirectSum) {
  std::mt19937_64 rng(3);
  const auto wave = testing::uniform_vector<float>(3000, rng);
  const auto rir = testing::uniform_vector<float>(700, rng);
  const auto out = add_reverb(wave, rir);
  const auto ref = expected_reverb(wave, rir);
  for (size_t i = 0; i < out.size(); ++i) ASSERT_NEAR(out[i], ref[i], 1e-4);
}

TEST(AddReverb, ZeroResponseThrows) {
  const std::vector<float> wave{0.1f, 0.2f};
  EXPECT_THROW(add_reverb(wave, std::vector<float>(4, 0.0f)), DataError);
}

AugmentCorpus toy_corpus() {
  AugmentCorpus c;
  std::mt19937_64 rng(4);
  c.noise["noise"] = {{"white", testing::uniform_vector<float>(4000, rng, -0.3, 0.3)}};
  c.noise["music"] = {{"m0", testing::uniform_vector<float>(3000, rng, -0.3, 0.3)},
                      {"m1", testing::uniform_vector<float>(3000, rng, -0.3, 0.3)}};
  std::vector<float> rir(40, 0.0f);
  rir[0] = 1.0f;
  rir[20] = 0.3f;
  c.rirs = {{"r0", rir}};
  return c;
}

TEST(Augment, PolicyValidation) {
  AugmentPolicy p;
  EXPECT_NO_THROW(p.validate());
  p.p_none = 0.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = AugmentPolicy{};
  p.snr_range_db["noise"] = {10.0, 5.0};
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Augment, NonePolicyIsIdentity) {
  AugmentPolicy p;
  p.p_none = 1.0;
  p.p_noise = p.p_reverb = 0.0;
  std::mt19937_64 g(5);
  const auto wave = testing::uniform_vector<float>(1000, g, -0.5, 0.5);
  Rng rng(1);
  const AugmentResult r = augment(wave, p, AugmentCorpus{}, rng);
  EXPECT_EQ(r.branch, AugmentBranch::kNone);
  EXPECT_EQ(r.samples, wave);
}

TEST(Augment, NoiseBranchIsReproducible) {
  AugmentPolicy p;
  p.p_none = p.p_reverb = 0.0;
  p.p_noise = 1.0;
  const AugmentCorpus corpus = toy_corpus();
  std::mt19937_64 g(6);
  const auto wave = testing::uniform_vector<float>(1000, g, -0.5, 0.5);
  Rng a(77), b(77);
  const AugmentResult ra = augment(wave, p, corpus, a);
  const AugmentResult rb = augment(wave, p, corpus, b);
  EXPECT_EQ(ra.branch, AugmentBranch::kNoise);
  EXPECT_EQ(ra.clip, rb.clip);
  EXPECT_EQ(ra.snr_db, rb.snr_db);
  EXPECT_EQ(ra.samples, rb.samples);
  const SnrRange range = p.snr_range_db.at(ra.category);
  EXPECT_GE(ra.snr_db, range.low);
  EXPECT_LE(ra.snr_db, range.high);
}

TEST(Augment, EmptyCorpusThrowsWhenDrawn) {
  AugmentPolicy p;
  p.p_none = p.p_noise = 0.0;
  p.p_reverb = 1.0;
  Rng rng(1);
  EXPECT_THROW(augment(std::vector<float>(100, 0.1f), p, AugmentCorpus{}, rng), DataError);
}

TEST(Augment, BranchFrequenciesWithinThreeSigma) {
  AugmentPolicy p;
  p.p_none = 0.5;
  p.p_noise = 0.3;
  p.p_reverb = 0.2;
  const AugmentCorpus corpus = toy_corpus();
  const std::vector<float> wave(200, 0.1f);
  Rng rng(8);
  const int n = 10000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) ++counts[static_cast<int>(augment(wave, p, corpus, rng).branch)];
  const double probs[3] = {0.5, 0.3, 0.2};
  for (int b = 0; b < 3; ++b) {
    const double sigma = std::sqrt(n * probs[b] * (1.0 - probs[b]));
    EXPECT_NEAR(counts[b], n * probs[b], 3.0 * sigma) << "branch " << b;
  }
}

TEST(AugmentCorpus, LoadsToyClipsInSortedOrder) {
  testing::TempDir dir("aug");
  make_toy_augment_corpus(dir.path(), 3);
  AugmentPolicy p;
  p.noise_corpus_dirs = {{"noise", (dir / "noise/noise").string()},
                         {"music", (dir / "noise/music").string()},
                         {"babble", (dir / "noise/babble").string()}};
  p.rir_corpus_dirs = {(dir / "rir").string()};
  const AugmentCorpus c = AugmentCorpus::load(p, 16000);
  EXPECT_EQ(c.noise.at("noise").size(), 2u);
  EXPECT_EQ(c.noise.at("music").size(), 2u);
  EXPECT_EQ(c.noise.at("babble").size(), 2u);
  ASSERT_EQ(c.rirs.size(), 3u);
  EXPECT_LT(c.rirs[0].name, c.rirs[1].name);
}

}  // namespace
}  // namespace ssid
