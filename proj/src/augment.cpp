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

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <stdexcept>

#include "ssid/errors.hpp"
#include "ssid/fft.hpp"
#include "ssid/wav.hpp"

namespace ssid {

void AugmentPolicy::validate() const {
  if (p_none < 0.0 || p_noise < 0.0 || p_reverb < 0.0) {
    throw ConfigError("augment: probabilities must be >= 0");
  }
  if (std::abs(p_none + p_noise + p_reverb - 1.0) > 1e-9) {
    throw ConfigError("augment: p_none + p_noise + p_reverb must equal 1");
  }
  for (const auto& [cat, r] : snr_range_db) {
    if (!(r.low <= r.high)) throw ConfigError("augment: SNR range for '" + cat + "' has low > high");
  }
}

bool AugmentCorpus::empty() const {
  if (!rirs.empty()) return false;
  for (const auto& [cat, clips] : noise) {
    if (!clips.empty()) return false;
  }
  return true;
}

namespace {

std::vector<Clip> load_dir(const std::string& dir, int sample_rate) {
  if (!std::filesystem::is_directory(dir)) throw DataError("corpus directory not found: " + dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Clip> clips;
  for (const auto& p : paths) {
    Waveform w = read_wav(p);
    if (w.sample_rate != sample_rate) {
      throw DataError(p.string() + ": sample rate " + std::to_string(w.sample_rate) + " != " +
                      std::to_string(sample_rate));
    }
    if (w.samples.empty()) continue;
    clips.push_back({std::filesystem::relative(p, dir).string(), std::move(w.samples)});
  }
  return clips;
}

double mean_power(std::span<const float> x) {
  double s = 0.0;
  for (float v : x) s += static_cast<double>(v) * v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double cyclic_power(std::span<const float> noise, size_t offset, size_t len) {
  double s = 0.0;
  for (size_t i = 0; i < len; ++i) {
    const double v = noise[(offset + i) % noise.size()];
    s += v * v;
  }
  return len == 0 ? 0.0 : s / static_cast<double>(len);
}

}  // namespace

AugmentCorpus AugmentCorpus::load(const AugmentPolicy& policy, int sample_rate) {
  AugmentCorpus c;
  for (const auto& [cat, dir] : policy.noise_corpus_dirs) c.noise[cat] = load_dir(dir, sample_rate);
  for (const auto& dir : policy.rir_corpus_dirs) {
    auto clips = load_dir(dir, sample_rate);
    for (auto& clip : clips) {
      clip.name = dir + "/" + clip.name;
      c.rirs.push_back(std::move(clip));
    }
  }
  return c;
}

NoiseResult add_noise(std::span<const float> wave, std::span<const float> noise, double snr_db,
                      size_t noise_offset) {
  NoiseResult r;
  r.samples.assign(wave.begin(), wave.end());
  if (std::isinf(snr_db) && snr_db > 0) return r;
  if (noise.empty()) throw std::invalid_argument("add_noise: empty noise");
  const double wave_power = mean_power(wave);
  if (!(wave_power > 0.0)) throw std::invalid_argument("add_noise: zero-energy waveform");
  const double noise_power = cyclic_power(noise, noise_offset, wave.size());
  if (!(noise_power > 0.0)) throw DataError("add_noise: zero-energy noise segment");

  r.noise_scale = std::sqrt(wave_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  size_t clipped = 0;
  for (size_t i = 0; i < wave.size(); ++i) {
    const double v = wave[i] + r.noise_scale * noise[(noise_offset + i) % noise.size()];
    if (v > 1.0 || v < -1.0) ++clipped;
    r.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  r.clipped_fraction = wave.empty() ? 0.0 : static_cast<double>(clipped) / wave.size();
  return r;
}

std::vector<float> add_reverb(std::span<const float> wave, std::span<const float> rir) {
  if (rir.empty()) throw std::invalid_argument("add_reverb: empty impulse response");
  if (std::all_of(rir.begin(), rir.end(), [](float v) { return v == 0.0f; })) {
    throw DataError("add_reverb: all-zero impulse response");
  }
  const size_t n = wave.size();
  std::vector<double> out(n, 0.0);
  if (rir.size() <= 64) {
    for (size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const size_t kmax = std::min(rir.size(), i + 1);
      for (size_t k = 0; k < kmax; ++k) acc += static_cast<double>(rir[k]) * wave[i - k];
      out[i] = acc;
    }
  } else {
    size_t len = 1;
    while (len < n + rir.size() - 1) len <<= 1;
    const RealFft fft(static_cast<int>(len));
    std::vector<float> a(len, 0.0f), b(len, 0.0f);
    std::copy(wave.begin(), wave.end(), a.begin());
    std::copy(rir.begin(), rir.end(), b.begin());
    std::vector<std::complex<float>> fa(len / 2 + 1), fb(len / 2 + 1);
    fft.forward(a, fa);
    fft.forward(b, fb);
    for (size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
    fft.inverse(fa, a);
    for (size_t i = 0; i < n; ++i) out[i] = a[i] / static_cast<double>(len);
  }

  double in_peak = 0.0, out_peak = 0.0;
  for (float v : wave) in_peak = std::max(in_peak, std::abs(static_cast<double>(v)));
  for (double v : out) out_peak = std::max(out_peak, std::abs(v));
  const double gain = out_peak > 0.0 ? in_peak / out_peak : 0.0;
  std::vector<float> result(n);
  for (size_t i = 0; i < n; ++i) result[i] = static_cast<float>(out[i] * gain);
  return result;
}

std::string to_string(AugmentBranch b) {
  switch (b) {
    case AugmentBranch::kNone: return "none";
    case AugmentBranch::kNoise: return "noise";
    case AugmentBranch::kReverb: return "reverb";
  }
  return "?";
}

AugmentResult augment(std::span<const float> wave, const AugmentPolicy& policy,
                      const AugmentCorpus& corpus, Rng& rng) {
  AugmentResult r;
  const double u = uniform_unit(rng);
  if (u < policy.p_none) {
    r.branch = AugmentBranch::kNone;
  } else if (u < policy.p_none + policy.p_noise) {
    r.branch = AugmentBranch::kNoise;
  } else {
    r.branch = AugmentBranch::kReverb;
  }

  if (r.branch == AugmentBranch::kNoise) {
    std::vector<const std::string*> cats;
    for (const auto& [cat, clips] : corpus.noise) {
      if (!clips.empty()) cats.push_back(&cat);
    }
    if (cats.empty()) throw DataError("augment: noise branch drawn but the noise corpus is empty");
    r.category = *cats[uniform_index(rng, cats.size())];
    const auto range_it = policy.snr_range_db.find(r.category);
    const SnrRange range = range_it != policy.snr_range_db.end() ? range_it->second : SnrRange{};
    r.snr_db = uniform_real(rng, range.low, range.high);
    if (mean_power(wave) > 0.0) {
      const auto& clips = corpus.noise.at(r.category);
      // Silent segments are redrawn.
      for (int attempt = 0; attempt < 16; ++attempt) {
        const Clip& clip = clips[uniform_index(rng, clips.size())];
        const size_t offset = uniform_index(rng, clip.samples.size());
        if (!(cyclic_power(clip.samples, offset, wave.size()) > 0.0)) continue;
        NoiseResult nr = add_noise(wave, clip.samples, r.snr_db, offset);
        r.samples = std::move(nr.samples);
        r.clipped_fraction = nr.clipped_fraction;
        r.clip = clip.name;
        return r;
      }
      throw DataError("augment: no non-silent noise segment found in category '" + r.category + "'");
    }
  } else if (r.branch == AugmentBranch::kReverb) {
    if (corpus.rirs.empty()) throw DataError("augment: reverb branch drawn but the RIR corpus is empty");
    const Clip& rir = corpus.rirs[uniform_index(rng, corpus.rirs.size())];
    r.clip = rir.name;
    r.samples = add_reverb(wave, rir.samples);
    return r;
  }
  r.samples.assign(wave.begin(), wave.end());
  return r;
}

}  // namespace ssid
