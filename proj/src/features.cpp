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

#include "ssid/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "ssid/errors.hpp"
#include "ssid/fft.hpp"

namespace ssid {

void FrontEndConfig::validate() const {
  if (sample_rate <= 0 || win_length <= 0 || hop_length <= 0 || n_mels <= 0) {
    throw ConfigError("front end: sizes must be positive");
  }
  if (fft_size < win_length) throw ConfigError("front end: fft_size must be >= win_length");
  if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz && fmax_hz <= sample_rate / 2.0)) {
    throw ConfigError("front end: need 0 <= fmin < fmax <= nyquist");
  }
  if (!(power_floor > 0.0)) throw ConfigError("front end: power_floor must be > 0");
}

int num_frames(size_t n_samples, const FrontEndConfig& cfg) {
  if (n_samples < static_cast<size_t>(cfg.win_length)) {
    throw DataError("waveform has " + std::to_string(n_samples) +
                    " samples, fewer than one analysis window (" +
                    std::to_string(cfg.win_length) + ")");
  }
  return static_cast<int>((n_samples - cfg.win_length) / cfg.hop_length) + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

LogMelExtractor::LogMelExtractor(const FrontEndConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int L = cfg_.win_length;
  window_.resize(L);
  for (int n = 0; n < L; ++n) {
    window_[n] = static_cast<float>(0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (L - 1)));
  }

  // Triangles are linear in the mel domain, peaking at 1.
  const int n_bins = cfg_.fft_size / 2 + 1;
  const int M = cfg_.n_mels;
  const double mel_lo = hz_to_mel(cfg_.fmin_hz);
  const double mel_hi = hz_to_mel(cfg_.fmax_hz);
  const double step = (mel_hi - mel_lo) / (M + 1);
  filterbank_.assign(static_cast<size_t>(M) * n_bins, 0.0f);
  centers_.resize(M);
  for (int m = 0; m < M; ++m) {
    const double left = mel_lo + step * m;
    const double center = left + step;
    const double right = center + step;
    centers_[m] = mel_to_hz(center);
    for (int k = 0; k < n_bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * cfg_.sample_rate / cfg_.fft_size);
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      filterbank_[static_cast<size_t>(m) * n_bins + k] = static_cast<float>(w);
    }
  }
}

FeatureMatrix LogMelExtractor::compute(std::span<const float> samples) const {
  const int T = num_frames(samples.size(), cfg_);
  const int M = cfg_.n_mels;
  const int L = cfg_.win_length;
  const int n_bins = cfg_.fft_size / 2 + 1;
  const RealFft fft(cfg_.fft_size);

  FeatureMatrix out(T, M);
  out.sample_rate = cfg_.sample_rate;
  out.hop_s = static_cast<double>(cfg_.hop_length) / cfg_.sample_rate;

#pragma omp parallel
  {
    std::vector<float> frame(cfg_.fft_size, 0.0f);
    std::vector<std::complex<float>> spec(n_bins);
    std::vector<float> power(n_bins);
#pragma omp for schedule(static)
    for (int t = 0; t < T; ++t) {
      const float* src = samples.data() + static_cast<size_t>(t) * cfg_.hop_length;
      for (int n = 0; n < L; ++n) frame[n] = src[n] * window_[n];
      fft.forward(frame, spec);
      for (int k = 0; k < n_bins; ++k) power[k] = std::norm(spec[k]);
      for (int m = 0; m < M; ++m) {
        const float* fb = filterbank_.data() + static_cast<size_t>(m) * n_bins;
        double e = 0.0;
        for (int k = 0; k < n_bins; ++k) e += static_cast<double>(fb[k]) * power[k];
        out.at(t, m) = static_cast<float>(std::log(e + cfg_.power_floor));
      }
    }
  }
  if (cfg_.mean_norm) apply_mean_norm(out);
  return out;
}

FeatureMatrix logmel(const Waveform& wave, const FrontEndConfig& cfg) {
  if (wave.sample_rate != cfg.sample_rate) {
    throw DataError("sample rate " + std::to_string(wave.sample_rate) + " != expected " +
                    std::to_string(cfg.sample_rate) + "; resample upstream");
  }
  return LogMelExtractor(cfg).compute(wave.samples);
}

void apply_mean_norm(FeatureMatrix& feats) {
  for (int m = 0; m < feats.bins; ++m) {
    double s = 0.0;
    for (int t = 0; t < feats.frames; ++t) s += feats.at(t, m);
    const float mean = static_cast<float>(s / feats.frames);
    for (int t = 0; t < feats.frames; ++t) feats.at(t, m) -= mean;
  }
}

CropResult crop_to_length(std::span<const float> wave, size_t len, Rng& rng) {
  if (wave.empty()) throw DataError("cannot crop an empty waveform");
  CropResult r;
  if (wave.size() < len) {
    r.padded = true;
    r.samples.resize(len);
    for (size_t i = 0; i < len; ++i) r.samples[i] = wave[i % wave.size()];
    return r;
  }
  r.offset = uniform_index(rng, wave.size() - len + 1);
  r.samples.assign(wave.begin() + static_cast<std::ptrdiff_t>(r.offset),
                   wave.begin() + static_cast<std::ptrdiff_t>(r.offset + len));
  return r;
}

CropResult random_crop(std::span<const float> wave, int sample_rate, double min_s, double max_s,
                       Rng& rng) {
  if (!(min_s > 0.0 && min_s <= max_s)) throw ConfigError("random_crop: need 0 < min_s <= max_s");
  const auto min_len = static_cast<size_t>(std::llround(min_s * sample_rate));
  const auto max_len = static_cast<size_t>(std::llround(max_s * sample_rate));
  size_t len = min_len + uniform_index(rng, max_len - min_len + 1);
  if (wave.size() < min_len) {
    len = min_len;
  } else {
    len = std::min(len, wave.size());
  }
  return crop_to_length(wave, len, rng);
}

FeatureMatrix crop_frames(const FeatureMatrix& feats, int frames, Rng& rng) {
  if (feats.frames <= 0) throw DataError("cannot crop an empty feature matrix");
  FeatureMatrix out(frames, feats.bins);
  out.sample_rate = feats.sample_rate;
  out.hop_s = feats.hop_s;
  int offset = 0;
  if (feats.frames >= frames) {
    offset = static_cast<int>(uniform_index(rng, static_cast<uint64_t>(feats.frames - frames + 1)));
  }
  for (int t = 0; t < frames; ++t) {
    const int src = (offset + t) % feats.frames;
    std::copy_n(feats.data.begin() + static_cast<std::ptrdiff_t>(src) * feats.bins, feats.bins,
                out.data.begin() + static_cast<std::ptrdiff_t>(t) * feats.bins);
  }
  return out;
}

void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& feats) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write feature file: " + path.string());
  const uint32_t header[2] = {static_cast<uint32_t>(feats.frames),
                              static_cast<uint32_t>(feats.bins)};
  os.write("SFEA", 4);
  os.write(reinterpret_cast<const char*>(header), sizeof(header));
  os.write(reinterpret_cast<const char*>(feats.data.data()),
           static_cast<std::streamsize>(feats.data.size() * sizeof(float)));
  if (!os) throw DataError("write failed: " + path.string());
}

FeatureMatrix read_feature_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open feature file: " + path.string());
  char magic[4];
  uint32_t header[2];
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!is || std::memcmp(magic, "SFEA", 4) != 0) {
    throw DataError("bad feature file header: " + path.string());
  }
  if (header[0] == 0 || header[1] == 0) throw DataError("empty feature file: " + path.string());
  FeatureMatrix f(static_cast<int>(header[0]), static_cast<int>(header[1]));
  is.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(f.data.size() * sizeof(float)));
  if (!is) throw DataError("truncated feature file: " + path.string());
  for (float v : f.data) {
    if (!std::isfinite(v)) throw DataError("non-finite value in feature file: " + path.string());
  }
  return f;
}

}  // namespace ssid
