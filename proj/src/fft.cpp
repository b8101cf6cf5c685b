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

#include "ssid/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace ssid {

namespace {

struct Plans {
  fftwf_plan forward;
  fftwf_plan inverse;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans live for the process lifetime.
Plans plans_for(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::vector<float> real(n);
  std::vector<fftwf_complex> spec(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p{fftwf_plan_dft_r2c_1d(n, real.data(), spec.data(), flags),
          fftwf_plan_dft_c2r_1d(n, spec.data(), real.data(), flags | FFTW_DESTROY_INPUT)};
  if (p.forward == nullptr || p.inverse == nullptr) throw std::runtime_error("FFTW planning failed");
  cache.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("FFT size must be >= 2");
  const Plans p = plans_for(n);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void RealFft::forward(std::span<const float> in, std::span<std::complex<float>> out) const {
  if (in.size() != static_cast<size_t>(n_) || out.size() != static_cast<size_t>(n_ / 2 + 1)) {
    throw std::invalid_argument("RealFft::forward: size mismatch");
  }
  fftwf_execute_dft_r2c(static_cast<fftwf_plan>(forward_plan_), const_cast<float*>(in.data()),
                        reinterpret_cast<fftwf_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<float>> in, std::span<float> out) const {
  if (in.size() != static_cast<size_t>(n_ / 2 + 1) || out.size() != static_cast<size_t>(n_)) {
    throw std::invalid_argument("RealFft::inverse: size mismatch");
  }
  // c2r destroys its input.
  std::vector<std::complex<float>> scratch(in.begin(), in.end());
  fftwf_execute_dft_c2r(static_cast<fftwf_plan>(inverse_plan_),
                        reinterpret_cast<fftwf_complex*>(scratch.data()), out.data());
}

}  // namespace ssid
