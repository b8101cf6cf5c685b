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

#include <complex>
#include <span>

namespace ssid {

// Thin wrapper over an FFTW single-precision real transform of size n.
// Plans are created once per size under a global lock; execution is
// thread-safe and accepts unaligned buffers.
class RealFft {
 public:
  explicit RealFft(int n);

  int size() const { return n_; }

  // in: n reals; out: n/2 + 1 complex bins.
  void forward(std::span<const float> in, std::span<std::complex<float>> out) const;
  // in: n/2 + 1 complex bins; out: n reals, unnormalized (scaled by n).
  void inverse(std::span<const std::complex<float>> in, std::span<float> out) const;

 private:
  int n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace ssid
