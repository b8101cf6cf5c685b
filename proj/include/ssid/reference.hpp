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

// Serial, loop-for-loop versions of the parallel kernels. Slow on purpose:
// they follow the defining sums directly and exist so tests and the
// benchmark have an independent baseline.

#include <span>
#include <vector>

#include "ssid/features.hpp"
#include "ssid/kernels.hpp"
#include "ssid/tensor.hpp"

namespace ssid::reference {

template <typename Real>
void conv2d_forward(const Tensor<Real>& x, std::span<const Real> weight,
                    const kernels::ConvShape& s, Tensor<Real>& y);

template <typename Real>
void conv2d_backward(const Tensor<Real>& x, std::span<const Real> weight,
                     const kernels::ConvShape& s, const Tensor<Real>& dy,
                     std::span<Real> dweight, Tensor<Real>& dx);

// Two-pass mean / population std over each row of a C x T map.
std::vector<double> stats_pool(std::span<const double> maps, int channels, int frames, double eps);

// Log-mel with a direct O(N^2) DFT in place of the FFT.
FeatureMatrix logmel_dft(std::span<const float> samples, const LogMelExtractor& extractor);

// Full linear convolution, length a + b - 1.
std::vector<double> convolve_full(std::span<const float> a, std::span<const float> b);

}  // namespace ssid::reference
