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

// OpenMP-parallel compute kernels for the embedding network. Every kernel
// has a serial counterpart in reference.hpp that the tests compare against.
//
// Parallel loops use static schedules and reduce per-thread partial sums in
// thread order, so results are reproducible for a fixed thread count.

#include <span>
#include <vector>

#include "ssid/tensor.hpp"

namespace ssid::kernels {

struct ConvShape {
  int cin = 1;
  int cout = 1;
  int k = 3;
  int stride = 1;

  int pad() const { return k / 2; }
  int out_h(int h) const { return (h + 2 * pad() - k) / stride + 1; }
  int out_w(int w) const { return (w + 2 * pad() - k) / stride + 1; }
  size_t weight_size() const { return static_cast<size_t>(cout) * cin * k * k; }
};

// y = conv(x, weight), zero padding k/2, no bias. weight is [cout][cin][k][k].
template <typename Real>
void conv2d_forward(const Tensor<Real>& x, std::span<const Real> weight, const ConvShape& s,
                    Tensor<Real>& y);

// dweight is overwritten. dx (optional) is overwritten.
template <typename Real>
void conv2d_backward(const Tensor<Real>& x, std::span<const Real> weight, const ConvShape& s,
                     const Tensor<Real>& dy, std::span<Real> dweight, Tensor<Real>* dx);

template <typename Real>
struct BatchNormCache {
  std::vector<Real> mean;
  std::vector<Real> var;      // biased batch variance
  std::vector<Real> inv_std;  // 1 / sqrt(var + eps)
  Tensor<Real> xhat;
};

// Normalizes every channel over (N, H, W) with batch statistics.
template <typename Real>
void batchnorm_train_forward(const Tensor<Real>& x, std::span<const Real> gamma,
                             std::span<const Real> beta, Real eps, Tensor<Real>& y,
                             BatchNormCache<Real>& cache);

template <typename Real>
void batchnorm_eval_forward(const Tensor<Real>& x, std::span<const Real> gamma,
                            std::span<const Real> beta, std::span<const Real> running_mean,
                            std::span<const Real> running_var, Real eps, Tensor<Real>& y);

// dgamma and dbeta are overwritten.
template <typename Real>
void batchnorm_backward(const Tensor<Real>& dy, std::span<const Real> gamma,
                        const BatchNormCache<Real>& cache, Tensor<Real>& dx,
                        std::span<Real> dgamma, std::span<Real> dbeta);

template <typename Real>
void relu_inplace(Tensor<Real>& x);

// dy *= (y > 0), where y is the ReLU output.
template <typename Real>
void relu_backward_inplace(const Tensor<Real>& y, Tensor<Real>& dy);

// Global statistics pooling over the time axis (W). Channel and frequency
// axes are flattened, so x [N, C, H, W] yields y [N, 2*C*H, 1, 1]: the
// first C*H entries are means, the rest are sqrt(population var + eps).
template <typename Real>
void stats_pool_forward(const Tensor<Real>& x, Real eps, Tensor<Real>& y);

template <typename Real>
void stats_pool_backward(const Tensor<Real>& x, const Tensor<Real>& y, const Tensor<Real>& dy,
                         Tensor<Real>& dx);

// Mean/std pooling of a single C x T map (row = channel).
template <typename Real>
std::vector<Real> stats_pool(std::span<const Real> maps, int channels, int frames, Real eps);

// y[n] = W x[n] + b with W [out][in]. x is read as [N, in] whatever its C/H/W.
template <typename Real>
void linear_forward(const Tensor<Real>& x, std::span<const Real> weight, std::span<const Real> bias,
                    int out_features, Tensor<Real>& y);

// dweight, dbias overwritten; dx optional.
template <typename Real>
void linear_backward(const Tensor<Real>& x, std::span<const Real> weight, const Tensor<Real>& dy,
                     std::span<Real> dweight, std::span<Real> dbias, Tensor<Real>* dx);

struct LossResult {
  double loss = 0.0;  // mean over the batch
  int correct = 0;
};

// Softmax cross-entropy over logits [N, K]; writes dlogits of the mean loss.
template <typename Real>
LossResult softmax_cross_entropy(const Tensor<Real>& logits, std::span<const int> labels,
                                 Tensor<Real>* dlogits);

}  // namespace ssid::kernels
