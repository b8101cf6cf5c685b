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
#include <span>
#include <string>
#include <vector>

#include "ssid/kernels.hpp"
#include "ssid/tensor.hpp"

namespace ssid {

// Residual encoder + statistics pooling + embedding layer + softmax head.
//
//   input [N, 1, bins, T]
//   stem:    conv3x3(stride stem_stride) -> BN -> ReLU
//   stage i: blocks[i] basic residual blocks of width widths[i]; the first
//            block of every stage after the first has stride 2
//   pool:    mean and std over time of every (channel, frequency) row
//   embed:   linear -> embedding_dim
//   head:    linear -> n_classes
struct NetworkConfig {
  int input_bins = 80;
  int stem_stride = 1;
  std::vector<int> widths{16, 32, 64, 128};
  std::vector<int> blocks{2, 2, 2, 2};
  int embedding_dim = 128;
  int n_classes = 2;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  double pool_eps = 1e-5;

  void validate() const;

  // Width/depth presets. resnet34() mirrors the ResNet-34 stage layout.
  static NetworkConfig desk();
  static NetworkConfig resnet34();

  bool operator==(const NetworkConfig&) const = default;
};

template <typename Real>
struct Param {
  std::string name;
  AlignedVector<Real> value;
  AlignedVector<Real> grad;
};

template <typename Real>
class SpeakerNet {
 public:
  SpeakerNet(const NetworkConfig& cfg, uint64_t seed);

  const NetworkConfig& config() const { return cfg_; }

  std::vector<Param<Real>>& params() { return params_; }
  const std::vector<Param<Real>>& params() const { return params_; }
  // BatchNorm running means and variances, interleaved per layer.
  std::vector<Param<Real>>& buffers() { return buffers_; }
  const std::vector<Param<Real>>& buffers() const { return buffers_; }
  size_t num_weights() const;

  // Smallest time length the encoder accepts (product of time strides).
  int min_frames() const;
  int pooled_dim() const;

  struct StepStats {
    double loss = 0.0;
    int correct = 0;
    int batch = 0;
  };

  // Training-mode pass: forward with batch statistics, softmax cross-entropy,
  // backward into every Param::grad, then the running-statistics update.
  StepStats forward_backward(const Tensor<Real>& batch, std::span<const int> labels);

  // Training-mode loss with no side effects (for finite differences).
  double loss(const Tensor<Real>& batch, std::span<const int> labels) const;

  // Inference mode (running statistics). Rows of the result are embeddings.
  Tensor<Real> embed_batch(const Tensor<Real>& batch) const;
  std::vector<Real> embed(const Tensor<Real>& single) const;

 private:
  struct ConvBn {
    kernels::ConvShape shape;
    int weight = -1, gamma = -1, beta = -1;
    int running_mean = -1, running_var = -1;
    bool relu = true;
  };
  struct Block {
    ConvBn a, b;
    bool has_proj = false;
    ConvBn proj;
  };
  struct ConvBnCache {
    kernels::BatchNormCache<Real> bn;
    Tensor<Real> out;
  };
  struct BlockCache {
    ConvBnCache a, b, proj;
    Tensor<Real> out;
  };
  enum class Mode { kTrain, kEval };
  struct Cache {
    ConvBnCache stem;
    std::vector<BlockCache> blocks;
    Tensor<Real> pooled, embedding, logits;
  };

  ConvBn make_conv_bn(const std::string& name, int cin, int cout, int k, int stride, bool relu);
  void check_input(const Tensor<Real>& x) const;
  std::span<const Real> value(int i) const { return params_[i].value; }

  void conv_bn_forward(const ConvBn& l, const Tensor<Real>& in, Mode mode, ConvBnCache& c) const;
  void conv_bn_backward(const ConvBn& l, const Tensor<Real>& in, ConvBnCache& c,
                        Tensor<Real>& dout, Tensor<Real>* din);
  void forward(const Tensor<Real>& x, Mode mode, Cache& cache) const;
  void update_running(const ConvBn& l, const ConvBnCache& c, size_t count);

  NetworkConfig cfg_;
  std::vector<Param<Real>> params_;
  std::vector<Param<Real>> buffers_;
  ConvBn stem_;
  std::vector<Block> blocks_;
  int embed_w_ = -1, embed_b_ = -1, head_w_ = -1, head_b_ = -1;
};

extern template class SpeakerNet<float>;
extern template class SpeakerNet<double>;

}  // namespace ssid
