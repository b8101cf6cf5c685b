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

#include "ssid/network.hpp"

#include <cmath>
#include <stdexcept>

#include "ssid/errors.hpp"
#include "ssid/rng.hpp"

namespace ssid {

void NetworkConfig::validate() const {
  if (input_bins < 1) throw ConfigError("network: input_bins must be >= 1");
  if (stem_stride < 1) throw ConfigError("network: stem_stride must be >= 1");
  if (widths.empty() || widths.size() != blocks.size()) {
    throw ConfigError("network: widths and blocks must be non-empty and of equal length");
  }
  for (size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] < 1 || blocks[i] < 1) throw ConfigError("network: widths/blocks must be >= 1");
  }
  if (embedding_dim < 1) throw ConfigError("network: embedding_dim must be >= 1");
  if (n_classes < 2) throw ConfigError("network: n_classes must be >= 2");
  if (!(bn_eps > 0.0 && pool_eps > 0.0)) throw ConfigError("network: eps must be > 0");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) {
    throw ConfigError("network: bn_momentum must be in (0, 1]");
  }
}

NetworkConfig NetworkConfig::desk() { return NetworkConfig{}; }

NetworkConfig NetworkConfig::resnet34() {
  NetworkConfig c;
  c.widths = {32, 64, 128, 256};
  c.blocks = {3, 4, 6, 3};
  return c;
}

template <typename Real>
typename SpeakerNet<Real>::ConvBn SpeakerNet<Real>::make_conv_bn(const std::string& name, int cin,
                                                                 int cout, int k, int stride,
                                                                 bool relu) {
  ConvBn l;
  l.shape = {cin, cout, k, stride};
  l.relu = relu;
  l.weight = static_cast<int>(params_.size());
  params_.push_back({name + ".conv", AlignedVector<Real>(l.shape.weight_size()), {}});
  l.gamma = static_cast<int>(params_.size());
  params_.push_back({name + ".bn.gamma", AlignedVector<Real>(cout, Real(1)), {}});
  l.beta = static_cast<int>(params_.size());
  params_.push_back({name + ".bn.beta", AlignedVector<Real>(cout, Real(0)), {}});
  l.running_mean = static_cast<int>(buffers_.size());
  buffers_.push_back({name + ".bn.running_mean", AlignedVector<Real>(cout, Real(0)), {}});
  l.running_var = static_cast<int>(buffers_.size());
  buffers_.push_back({name + ".bn.running_var", AlignedVector<Real>(cout, Real(1)), {}});
  return l;
}

template <typename Real>
SpeakerNet<Real>::SpeakerNet(const NetworkConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  stem_ = make_conv_bn("stem", 1, cfg_.widths[0], 3, cfg_.stem_stride, true);
  int cin = cfg_.widths[0];
  int freq = kernels::ConvShape{1, 1, 3, cfg_.stem_stride}.out_h(cfg_.input_bins);
  for (size_t s = 0; s < cfg_.widths.size(); ++s) {
    for (int b = 0; b < cfg_.blocks[s]; ++b) {
      const int stride = (s > 0 && b == 0) ? 2 : 1;
      const int cout = cfg_.widths[s];
      const std::string name = "stage" + std::to_string(s) + ".block" + std::to_string(b);
      Block blk;
      blk.a = make_conv_bn(name + ".a", cin, cout, 3, stride, true);
      blk.b = make_conv_bn(name + ".b", cout, cout, 3, 1, false);
      if (stride != 1 || cin != cout) {
        blk.has_proj = true;
        blk.proj = make_conv_bn(name + ".proj", cin, cout, 1, stride, false);
      }
      blocks_.push_back(blk);
      freq = blk.a.shape.out_h(freq);
      cin = cout;
    }
  }
  const int pooled = 2 * cin * freq;
  embed_w_ = static_cast<int>(params_.size());
  params_.push_back({"embed.weight", AlignedVector<Real>(static_cast<size_t>(cfg_.embedding_dim) * pooled), {}});
  embed_b_ = static_cast<int>(params_.size());
  params_.push_back({"embed.bias", AlignedVector<Real>(cfg_.embedding_dim, Real(0)), {}});
  head_w_ = static_cast<int>(params_.size());
  params_.push_back({"head.weight", AlignedVector<Real>(static_cast<size_t>(cfg_.n_classes) * cfg_.embedding_dim), {}});
  head_b_ = static_cast<int>(params_.size());
  params_.push_back({"head.bias", AlignedVector<Real>(cfg_.n_classes, Real(0)), {}});

  // He-normal convolutions, uniform(+-1/sqrt(fan_in)) linear layers.
  Rng rng(seed);
  const auto init_conv = [&](const ConvBn& l) {
    const double sd = std::sqrt(2.0 / (l.shape.cin * l.shape.k * l.shape.k));
    for (auto& w : params_[l.weight].value) w = static_cast<Real>(sd * standard_normal(rng));
  };
  init_conv(stem_);
  for (const Block& blk : blocks_) {
    init_conv(blk.a);
    init_conv(blk.b);
    if (blk.has_proj) init_conv(blk.proj);
  }
  const auto init_linear = [&](int w, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : params_[w].value) v = static_cast<Real>(uniform_real(rng, -bound, bound));
  };
  init_linear(embed_w_, pooled);
  init_linear(head_w_, cfg_.embedding_dim);

  for (auto& p : params_) p.grad.assign(p.value.size(), Real(0));
}

template <typename Real>
size_t SpeakerNet<Real>::num_weights() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename Real>
int SpeakerNet<Real>::min_frames() const {
  int m = cfg_.stem_stride;
  for (const Block& blk : blocks_) m *= blk.a.shape.stride;
  return m;
}

template <typename Real>
int SpeakerNet<Real>::pooled_dim() const {
  return static_cast<int>(params_[embed_w_].value.size() / cfg_.embedding_dim);
}

template <typename Real>
void SpeakerNet<Real>::check_input(const Tensor<Real>& x) const {
  if (x.n < 1 || x.c != 1 || x.h != cfg_.input_bins) {
    throw std::invalid_argument("SpeakerNet: expected input [N, 1, " +
                                std::to_string(cfg_.input_bins) + ", T]");
  }
  if (x.w < min_frames()) {
    throw DataError("SpeakerNet: " + std::to_string(x.w) + " frames is below the minimum of " +
                    std::to_string(min_frames()));
  }
}

template <typename Real>
void SpeakerNet<Real>::conv_bn_forward(const ConvBn& l, const Tensor<Real>& in, Mode mode,
                                       ConvBnCache& c) const {
  Tensor<Real> z;
  kernels::conv2d_forward<Real>(in, value(l.weight), l.shape, z);
  const auto eps = static_cast<Real>(cfg_.bn_eps);
  if (mode == Mode::kTrain) {
    kernels::batchnorm_train_forward<Real>(z, value(l.gamma), value(l.beta), eps, c.out, c.bn);
  } else {
    kernels::batchnorm_eval_forward<Real>(z, value(l.gamma), value(l.beta),
                                          buffers_[l.running_mean].value,
                                          buffers_[l.running_var].value, eps, c.out);
  }
  if (l.relu) kernels::relu_inplace(c.out);
}

template <typename Real>
void SpeakerNet<Real>::conv_bn_backward(const ConvBn& l, const Tensor<Real>& in, ConvBnCache& c,
                                        Tensor<Real>& dout, Tensor<Real>* din) {
  if (l.relu) kernels::relu_backward_inplace(c.out, dout);
  Tensor<Real> dz;
  kernels::batchnorm_backward<Real>(dout, value(l.gamma), c.bn, dz, params_[l.gamma].grad,
                                    params_[l.beta].grad);
  kernels::conv2d_backward<Real>(in, value(l.weight), l.shape, dz, params_[l.weight].grad, din);
}

template <typename Real>
void SpeakerNet<Real>::forward(const Tensor<Real>& x, Mode mode, Cache& cache) const {
  check_input(x);
  conv_bn_forward(stem_, x, mode, cache.stem);
  cache.blocks.resize(blocks_.size());
  const Tensor<Real>* in = &cache.stem.out;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& blk = blocks_[i];
    BlockCache& bc = cache.blocks[i];
    conv_bn_forward(blk.a, *in, mode, bc.a);
    conv_bn_forward(blk.b, bc.a.out, mode, bc.b);
    const Tensor<Real>* shortcut = in;
    if (blk.has_proj) {
      conv_bn_forward(blk.proj, *in, mode, bc.proj);
      shortcut = &bc.proj.out;
    }
    bc.out = bc.b.out;
    for (size_t k = 0; k < bc.out.v.size(); ++k) bc.out.v[k] += shortcut->v[k];
    kernels::relu_inplace(bc.out);
    in = &bc.out;
  }
  kernels::stats_pool_forward<Real>(*in, static_cast<Real>(cfg_.pool_eps), cache.pooled);
  kernels::linear_forward<Real>(cache.pooled, value(embed_w_), value(embed_b_),
                                cfg_.embedding_dim, cache.embedding);
  if (mode == Mode::kTrain) {
    kernels::linear_forward<Real>(cache.embedding, value(head_w_), value(head_b_),
                                  cfg_.n_classes, cache.logits);
  }
}

template <typename Real>
void SpeakerNet<Real>::update_running(const ConvBn& l, const ConvBnCache& c, size_t count) {
  const Real m = static_cast<Real>(cfg_.bn_momentum);
  auto& rm = buffers_[l.running_mean].value;
  auto& rv = buffers_[l.running_var].value;
  const Real unbias = count > 1 ? static_cast<Real>(count) / static_cast<Real>(count - 1) : Real(1);
  for (size_t i = 0; i < rm.size(); ++i) {
    rm[i] = (Real(1) - m) * rm[i] + m * c.bn.mean[i];
    rv[i] = (Real(1) - m) * rv[i] + m * c.bn.var[i] * unbias;
  }
}

template <typename Real>
typename SpeakerNet<Real>::StepStats SpeakerNet<Real>::forward_backward(
    const Tensor<Real>& batch, std::span<const int> labels) {
  Cache cache;
  forward(batch, Mode::kTrain, cache);
  Tensor<Real> dlogits;
  const auto lr = kernels::softmax_cross_entropy<Real>(cache.logits, labels, &dlogits);

  Tensor<Real> dembed, dpooled;
  kernels::linear_backward<Real>(cache.embedding, value(head_w_), dlogits, params_[head_w_].grad,
                                 params_[head_b_].grad, &dembed);
  kernels::linear_backward<Real>(cache.pooled, value(embed_w_), dembed, params_[embed_w_].grad,
                                 params_[embed_b_].grad, &dpooled);
  const Tensor<Real>& top = blocks_.empty() ? cache.stem.out : cache.blocks.back().out;
  Tensor<Real> d;
  kernels::stats_pool_backward<Real>(top, cache.pooled, dpooled, d);

  for (size_t i = blocks_.size(); i-- > 0;) {
    const Block& blk = blocks_[i];
    BlockCache& bc = cache.blocks[i];
    const Tensor<Real>& in = i == 0 ? cache.stem.out : cache.blocks[i - 1].out;
    kernels::relu_backward_inplace(bc.out, d);
    Tensor<Real> dshort;
    if (blk.has_proj) {
      Tensor<Real> dproj = d;
      conv_bn_backward(blk.proj, in, bc.proj, dproj, &dshort);
    } else {
      dshort = d;
    }
    Tensor<Real> da;
    conv_bn_backward(blk.b, bc.a.out, bc.b, d, &da);
    Tensor<Real> din;
    conv_bn_backward(blk.a, in, bc.a, da, &din);
    for (size_t k = 0; k < din.v.size(); ++k) din.v[k] += dshort.v[k];
    d = std::move(din);
  }
  conv_bn_backward(stem_, batch, cache.stem, d, nullptr);

  // Running statistics are updated after the backward pass so that the
  // gradient is that of the loss evaluated with the batch statistics.
  const auto count = [&](const ConvBnCache& c) {
    return static_cast<size_t>(c.out.n) * c.out.plane();
  };
  update_running(stem_, cache.stem, count(cache.stem));
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& blk = blocks_[i];
    const BlockCache& bc = cache.blocks[i];
    update_running(blk.a, bc.a, count(bc.a));
    update_running(blk.b, bc.b, count(bc.b));
    if (blk.has_proj) update_running(blk.proj, bc.proj, count(bc.proj));
  }
  return {lr.loss, lr.correct, batch.n};
}

template <typename Real>
double SpeakerNet<Real>::loss(const Tensor<Real>& batch, std::span<const int> labels) const {
  Cache cache;
  forward(batch, Mode::kTrain, cache);
  return kernels::softmax_cross_entropy<Real>(cache.logits, labels, nullptr).loss;
}

template <typename Real>
Tensor<Real> SpeakerNet<Real>::embed_batch(const Tensor<Real>& batch) const {
  Cache cache;
  forward(batch, Mode::kEval, cache);
  return std::move(cache.embedding);
}

template <typename Real>
std::vector<Real> SpeakerNet<Real>::embed(const Tensor<Real>& single) const {
  if (single.n != 1) throw std::invalid_argument("SpeakerNet::embed expects a single input");
  const Tensor<Real> e = embed_batch(single);
  return {e.v.begin(), e.v.end()};
}

template class SpeakerNet<float>;
template class SpeakerNet<double>;

}  // namespace ssid
