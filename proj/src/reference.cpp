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

#include "ssid/reference.hpp"

#include <cmath>
#include <numbers>

namespace ssid::reference {

template <typename Real>
void conv2d_forward(const Tensor<Real>& x, std::span<const Real> weight,
                    const kernels::ConvShape& s, Tensor<Real>& y) {
  const int oh = s.out_h(x.h), ow = s.out_w(x.w), p = s.pad();
  y = Tensor<Real>(x.n, s.cout, oh, ow);
  for (int n = 0; n < x.n; ++n)
    for (int co = 0; co < s.cout; ++co)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double acc = 0.0;
          for (int ci = 0; ci < s.cin; ++ci)
            for (int kh = 0; kh < s.k; ++kh)
              for (int kw = 0; kw < s.k; ++kw) {
                const int ih = i * s.stride - p + kh;
                const int iw = j * s.stride - p + kw;
                if (ih < 0 || ih >= x.h || iw < 0 || iw >= x.w) continue;
                acc += static_cast<double>(weight[((co * s.cin + ci) * s.k + kh) * s.k + kw]) *
                       x(n, ci, ih, iw);
              }
          y(n, co, i, j) = static_cast<Real>(acc);
        }
}

template <typename Real>
void conv2d_backward(const Tensor<Real>& x, std::span<const Real> weight,
                     const kernels::ConvShape& s, const Tensor<Real>& dy,
                     std::span<Real> dweight, Tensor<Real>& dx) {
  const int p = s.pad();
  std::vector<double> dw(dweight.size(), 0.0);
  std::vector<double> dxd(x.size(), 0.0);
  for (int n = 0; n < x.n; ++n)
    for (int co = 0; co < s.cout; ++co)
      for (int i = 0; i < dy.h; ++i)
        for (int j = 0; j < dy.w; ++j) {
          const double g = dy(n, co, i, j);
          for (int ci = 0; ci < s.cin; ++ci)
            for (int kh = 0; kh < s.k; ++kh)
              for (int kw = 0; kw < s.k; ++kw) {
                const int ih = i * s.stride - p + kh;
                const int iw = j * s.stride - p + kw;
                if (ih < 0 || ih >= x.h || iw < 0 || iw >= x.w) continue;
                const size_t widx = ((co * s.cin + ci) * s.k + kh) * s.k + kw;
                dw[widx] += g * x(n, ci, ih, iw);
                dxd[x.index(n, ci, ih, iw)] += g * weight[widx];
              }
        }
  for (size_t i = 0; i < dw.size(); ++i) dweight[i] = static_cast<Real>(dw[i]);
  dx = Tensor<Real>(x.n, x.c, x.h, x.w);
  for (size_t i = 0; i < dxd.size(); ++i) dx.v[i] = static_cast<Real>(dxd[i]);
}

std::vector<double> stats_pool(std::span<const double> maps, int channels, int frames, double eps) {
  std::vector<double> out(2 * static_cast<size_t>(channels));
  for (int c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (int t = 0; t < frames; ++t) mean += maps[static_cast<size_t>(c) * frames + t];
    mean /= frames;
    double var = 0.0;
    for (int t = 0; t < frames; ++t) {
      const double d = maps[static_cast<size_t>(c) * frames + t] - mean;
      var += d * d;
    }
    var /= frames;
    out[c] = mean;
    out[channels + c] = std::sqrt(var + eps);
  }
  return out;
}

FeatureMatrix logmel_dft(std::span<const float> samples, const LogMelExtractor& extractor) {
  const FrontEndConfig& cfg = extractor.config();
  const int T = num_frames(samples.size(), cfg);
  const int N = cfg.fft_size;
  const int n_bins = N / 2 + 1;
  FeatureMatrix out(T, cfg.n_mels);
  std::vector<double> power(n_bins);
  for (int t = 0; t < T; ++t) {
    const float* src = samples.data() + static_cast<size_t>(t) * cfg.hop_length;
    for (int k = 0; k < n_bins; ++k) {
      double re = 0.0, im = 0.0;
      for (int n = 0; n < cfg.win_length; ++n) {
        const double v = static_cast<double>(src[n]) * extractor.window()[n];
        const double ang = -2.0 * std::numbers::pi * k * n / N;
        re += v * std::cos(ang);
        im += v * std::sin(ang);
      }
      power[k] = re * re + im * im;
    }
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) {
        e += extractor.filterbank()[static_cast<size_t>(m) * n_bins + k] * power[k];
      }
      out.at(t, m) = static_cast<float>(std::log(e + cfg.power_floor));
    }
  }
  return out;
}

std::vector<double> convolve_full(std::span<const float> a, std::span<const float> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += static_cast<double>(a[i]) * b[j];
  return out;
}

template void conv2d_forward<float>(const Tensor<float>&, std::span<const float>,
                                    const kernels::ConvShape&, Tensor<float>&);
template void conv2d_forward<double>(const Tensor<double>&, std::span<const double>,
                                     const kernels::ConvShape&, Tensor<double>&);
template void conv2d_backward<float>(const Tensor<float>&, std::span<const float>,
                                     const kernels::ConvShape&, const Tensor<float>&,
                                     std::span<float>, Tensor<float>&);
template void conv2d_backward<double>(const Tensor<double>&, std::span<const double>,
                                      const kernels::ConvShape&, const Tensor<double>&,
                                      std::span<double>, Tensor<double>&);

}  // namespace ssid::reference
