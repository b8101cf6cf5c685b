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

#include "ssid/kernels.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssid/parallel.hpp"

namespace ssid::kernels {

namespace {

template <typename Real>
using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MapRow = Eigen::Map<RowMat<Real>>;
template <typename Real>
using CMapRow = Eigen::Map<const RowMat<Real>>;

// cols is [cin*k*k][oh*ow].
template <typename Real>
void im2col(const Real* x, int h, int w, const ConvShape& s, int oh, int ow, Real* cols) {
  const int p = s.pad();
  const size_t P = static_cast<size_t>(oh) * ow;
  for (int ci = 0; ci < s.cin; ++ci) {
    const Real* xc = x + static_cast<size_t>(ci) * h * w;
    for (int kh = 0; kh < s.k; ++kh) {
      for (int kw = 0; kw < s.k; ++kw) {
        Real* row = cols + ((static_cast<size_t>(ci) * s.k + kh) * s.k + kw) * P;
        for (int y = 0; y < oh; ++y) {
          const int ih = y * s.stride - p + kh;
          Real* dst = row + static_cast<size_t>(y) * ow;
          if (ih < 0 || ih >= h) {
            std::fill(dst, dst + ow, Real(0));
            continue;
          }
          const Real* src = xc + static_cast<size_t>(ih) * w;
          for (int xo = 0; xo < ow; ++xo) {
            const int iw = xo * s.stride - p + kw;
            dst[xo] = (iw >= 0 && iw < w) ? src[iw] : Real(0);
          }
        }
      }
    }
  }
}

// dx += scatter(cols); dx must be zeroed by the caller.
template <typename Real>
void col2im(const Real* cols, int h, int w, const ConvShape& s, int oh, int ow, Real* dx) {
  const int p = s.pad();
  const size_t P = static_cast<size_t>(oh) * ow;
  for (int ci = 0; ci < s.cin; ++ci) {
    Real* dc = dx + static_cast<size_t>(ci) * h * w;
    for (int kh = 0; kh < s.k; ++kh) {
      for (int kw = 0; kw < s.k; ++kw) {
        const Real* row = cols + ((static_cast<size_t>(ci) * s.k + kh) * s.k + kw) * P;
        for (int y = 0; y < oh; ++y) {
          const int ih = y * s.stride - p + kh;
          if (ih < 0 || ih >= h) continue;
          const Real* src = row + static_cast<size_t>(y) * ow;
          Real* dst = dc + static_cast<size_t>(ih) * w;
          for (int xo = 0; xo < ow; ++xo) {
            const int iw = xo * s.stride - p + kw;
            if (iw >= 0 && iw < w) dst[iw] += src[xo];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename Real>
void conv2d_forward(const Tensor<Real>& x, std::span<const Real> weight, const ConvShape& s,
                    Tensor<Real>& y) {
  if (x.c != s.cin || weight.size() != s.weight_size()) {
    throw std::invalid_argument("conv2d_forward: shape mismatch");
  }
  const int oh = s.out_h(x.h), ow = s.out_w(x.w);
  y = Tensor<Real>(x.n, s.cout, oh, ow);
  const int K = s.cin * s.k * s.k;
  const int P = oh * ow;
  CMapRow<Real> W(weight.data(), s.cout, K);
#pragma omp parallel
  {
    AlignedVector<Real> cols(static_cast<size_t>(K) * P);
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      im2col(x.sample(n), x.h, x.w, s, oh, ow, cols.data());
      MapRow<Real> Y(y.sample(n), s.cout, P);
      Y.noalias() = W * CMapRow<Real>(cols.data(), K, P);
    }
  }
}

template <typename Real>
void conv2d_backward(const Tensor<Real>& x, std::span<const Real> weight, const ConvShape& s,
                     const Tensor<Real>& dy, std::span<Real> dweight, Tensor<Real>* dx) {
  const int oh = s.out_h(x.h), ow = s.out_w(x.w);
  if (dy.n != x.n || dy.c != s.cout || dy.h != oh || dy.w != ow ||
      dweight.size() != s.weight_size()) {
    throw std::invalid_argument("conv2d_backward: shape mismatch");
  }
  const int K = s.cin * s.k * s.k;
  const int P = oh * ow;
  if (dx != nullptr) *dx = Tensor<Real>(x.n, x.c, x.h, x.w);
  CMapRow<Real> W(weight.data(), s.cout, K);
  const int nthreads = max_threads();
  std::vector<AlignedVector<Real>> partial(nthreads, AlignedVector<Real>(dweight.size(), Real(0)));
#pragma omp parallel
  {
    AlignedVector<Real> cols(static_cast<size_t>(K) * P);
    AlignedVector<Real> dcols(dx != nullptr ? static_cast<size_t>(K) * P : 0);
    MapRow<Real> dW(partial[thread_id()].data(), s.cout, K);
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      im2col(x.sample(n), x.h, x.w, s, oh, ow, cols.data());
      CMapRow<Real> dY(dy.sample(n), s.cout, P);
      dW.noalias() += dY * CMapRow<Real>(cols.data(), K, P).transpose();
      if (dx != nullptr) {
        MapRow<Real>(dcols.data(), K, P).noalias() = W.transpose() * dY;
        col2im(dcols.data(), x.h, x.w, s, oh, ow, dx->sample(n));
      }
    }
  }
  std::fill(dweight.begin(), dweight.end(), Real(0));
  for (const auto& p : partial) {
    for (size_t i = 0; i < p.size(); ++i) dweight[i] += p[i];
  }
}

template <typename Real>
void batchnorm_train_forward(const Tensor<Real>& x, std::span<const Real> gamma,
                             std::span<const Real> beta, Real eps, Tensor<Real>& y,
                             BatchNormCache<Real>& cache) {
  const int C = x.c;
  const size_t plane = x.plane();
  const double count = static_cast<double>(x.n) * plane;
  y = Tensor<Real>(x.n, x.c, x.h, x.w);
  cache.mean.assign(C, Real(0));
  cache.var.assign(C, Real(0));
  cache.inv_std.assign(C, Real(0));
  cache.xhat = Tensor<Real>(x.n, x.c, x.h, x.w);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < C; ++c) {
    double sum = 0.0;
    for (int n = 0; n < x.n; ++n) {
      const Real* p = x.v.data() + x.index(n, c, 0, 0);
      for (size_t i = 0; i < plane; ++i) sum += p[i];
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (int n = 0; n < x.n; ++n) {
      const Real* p = x.v.data() + x.index(n, c, 0, 0);
      for (size_t i = 0; i < plane; ++i) {
        const double d = p[i] - mean;
        sq += d * d;
      }
    }
    const double var = sq / count;
    const double inv_std = 1.0 / std::sqrt(var + eps);
    cache.mean[c] = static_cast<Real>(mean);
    cache.var[c] = static_cast<Real>(var);
    cache.inv_std[c] = static_cast<Real>(inv_std);
    for (int n = 0; n < x.n; ++n) {
      const size_t off = x.index(n, c, 0, 0);
      for (size_t i = 0; i < plane; ++i) {
        const Real xh = static_cast<Real>((x.v[off + i] - mean) * inv_std);
        cache.xhat.v[off + i] = xh;
        y.v[off + i] = gamma[c] * xh + beta[c];
      }
    }
  }
}

template <typename Real>
void batchnorm_eval_forward(const Tensor<Real>& x, std::span<const Real> gamma,
                            std::span<const Real> beta, std::span<const Real> running_mean,
                            std::span<const Real> running_var, Real eps, Tensor<Real>& y) {
  y = Tensor<Real>(x.n, x.c, x.h, x.w);
  const size_t plane = x.plane();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < x.c; ++c) {
    const Real scale = gamma[c] / std::sqrt(running_var[c] + eps);
    const Real shift = beta[c] - scale * running_mean[c];
    for (int n = 0; n < x.n; ++n) {
      const size_t off = x.index(n, c, 0, 0);
      for (size_t i = 0; i < plane; ++i) y.v[off + i] = scale * x.v[off + i] + shift;
    }
  }
}

template <typename Real>
void batchnorm_backward(const Tensor<Real>& dy, std::span<const Real> gamma,
                        const BatchNormCache<Real>& cache, Tensor<Real>& dx,
                        std::span<Real> dgamma, std::span<Real> dbeta) {
  const size_t plane = dy.plane();
  const double count = static_cast<double>(dy.n) * plane;
  dx = Tensor<Real>(dy.n, dy.c, dy.h, dy.w);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < dy.c; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int n = 0; n < dy.n; ++n) {
      const size_t off = dy.index(n, c, 0, 0);
      for (size_t i = 0; i < plane; ++i) {
        sum_dy += dy.v[off + i];
        sum_dy_xhat += static_cast<double>(dy.v[off + i]) * cache.xhat.v[off + i];
      }
    }
    dgamma[c] = static_cast<Real>(sum_dy_xhat);
    dbeta[c] = static_cast<Real>(sum_dy);
    const double k = static_cast<double>(gamma[c]) * cache.inv_std[c] / count;
    for (int n = 0; n < dy.n; ++n) {
      const size_t off = dy.index(n, c, 0, 0);
      for (size_t i = 0; i < plane; ++i) {
        dx.v[off + i] = static_cast<Real>(
            k * (count * dy.v[off + i] - sum_dy - cache.xhat.v[off + i] * sum_dy_xhat));
      }
    }
  }
}

template <typename Real>
void relu_inplace(Tensor<Real>& x) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.v.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) x.v[i] = std::max(x.v[i], Real(0));
}

template <typename Real>
void relu_backward_inplace(const Tensor<Real>& y, Tensor<Real>& dy) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(dy.v.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!(y.v[i] > Real(0))) dy.v[i] = Real(0);
  }
}

template <typename Real>
void stats_pool_forward(const Tensor<Real>& x, Real eps, Tensor<Real>& y) {
  if (x.w < 1) throw std::invalid_argument("stats_pool: need at least one frame");
  const int D = x.c * x.h;
  const int T = x.w;
  y = Tensor<Real>(x.n, 2 * D, 1, 1);
#pragma omp parallel for schedule(static) collapse(2)
  for (int n = 0; n < x.n; ++n) {
    for (int d = 0; d < D; ++d) {
      const Real* row = x.sample(n) + static_cast<size_t>(d) * T;
      double sum = 0.0;
      for (int t = 0; t < T; ++t) sum += row[t];
      const double mean = sum / T;
      double sq = 0.0;
      for (int t = 0; t < T; ++t) {
        const double dlt = row[t] - mean;
        sq += dlt * dlt;
      }
      Real* out = y.sample(n);
      out[d] = static_cast<Real>(mean);
      out[D + d] = static_cast<Real>(std::sqrt(sq / T + eps));
    }
  }
}

template <typename Real>
void stats_pool_backward(const Tensor<Real>& x, const Tensor<Real>& y, const Tensor<Real>& dy,
                         Tensor<Real>& dx) {
  const int D = x.c * x.h;
  const int T = x.w;
  dx = Tensor<Real>(x.n, x.c, x.h, x.w);
#pragma omp parallel for schedule(static) collapse(2)
  for (int n = 0; n < x.n; ++n) {
    for (int d = 0; d < D; ++d) {
      const Real* row = x.sample(n) + static_cast<size_t>(d) * T;
      Real* drow = dx.sample(n) + static_cast<size_t>(d) * T;
      const double mean = y.sample(n)[d];
      const double sd = y.sample(n)[D + d];
      const double dmean = dy.sample(n)[d];
      const double dsd = dy.sample(n)[D + d];
      for (int t = 0; t < T; ++t) {
        drow[t] = static_cast<Real>(dmean / T + dsd * (row[t] - mean) / (T * sd));
      }
    }
  }
}

template <typename Real>
std::vector<Real> stats_pool(std::span<const Real> maps, int channels, int frames, Real eps) {
  if (frames < 1) throw std::invalid_argument("stats_pool: need at least one frame");
  if (maps.size() != static_cast<size_t>(channels) * frames) {
    throw std::invalid_argument("stats_pool: size mismatch");
  }
  Tensor<Real> x(1, channels, 1, frames);
  std::copy(maps.begin(), maps.end(), x.v.begin());
  Tensor<Real> y;
  stats_pool_forward(x, eps, y);
  return {y.v.begin(), y.v.end()};
}

template <typename Real>
void linear_forward(const Tensor<Real>& x, std::span<const Real> weight, std::span<const Real> bias,
                    int out_features, Tensor<Real>& y) {
  const int in = static_cast<int>(x.sample_size());
  if (weight.size() != static_cast<size_t>(out_features) * in ||
      bias.size() != static_cast<size_t>(out_features)) {
    throw std::invalid_argument("linear_forward: shape mismatch");
  }
  y = Tensor<Real>(x.n, out_features, 1, 1);
  CMapRow<Real> X(x.v.data(), x.n, in);
  CMapRow<Real> W(weight.data(), out_features, in);
  MapRow<Real> Y(y.v.data(), x.n, out_features);
  Y.noalias() = X * W.transpose();
  Y.rowwise() += Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>(bias.data(), out_features);
}

template <typename Real>
void linear_backward(const Tensor<Real>& x, std::span<const Real> weight, const Tensor<Real>& dy,
                     std::span<Real> dweight, std::span<Real> dbias, Tensor<Real>* dx) {
  const int in = static_cast<int>(x.sample_size());
  const int out = dy.c;
  CMapRow<Real> X(x.v.data(), x.n, in);
  CMapRow<Real> dY(dy.v.data(), x.n, out);
  MapRow<Real>(dweight.data(), out, in).noalias() = dY.transpose() * X;
  Eigen::Map<Eigen::Matrix<Real, 1, Eigen::Dynamic>>(dbias.data(), out) = dY.colwise().sum();
  if (dx != nullptr) {
    *dx = Tensor<Real>(x.n, x.c, x.h, x.w);
    MapRow<Real>(dx->v.data(), x.n, in).noalias() =
        dY * CMapRow<Real>(weight.data(), out, in);
  }
}

template <typename Real>
LossResult softmax_cross_entropy(const Tensor<Real>& logits, std::span<const int> labels,
                                 Tensor<Real>* dlogits) {
  const int N = logits.n;
  const int K = static_cast<int>(logits.sample_size());
  if (labels.size() != static_cast<size_t>(N)) {
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  }
  if (dlogits != nullptr) *dlogits = Tensor<Real>(logits.n, logits.c, logits.h, logits.w);
  LossResult r;
  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    const Real* z = logits.sample(n);
    const int label = labels[n];
    if (label < 0 || label >= K) throw std::out_of_range("softmax_cross_entropy: bad label");
    const Real zmax = *std::max_element(z, z + K);
    double denom = 0.0;
    for (int k = 0; k < K; ++k) denom += std::exp(static_cast<double>(z[k] - zmax));
    const double log_denom = std::log(denom);
    total += log_denom - (z[label] - zmax);
    if (std::max_element(z, z + K) - z == label) ++r.correct;
    if (dlogits != nullptr) {
      Real* g = dlogits->sample(n);
      for (int k = 0; k < K; ++k) {
        const double p = std::exp(static_cast<double>(z[k] - zmax) - log_denom);
        g[k] = static_cast<Real>((p - (k == label ? 1.0 : 0.0)) / N);
      }
    }
  }
  r.loss = total / N;
  return r;
}

#define SSID_INSTANTIATE_KERNELS(Real)                                                          \
  template void conv2d_forward<Real>(const Tensor<Real>&, std::span<const Real>,                 \
                                     const ConvShape&, Tensor<Real>&);                          \
  template void conv2d_backward<Real>(const Tensor<Real>&, std::span<const Real>,                \
                                      const ConvShape&, const Tensor<Real>&, std::span<Real>,   \
                                      Tensor<Real>*);                                           \
  template void batchnorm_train_forward<Real>(const Tensor<Real>&, std::span<const Real>,        \
                                              std::span<const Real>, Real, Tensor<Real>&,       \
                                              BatchNormCache<Real>&);                           \
  template void batchnorm_eval_forward<Real>(const Tensor<Real>&, std::span<const Real>,         \
                                             std::span<const Real>, std::span<const Real>,      \
                                             std::span<const Real>, Real, Tensor<Real>&);       \
  template void batchnorm_backward<Real>(const Tensor<Real>&, std::span<const Real>,             \
                                         const BatchNormCache<Real>&, Tensor<Real>&,            \
                                         std::span<Real>, std::span<Real>);                     \
  template void relu_inplace<Real>(Tensor<Real>&);                                              \
  template void relu_backward_inplace<Real>(const Tensor<Real>&, Tensor<Real>&);                \
  template void stats_pool_forward<Real>(const Tensor<Real>&, Real, Tensor<Real>&);             \
  template void stats_pool_backward<Real>(const Tensor<Real>&, const Tensor<Real>&,             \
                                          const Tensor<Real>&, Tensor<Real>&);                  \
  template std::vector<Real> stats_pool<Real>(std::span<const Real>, int, int, Real);           \
  template void linear_forward<Real>(const Tensor<Real>&, std::span<const Real>,                \
                                     std::span<const Real>, int, Tensor<Real>&);                \
  template void linear_backward<Real>(const Tensor<Real>&, std::span<const Real>,               \
                                      const Tensor<Real>&, std::span<Real>, std::span<Real>,    \
                                      Tensor<Real>*);                                           \
  template LossResult softmax_cross_entropy<Real>(const Tensor<Real>&, std::span<const int>,    \
                                                  Tensor<Real>*);

SSID_INSTANTIATE_KERNELS(float)
SSID_INSTANTIATE_KERNELS(double)

#undef SSID_INSTANTIATE_KERNELS

}  // namespace ssid::kernels
