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

#include <cstddef>
#include <vector>

#include "ssid/aligned.hpp"

namespace ssid {

// Dense NCHW tensor. For speech features H is the mel axis and W is time.
template <typename Real>
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  AlignedVector<Real> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_) * c_ * h_ * w_, Real(0)) {}

  size_t size() const { return v.size(); }
  size_t plane() const { return static_cast<size_t>(h) * w; }
  size_t sample_size() const { return static_cast<size_t>(c) * h * w; }

  size_t index(int in, int ic, int ih, int iw) const {
    return ((static_cast<size_t>(in) * c + ic) * h + ih) * w + iw;
  }
  Real& operator()(int in, int ic, int ih, int iw) { return v[index(in, ic, ih, iw)]; }
  Real operator()(int in, int ic, int ih, int iw) const { return v[index(in, ic, ih, iw)]; }

  Real* sample(int in) { return v.data() + static_cast<size_t>(in) * sample_size(); }
  const Real* sample(int in) const { return v.data() + static_cast<size_t>(in) * sample_size(); }

  bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
};

}  // namespace ssid
