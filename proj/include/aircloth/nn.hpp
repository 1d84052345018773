// Copyright 2026 The aircloth Authors
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

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "aircloth/rng.hpp"

namespace aircloth {

// Dense (channels, height, width) tensor. Vectors are (n, 1, 1).
template <class S>
struct Tensor {
  std::array<int, 3> shape{0, 0, 0};
  std::vector<S> data;

  Tensor() = default;
  Tensor(int c, int h, int w)
      : shape{c, h, w},
        data(static_cast<std::size_t>(c) * h * w, S(0)) {}

  int channels() const { return shape[0]; }
  int height() const { return shape[1]; }
  int width() const { return shape[2]; }
  std::size_t size() const { return data.size(); }

  S& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
  }
  S at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
  }
  const S* plane(int c) const {
    return data.data() + static_cast<std::size_t>(c) * shape[1] * shape[2];
  }
  S* plane(int c) {
    return data.data() + static_cast<std::size_t>(c) * shape[1] * shape[2];
  }
};

// Flat parameter/gradient storage shared by a model's layers. Keeping one
// contiguous array makes Adam, checkpointing and finite-difference checks
// uniform.
template <class S>
class ParamStore {
 public:
  struct Slice {
    int offset = 0;
    int size = 0;
  };

  Slice allocate(int n) {
    Slice s{static_cast<int>(values_.size()), n};
    values_.resize(values_.size() + n, S(0));
    grads_.resize(grads_.size() + n, S(0));
    return s;
  }

  std::vector<S>& values() { return values_; }
  const std::vector<S>& values() const { return values_; }
  std::vector<S>& grads() { return grads_; }
  const std::vector<S>& grads() const { return grads_; }

  S* value(Slice s) { return values_.data() + s.offset; }
  const S* value(Slice s) const { return values_.data() + s.offset; }
  S* grad(Slice s) { return grads_.data() + s.offset; }

  void zero_grad() { std::fill(grads_.begin(), grads_.end(), S(0)); }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  std::vector<S> values_;
  std::vector<S> grads_;
};

template <class S>
struct Conv2d {
  int in_ch = 0, out_ch = 0, ksize = 3, stride = 1, pad = 1;
  typename ParamStore<S>::Slice w, b;

  void init(ParamStore<S>& ps, Rng& rng) {
    w = ps.allocate(out_ch * in_ch * ksize * ksize);
    b = ps.allocate(out_ch);
    const double bound = 1.0 / std::sqrt(double(in_ch) * ksize * ksize);
    for (int i = 0; i < w.size; ++i) {
      ps.value(w)[i] = static_cast<S>(rng.uniform(-bound, bound));
    }
    for (int i = 0; i < b.size; ++i) {
      ps.value(b)[i] = static_cast<S>(rng.uniform(-bound, bound));
    }
  }

  int out_extent(int in) const { return (in + 2 * pad - ksize) / stride + 1; }

  Tensor<S> forward(const ParamStore<S>& ps, const Tensor<S>& x) const {
    const int oh = out_extent(x.height());
    const int ow = out_extent(x.width());
    Tensor<S> y(out_ch, oh, ow);
    const S* wv = ps.value(w);
    const S* bv = ps.value(b);
    for (int oc = 0; oc < out_ch; ++oc) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          S acc = bv[oc];
          for (int ic = 0; ic < in_ch; ++ic) {
            const S* xp = x.plane(ic);
            const S* wp = wv + ((oc * in_ch + ic) * ksize) * ksize;
            for (int ky = 0; ky < ksize; ++ky) {
              const int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= x.height()) continue;
              const S* xrow = xp + static_cast<std::size_t>(iy) * x.width();
              const S* wrow = wp + ky * ksize;
              for (int kx = 0; kx < ksize; ++kx) {
                const int ix = ox * stride + kx - pad;
                if (ix < 0 || ix >= x.width()) continue;
                acc += wrow[kx] * xrow[ix];
              }
            }
          }
          y.at(oc, oy, ox) = acc;
        }
      }
    }
    return y;
  }

  Tensor<S> backward(ParamStore<S>& ps, const Tensor<S>& x,
                     const Tensor<S>& gout) const {
    Tensor<S> gin(x.channels(), x.height(), x.width());
    const S* wv = ps.value(w);
    S* gw = ps.grad(w);
    S* gb = ps.grad(b);
    for (int oc = 0; oc < out_ch; ++oc) {
      for (int oy = 0; oy < gout.height(); ++oy) {
        for (int ox = 0; ox < gout.width(); ++ox) {
          const S g = gout.at(oc, oy, ox);
          gb[oc] += g;
          for (int ic = 0; ic < in_ch; ++ic) {
            const S* xp = x.plane(ic);
            S* gp = gin.plane(ic);
            const int base = ((oc * in_ch + ic) * ksize) * ksize;
            for (int ky = 0; ky < ksize; ++ky) {
              const int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= x.height()) continue;
              const std::size_t row = static_cast<std::size_t>(iy) * x.width();
              for (int kx = 0; kx < ksize; ++kx) {
                const int ix = ox * stride + kx - pad;
                if (ix < 0 || ix >= x.width()) continue;
                gw[base + ky * ksize + kx] += g * xp[row + ix];
                gp[row + ix] += g * wv[base + ky * ksize + kx];
              }
            }
          }
        }
      }
    }
    return gin;
  }
};

template <class S>
struct Linear {
  int in_dim = 0, out_dim = 0;
  typename ParamStore<S>::Slice w, b;

  void init(ParamStore<S>& ps, Rng& rng) {
    w = ps.allocate(out_dim * in_dim);
    b = ps.allocate(out_dim);
    const double bound = 1.0 / std::sqrt(double(in_dim));
    for (int i = 0; i < w.size; ++i) {
      ps.value(w)[i] = static_cast<S>(rng.uniform(-bound, bound));
    }
    for (int i = 0; i < b.size; ++i) {
      ps.value(b)[i] = static_cast<S>(rng.uniform(-bound, bound));
    }
  }

  Tensor<S> forward(const ParamStore<S>& ps, const Tensor<S>& x) const {
    Tensor<S> y(out_dim, 1, 1);
    const S* wv = ps.value(w);
    const S* bv = ps.value(b);
    for (int o = 0; o < out_dim; ++o) {
      S acc = bv[o];
      const S* row = wv + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) acc += row[i] * x.data[i];
      y.data[o] = acc;
    }
    return y;
  }

  Tensor<S> backward(ParamStore<S>& ps, const Tensor<S>& x,
                     const Tensor<S>& gout) const {
    Tensor<S> gin(in_dim, 1, 1);
    const S* wv = ps.value(w);
    S* gw = ps.grad(w);
    S* gb = ps.grad(b);
    for (int o = 0; o < out_dim; ++o) {
      const S g = gout.data[o];
      gb[o] += g;
      const std::size_t base = static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) {
        gw[base + i] += g * x.data[i];
        gin.data[i] += g * wv[base + i];
      }
    }
    return gin;
  }
};

// ELU keeps the finite-difference gradient oracle meaningful everywhere
// (C1, unlike ReLU).
template <class S>
Tensor<S> elu(const Tensor<S>& x) {
  Tensor<S> y = x;
  for (S& v : y.data) {
    if (v < S(0)) v = std::exp(v) - S(1);
  }
  return y;
}

// Uses the cached output: d/dx = 1 for x>0, else exp(x) = y + 1.
template <class S>
Tensor<S> elu_backward(const Tensor<S>& y, const Tensor<S>& gout) {
  Tensor<S> gin = gout;
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    if (y.data[i] < S(0)) gin.data[i] *= y.data[i] + S(1);
  }
  return gin;
}

template <class S>
Tensor<S> sigmoid(const Tensor<S>& x) {
  Tensor<S> y = x;
  for (S& v : y.data) v = S(1) / (S(1) + std::exp(-v));
  return y;
}

template <class S>
Tensor<S> sigmoid_backward(const Tensor<S>& y, const Tensor<S>& gout) {
  Tensor<S> gin = gout;
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    gin.data[i] *= y.data[i] * (S(1) - y.data[i]);
  }
  return gin;
}

template <class S>
Tensor<S> upsample2x(const Tensor<S>& x) {
  Tensor<S> y(x.channels(), x.height() * 2, x.width() * 2);
  for (int c = 0; c < x.channels(); ++c) {
    for (int r = 0; r < y.height(); ++r) {
      for (int col = 0; col < y.width(); ++col) {
        y.at(c, r, col) = x.at(c, r / 2, col / 2);
      }
    }
  }
  return y;
}

template <class S>
Tensor<S> upsample2x_backward(const Tensor<S>& gout, int in_h, int in_w) {
  Tensor<S> gin(gout.channels(), in_h, in_w);
  for (int c = 0; c < gout.channels(); ++c) {
    for (int r = 0; r < gout.height(); ++r) {
      for (int col = 0; col < gout.width(); ++col) {
        gin.at(c, r / 2, col / 2) += gout.at(c, r, col);
      }
    }
  }
  return gin;
}

template <class S>
Tensor<S> concat_channels(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw std::invalid_argument("concat_channels: spatial shape mismatch");
  }
  Tensor<S> y(a.channels() + b.channels(), a.height(), a.width());
  std::copy(a.data.begin(), a.data.end(), y.data.begin());
  std::copy(b.data.begin(), b.data.end(), y.data.begin() + a.data.size());
  return y;
}

template <class S>
void split_channels_backward(const Tensor<S>& gout, Tensor<S>& ga,
                             Tensor<S>& gb) {
  std::copy(gout.data.begin(), gout.data.begin() + ga.data.size(),
            ga.data.begin());
  std::copy(gout.data.begin() + ga.data.size(), gout.data.end(),
            gb.data.begin());
}

template <class S>
Tensor<S> global_avg_pool(const Tensor<S>& x) {
  Tensor<S> y(x.channels(), 1, 1);
  const S scale = S(1) / S(x.height() * x.width());
  for (int c = 0; c < x.channels(); ++c) {
    const S* p = x.plane(c);
    S acc = S(0);
    for (int i = 0; i < x.height() * x.width(); ++i) acc += p[i];
    y.data[c] = acc * scale;
  }
  return y;
}

template <class S>
Tensor<S> global_avg_pool_backward(const Tensor<S>& gout, int in_h, int in_w) {
  Tensor<S> gin(gout.channels(), in_h, in_w);
  const S scale = S(1) / S(in_h * in_w);
  for (int c = 0; c < gout.channels(); ++c) {
    S* p = gin.plane(c);
    const S g = gout.data[c] * scale;
    for (int i = 0; i < in_h * in_w; ++i) p[i] = g;
  }
  return gin;
}

// Adam with decoupled weight decay.
template <class S>
struct AdamState {
  double lr = 1e-4;
  double weight_decay = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<S> m, v;
};

template <class S>
void adam_step(AdamState<S>& state, std::vector<S>& params,
               const std::vector<S>& grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), S(0));
    state.v.assign(params.size(), S(0));
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: moment shape mismatch");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double m = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    const double v = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    state.m[i] = static_cast<S>(m);
    state.v[i] = static_cast<S>(v);
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    params[i] -= static_cast<S>(state.lr * mhat / (std::sqrt(vhat) + state.eps) +
                                state.lr * state.weight_decay * params[i]);
  }
}

}  // namespace aircloth
