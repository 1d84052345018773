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
#include <sstream>
#include <string>

#include "aircloth/actions.hpp"
#include "aircloth/nn.hpp"

namespace aircloth {

// Fully-convolutional encoder/decoder mapping 3xHxW -> 1xHxW per-pixel
// predicted coverage in [0, 1]: 4 stride-2 convolutions down, 4 upsampling
// convolutions back with skip connections, sigmoid head. H = W, multiple of
// 16.
struct GraspNetSpec {
  int in_channels = 3;
  std::array<int, 4> enc{8, 16, 16, 16};
  std::array<int, 3> dec{16, 16, 8};
};

template <class S>
class GraspValueModel {
 public:
  GraspValueModel(const GraspNetSpec& spec, std::uint64_t init_seed)
      : spec_(spec) {
    Rng rng(init_seed);
    auto conv = [&](int in, int out, int stride) {
      Conv2d<S> c;
      c.in_ch = in;
      c.out_ch = out;
      c.ksize = 3;
      c.stride = stride;
      c.pad = 1;
      c.init(ps_, rng);
      return c;
    };
    enc1_ = conv(spec.in_channels, spec.enc[0], 2);
    enc2_ = conv(spec.enc[0], spec.enc[1], 2);
    enc3_ = conv(spec.enc[1], spec.enc[2], 2);
    enc4_ = conv(spec.enc[2], spec.enc[3], 2);
    dec4_ = conv(spec.enc[3] + spec.enc[2], spec.dec[0], 1);
    dec3_ = conv(spec.dec[0] + spec.enc[1], spec.dec[1], 1);
    dec2_ = conv(spec.dec[1] + spec.enc[0], spec.dec[2], 1);
    head_ = conv(spec.dec[2], 1, 1);
  }

  struct Trace {
    Tensor<S> x;
    Tensor<S> e1p, e1, e2p, e2, e3p, e3, e4p, e4;
    Tensor<S> c4, d4p, d4, c3, d3p, d3, c2, d2p, d2, u1, hp, y;
  };

  Tensor<S> forward(const Tensor<S>& img, Trace& t) const {
    if (img.channels() != spec_.in_channels || img.height() != img.width() ||
        img.height() % 16 != 0) {
      throw std::invalid_argument("GraspValueModel: bad input shape");
    }
    t.x = img;
    t.e1p = enc1_.forward(ps_, t.x);
    t.e1 = elu(t.e1p);
    t.e2p = enc2_.forward(ps_, t.e1);
    t.e2 = elu(t.e2p);
    t.e3p = enc3_.forward(ps_, t.e2);
    t.e3 = elu(t.e3p);
    t.e4p = enc4_.forward(ps_, t.e3);
    t.e4 = elu(t.e4p);
    t.c4 = concat_channels(upsample2x(t.e4), t.e3);
    t.d4p = dec4_.forward(ps_, t.c4);
    t.d4 = elu(t.d4p);
    t.c3 = concat_channels(upsample2x(t.d4), t.e2);
    t.d3p = dec3_.forward(ps_, t.c3);
    t.d3 = elu(t.d3p);
    t.c2 = concat_channels(upsample2x(t.d3), t.e1);
    t.d2p = dec2_.forward(ps_, t.c2);
    t.d2 = elu(t.d2p);
    t.u1 = upsample2x(t.d2);
    t.hp = head_.forward(ps_, t.u1);
    t.y = sigmoid(t.hp);
    return t.y;
  }

  Tensor<S> forward(const Tensor<S>& img) const {
    Trace t;
    return forward(img, t);
  }

  void backward(const Trace& t, const Tensor<S>& grad_y) {
    Tensor<S> g = sigmoid_backward(t.y, grad_y);
    g = head_.backward(ps_, t.u1, g);
    g = upsample2x_backward(g, t.d2.height(), t.d2.width());
    g = elu_backward(t.d2, g);
    g = dec2_.backward(ps_, t.c2, g);
    Tensor<S> gu(t.d3.channels(), t.c2.height(), t.c2.width());
    Tensor<S> ge1(t.e1.channels(), t.e1.height(), t.e1.width());
    split_channels_backward(g, gu, ge1);
    Tensor<S> gd3 = upsample2x_backward(gu, t.d3.height(), t.d3.width());
    gd3 = elu_backward(t.d3, gd3);
    g = dec3_.backward(ps_, t.c3, gd3);
    Tensor<S> gu3(t.d4.channels(), t.c3.height(), t.c3.width());
    Tensor<S> ge2(t.e2.channels(), t.e2.height(), t.e2.width());
    split_channels_backward(g, gu3, ge2);
    Tensor<S> gd4 = upsample2x_backward(gu3, t.d4.height(), t.d4.width());
    gd4 = elu_backward(t.d4, gd4);
    g = dec4_.backward(ps_, t.c4, gd4);
    Tensor<S> gu4(t.e4.channels(), t.c4.height(), t.c4.width());
    Tensor<S> ge3(t.e3.channels(), t.e3.height(), t.e3.width());
    split_channels_backward(g, gu4, ge3);
    Tensor<S> ge4 = upsample2x_backward(gu4, t.e4.height(), t.e4.width());
    ge4 = elu_backward(t.e4, ge4);
    Tensor<S> g3 = enc4_.backward(ps_, t.e3, ge4);
    for (std::size_t i = 0; i < g3.data.size(); ++i) g3.data[i] += ge3.data[i];
    g3 = elu_backward(t.e3, g3);
    Tensor<S> g2 = enc3_.backward(ps_, t.e2, g3);
    for (std::size_t i = 0; i < g2.data.size(); ++i) g2.data[i] += ge2.data[i];
    g2 = elu_backward(t.e2, g2);
    Tensor<S> g1 = enc2_.backward(ps_, t.e1, g2);
    for (std::size_t i = 0; i < g1.data.size(); ++i) g1.data[i] += ge1.data[i];
    g1 = elu_backward(t.e1, g1);
    enc1_.backward(ps_, t.x, g1);
  }

  ParamStore<S>& params() { return ps_; }
  const ParamStore<S>& params() const { return ps_; }
  const GraspNetSpec& spec() const { return spec_; }

  std::string describe() const {
    std::ostringstream out;
    out << "grasp-unet/1 in=" << spec_.in_channels;
    out << " enc=";
    for (int c : spec_.enc) out << c << ',';
    out << " dec=";
    for (int c : spec_.dec) out << c << ',';
    out << " params=" << ps_.size();
    return out.str();
  }

 private:
  GraspNetSpec spec_;
  ParamStore<S> ps_;
  Conv2d<S> enc1_, enc2_, enc3_, enc4_, dec4_, dec3_, dec2_, head_;
};

// Image encoder (7 convolutions, global average pool) + action encoder
// (3-layer MLP) + fusion head (3-layer MLP) -> sigmoid scalar score.
struct BlowNetSpec {
  int in_channels = 3;
  std::array<int, 7> conv{8, 16, 16, 16, 16, 16, 16};
  std::array<int, 7> stride{2, 2, 2, 2, 1, 1, 1};
  int action_dim = 2;
  int action_hidden = 32;
  int fusion_hidden = 64;
};

template <class S>
class BlowScoreModel {
 public:
  BlowScoreModel(const BlowNetSpec& spec, std::uint64_t init_seed)
      : spec_(spec) {
    Rng rng(init_seed);
    int in = spec.in_channels;
    for (int i = 0; i < 7; ++i) {
      conv_[i].in_ch = in;
      conv_[i].out_ch = spec.conv[i];
      conv_[i].ksize = 3;
      conv_[i].stride = spec.stride[i];
      conv_[i].pad = 1;
      conv_[i].init(ps_, rng);
      in = spec.conv[i];
    }
    auto linear = [&](int i, int o) {
      Linear<S> l;
      l.in_dim = i;
      l.out_dim = o;
      l.init(ps_, rng);
      return l;
    };
    act1_ = linear(spec.action_dim, spec.action_hidden);
    act2_ = linear(spec.action_hidden, spec.action_hidden);
    act3_ = linear(spec.action_hidden, spec.action_hidden);
    fuse1_ = linear(spec.conv[6] + spec.action_hidden, spec.fusion_hidden);
    fuse2_ = linear(spec.fusion_hidden, spec.fusion_hidden);
    fuse3_ = linear(spec.fusion_hidden, 1);
  }

  struct ImageTrace {
    Tensor<S> x;
    std::array<Tensor<S>, 7> pre, post;
    Tensor<S> feat;
  };

  struct ScoreTrace {
    ImageTrace img;
    Tensor<S> a, a1p, a1, a2p, a2, a3p, a3;
    Tensor<S> fin, f1p, f1, f2p, f2, f3p, y;
  };

  Tensor<S> encode_image(const Tensor<S>& img, ImageTrace& t) const {
    t.x = img;
    const Tensor<S>* cur = &t.x;
    for (int i = 0; i < 7; ++i) {
      t.pre[i] = conv_[i].forward(ps_, *cur);
      t.post[i] = elu(t.pre[i]);
      cur = &t.post[i];
    }
    t.feat = global_avg_pool(*cur);
    return t.feat;
  }

  Tensor<S> encode_image(const Tensor<S>& img) const {
    ImageTrace t;
    return encode_image(img, t);
  }

  static Tensor<S> normalize_action(const BlowAction& action) {
    Tensor<S> a(2, 1, 1);
    a.data[0] = static_cast<S>(action.p_x / kBlowMaxTranslation);
    a.data[1] = static_cast<S>(action.r_z_deg / kBlowMaxYawDeg);
    return a;
  }

  // Inference path: the image feature is computed once per observation and
  // reused across the sampled action batch.
  S score_feature(const Tensor<S>& feat, const BlowAction& action) const {
    Tensor<S> a = normalize_action(action);
    a = elu(act1_.forward(ps_, a));
    a = elu(act2_.forward(ps_, a));
    a = elu(act3_.forward(ps_, a));
    Tensor<S> f = concat_channels(feat, a);
    f = elu(fuse1_.forward(ps_, f));
    f = elu(fuse2_.forward(ps_, f));
    f = sigmoid(fuse3_.forward(ps_, f));
    return f.data[0];
  }

  S forward(const Tensor<S>& img, const BlowAction& action,
            ScoreTrace& t) const {
    encode_image(img, t.img);
    t.a = normalize_action(action);
    t.a1p = act1_.forward(ps_, t.a);
    t.a1 = elu(t.a1p);
    t.a2p = act2_.forward(ps_, t.a1);
    t.a2 = elu(t.a2p);
    t.a3p = act3_.forward(ps_, t.a2);
    t.a3 = elu(t.a3p);
    t.fin = concat_channels(t.img.feat, t.a3);
    t.f1p = fuse1_.forward(ps_, t.fin);
    t.f1 = elu(t.f1p);
    t.f2p = fuse2_.forward(ps_, t.f1);
    t.f2 = elu(t.f2p);
    t.f3p = fuse3_.forward(ps_, t.f2);
    t.y = sigmoid(t.f3p);
    return t.y.data[0];
  }

  void backward(const ScoreTrace& t, S grad_score) {
    Tensor<S> g(1, 1, 1);
    g.data[0] = grad_score;
    g = sigmoid_backward(t.y, g);
    g = fuse3_.backward(ps_, t.f2, g);
    g = elu_backward(t.f2, g);
    g = fuse2_.backward(ps_, t.f1, g);
    g = elu_backward(t.f1, g);
    g = fuse1_.backward(ps_, t.fin, g);
    Tensor<S> gfeat(t.img.feat.channels(), 1, 1);
    Tensor<S> ga(t.a3.channels(), 1, 1);
    split_channels_backward(g, gfeat, ga);

    ga = elu_backward(t.a3, ga);
    ga = act3_.backward(ps_, t.a2, ga);
    ga = elu_backward(t.a2, ga);
    ga = act2_.backward(ps_, t.a1, ga);
    ga = elu_backward(t.a1, ga);
    act1_.backward(ps_, t.a, ga);

    Tensor<S> gi = global_avg_pool_backward(gfeat, t.post[6].height(),
                                            t.post[6].width());
    for (int i = 6; i >= 0; --i) {
      gi = elu_backward(t.post[i], gi);
      const Tensor<S>& input = i == 0 ? t.x : t.post[i - 1];
      gi = conv_[i].backward(ps_, input, gi);
    }
  }

  ParamStore<S>& params() { return ps_; }
  const ParamStore<S>& params() const { return ps_; }
  const BlowNetSpec& spec() const { return spec_; }

  std::string describe() const {
    std::ostringstream out;
    out << "blow-scorer/1 in=" << spec_.in_channels << " conv=";
    for (int c : spec_.conv) out << c << ',';
    out << " stride=";
    for (int s : spec_.stride) out << s << ',';
    out << " act=" << spec_.action_hidden << " fuse=" << spec_.fusion_hidden;
    out << " params=" << ps_.size();
    return out.str();
  }

 private:
  BlowNetSpec spec_;
  ParamStore<S> ps_;
  std::array<Conv2d<S>, 7> conv_;
  Linear<S> act1_, act2_, act3_, fuse1_, fuse2_, fuse3_;
};

}  // namespace aircloth
