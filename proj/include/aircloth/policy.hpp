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

#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aircloth/models.hpp"
#include "aircloth/render.hpp"

namespace aircloth {

// Raw uint8 observation as stored in replay; converted to a normalized
// tensor at training/inference time.
struct ObsImage {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<std::uint8_t> bytes;

  static ObsImage from_raster(const Raster& raster) {
    return ObsImage{raster.height, raster.width, raster.channels,
                    raster.pixels};
  }

  template <class S>
  Tensor<S> to_tensor() const {
    Tensor<S> t(channels, height, width);
    for (int c = 0; c < channels; ++c) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          t.at(c, y, x) = static_cast<S>(
              bytes[(static_cast<std::size_t>(y) * width + x) * channels + c] /
              255.0);
        }
      }
    }
    return t;
  }
};

// Grasp transition: the rotated observation the pixel was chosen in, plus
// the pixel and rotation index. Labeled with coverage at the end of the
// step's blowing execution.
struct GraspTransition {
  ObsImage obs;
  int rotation_index = 0;
  int row = 0;
  int col = 0;
  float label = -1.0f;
};

// Blow transition: observation before the blow and the executed action,
// labeled with coverage right after that blow.
struct BlowTransition {
  ObsImage obs;
  BlowAction action;
  float label = -1.0f;
};

inline constexpr std::size_t kDefaultReplayCapacity = 30000;
inline constexpr int kDefaultGraspBatch = 16;
inline constexpr int kDefaultBlowBatch = 128;

// Bounded FIFO store; push beyond capacity evicts the oldest entry, sample
// draws uniformly with replacement.
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = kDefaultReplayCapacity)
      : capacity_(capacity) {}

  void push(T item) {
    items_.push_back(std::move(item));
    if (items_.size() > capacity_) items_.pop_front();
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const T& at(std::size_t i) const { return items_[i]; }  // 0 = oldest

  std::vector<T> sample(int batch_size, Rng& rng) const {
    if (items_.empty()) {
      throw std::out_of_range("ReplayBuffer::sample: buffer is empty");
    }
    std::vector<T> batch;
    batch.reserve(batch_size);
    for (int i = 0; i < batch_size; ++i) {
      batch.push_back(items_[rng.uniform_int(static_cast<int>(items_.size()))]);
    }
    return batch;
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
};

// With probability 1-epsilon, argmax (ties break to the lowest index);
// otherwise a uniform random index.
int select_epsilon_greedy(std::span<const double> scores, double epsilon,
                          Rng& rng);

// Per-rotation per-pixel predicted coverage; shape (k, H, W).
template <class S>
Tensor<S> grasp_scores(const GraspValueModel<S>& model,
                       const RotationStack& stack) {
  Tensor<S> out;
  for (std::size_t i = 0; i < stack.images.size(); ++i) {
    const Tensor<S> img = ObsImage::from_raster(stack.images[i]).to_tensor<S>();
    const Tensor<S> y = model.forward(img);
    if (i == 0) {
      out = Tensor<S>(static_cast<int>(stack.images.size()), y.height(),
                      y.width());
    }
    std::copy(y.data.begin(), y.data.end(), out.plane(static_cast<int>(i)));
  }
  return out;
}

struct GraspChoice {
  int rotation_index = 0;
  int row = 0;
  int col = 0;
  double score = 0.0;
  GraspLine line;
};

// Argmax pixel+rotation mapped back through the inverse pixel map.
template <class S>
GraspChoice decode_grasp_argmax(const Tensor<S>& scores,
                                const RotationStack& stack) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.data.size(); ++i) {
    if (scores.data[i] > scores.data[best]) best = i;
  }
  GraspChoice choice;
  const int hw = scores.height() * scores.width();
  choice.rotation_index = static_cast<int>(best) / hw;
  choice.row = (static_cast<int>(best) % hw) / scores.width();
  choice.col = static_cast<int>(best) % scores.width();
  choice.score = scores.data[best];
  const auto [orow, ocol] =
      stack.to_original(choice.rotation_index, choice.row, choice.col);
  choice.line.center_row = orow;
  choice.line.center_col = ocol;
  choice.line.theta_deg = stack.angles_deg[choice.rotation_index];
  return choice;
}

// One score per action; the image feature is encoded once.
template <class S>
std::vector<double> blow_scores(const BlowScoreModel<S>& model,
                                const Raster& obs,
                                const std::vector<BlowAction>& actions) {
  const Tensor<S> img = ObsImage::from_raster(obs).to_tensor<S>();
  const Tensor<S> feat = model.encode_image(img);
  std::vector<double> scores;
  scores.reserve(actions.size());
  for (const BlowAction& a : actions) {
    scores.push_back(static_cast<double>(model.score_feature(feat, a)));
  }
  return scores;
}

// Mean squared error between predicted and labeled coverage, with gradients
// accumulated into the model's parameter store (zeroed first).
template <class S>
double grasp_mse_backward(GraspValueModel<S>& model,
                          const std::vector<GraspTransition>& batch) {
  if (batch.empty()) {
    throw std::invalid_argument("grasp_mse_backward: empty batch");
  }
  model.params().zero_grad();
  double loss = 0.0;
  const S scale = S(2) / S(batch.size());
  for (const GraspTransition& tr : batch) {
    typename GraspValueModel<S>::Trace trace;
    const Tensor<S> y = model.forward(tr.obs.to_tensor<S>(), trace);
    const S err = y.at(0, tr.row, tr.col) - static_cast<S>(tr.label);
    loss += static_cast<double>(err) * static_cast<double>(err);
    Tensor<S> grad(1, y.height(), y.width());
    grad.at(0, tr.row, tr.col) = scale * err;
    model.backward(trace, grad);
  }
  loss /= batch.size();
  if (!std::isfinite(loss)) {
    throw NumericalBlowupError("grasp_mse_backward: non-finite loss");
  }
  return loss;
}

template <class S>
double blow_mse_backward(BlowScoreModel<S>& model,
                         const std::vector<BlowTransition>& batch) {
  if (batch.empty()) {
    throw std::invalid_argument("blow_mse_backward: empty batch");
  }
  model.params().zero_grad();
  double loss = 0.0;
  const S scale = S(2) / S(batch.size());
  for (const BlowTransition& tr : batch) {
    typename BlowScoreModel<S>::ScoreTrace trace;
    const S pred = model.forward(tr.obs.to_tensor<S>(), tr.action, trace);
    const S err = pred - static_cast<S>(tr.label);
    loss += static_cast<double>(err) * static_cast<double>(err);
    model.backward(trace, scale * err);
  }
  loss /= batch.size();
  if (!std::isfinite(loss)) {
    throw NumericalBlowupError("blow_mse_backward: non-finite loss");
  }
  return loss;
}

// ---- Episode-facing policy interfaces ----

struct GraspDecision {
  std::optional<GraspLine> line;  // resolved by the runner
  std::optional<GraspPair> pair;  // already-resolved (heuristic path)
  std::optional<RejectReason> reject;
  std::optional<GraspTransition> proto;  // unlabeled, learned policies only
};

class GraspPolicy {
 public:
  virtual ~GraspPolicy() = default;
  virtual GraspDecision decide(const Raster& color, const Raster& mask,
                               const DepthMap& depth, Rng& rng) = 0;
  virtual std::string name() const = 0;
};

struct BlowDecision {
  BlowAction action;
  std::optional<BlowTransition> proto;
};

class BlowPolicy {
 public:
  virtual ~BlowPolicy() = default;
  virtual BlowDecision decide(const Raster& color, Rng& rng) = 0;
  virtual std::string name() const = 0;
};

// Max-distance pair over sampled cloth pixels.
class HeuristicGraspPolicy : public GraspPolicy {
 public:
  GraspDecision decide(const Raster& color, const Raster& mask,
                       const DepthMap& depth, Rng& rng) override;
  std::string name() const override { return "heuristic-grasp"; }
};

// Spatial-action-map argmax with epsilon exploration over cloth pixels.
class LearnedGraspPolicy : public GraspPolicy {
 public:
  LearnedGraspPolicy(const GraspValueModel<float>* model, int rotations,
                     double epsilon)
      : model_(model), rotations_(rotations), epsilon_(epsilon) {}

  GraspDecision decide(const Raster& color, const Raster& mask,
                       const DepthMap& depth, Rng& rng) override;
  std::string name() const override { return "learned-grasp"; }
  void set_epsilon(double epsilon) { epsilon_ = epsilon; }

 private:
  const GraspValueModel<float>* model_;
  int rotations_;
  double epsilon_;
};

// Always blows at the workspace center, facing forward.
class FixedBlowPolicy : public BlowPolicy {
 public:
  BlowDecision decide(const Raster& color, Rng& rng) override {
    (void)color;
    (void)rng;
    return BlowDecision{heuristic_blow(), std::nullopt};
  }
  std::string name() const override { return "fixed-center-blow"; }
};

// Scores M uniformly sampled actions and picks epsilon-greedily.
class LearnedBlowPolicy : public BlowPolicy {
 public:
  LearnedBlowPolicy(const BlowScoreModel<float>* model, int action_samples,
                    double epsilon)
      : model_(model), action_samples_(action_samples), epsilon_(epsilon) {}

  BlowDecision decide(const Raster& color, Rng& rng) override;
  std::string name() const override { return "learned-blow"; }
  void set_epsilon(double epsilon) { epsilon_ = epsilon; }

 private:
  const BlowScoreModel<float>* model_;
  int action_samples_;
  double epsilon_;
};

}  // namespace aircloth
