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

#include "aircloth/policy.hpp"

#include <stdexcept>

namespace aircloth {

int select_epsilon_greedy(std::span<const double> scores, double epsilon,
                          Rng& rng) {
  if (scores.empty()) {
    throw std::invalid_argument("select_epsilon_greedy: empty scores");
  }
  const double u = rng.uniform01();
  if (u < epsilon) {
    return rng.uniform_int(static_cast<int>(scores.size()));
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

GraspDecision HeuristicGraspPolicy::decide(const Raster& color,
                                           const Raster& mask,
                                           const DepthMap& depth, Rng& rng) {
  (void)color;
  GraspDecision decision;
  const GraspResolution res = heuristic_grasp(mask, depth, rng);
  if (res.ok()) {
    decision.pair = res.pair;
  } else {
    decision.reject = res.reject;
  }
  return decision;
}

GraspDecision LearnedGraspPolicy::decide(const Raster& color,
                                         const Raster& mask,
                                         const DepthMap& depth, Rng& rng) {
  (void)depth;
  (void)mask;
  GraspDecision decision;
  const RotationStack stack = rotation_stack(color, rotations_);

  int rotation, row, col;
  const double u = rng.uniform01();
  if (u < epsilon_) {
    // Explore over cloth pixels of a random rotation so most exploratory
    // grasps are executable.
    rotation = rng.uniform_int(rotations_);
    const Raster rot_mask = cloth_mask(stack.images[rotation]);
    std::vector<int> cloth;
    for (int i = 0; i < rot_mask.width * rot_mask.height; ++i) {
      if (rot_mask.pixels[i] != 0) cloth.push_back(i);
    }
    if (cloth.empty()) {
      decision.reject = RejectReason::kEmptyMask;
      return decision;
    }
    const int pick = cloth[rng.uniform_int(static_cast<int>(cloth.size()))];
    row = pick / rot_mask.width;
    col = pick % rot_mask.width;
    const auto [orow, ocol] = stack.to_original(rotation, row, col);
    decision.line = GraspLine{orow, ocol, stack.angles_deg[rotation]};
  } else {
    const Tensor<float> scores = grasp_scores(*model_, stack);
    const GraspChoice choice = decode_grasp_argmax(scores, stack);
    rotation = choice.rotation_index;
    row = choice.row;
    col = choice.col;
    decision.line = choice.line;
  }

  GraspTransition proto;
  proto.obs = ObsImage::from_raster(stack.images[rotation]);
  proto.rotation_index = rotation;
  proto.row = row;
  proto.col = col;
  decision.proto = std::move(proto);
  return decision;
}

BlowDecision LearnedBlowPolicy::decide(const Raster& color, Rng& rng) {
  const std::vector<BlowAction> actions =
      sample_blow_actions(action_samples_, rng);
  const std::vector<double> scores = blow_scores(*model_, color, actions);
  const int pick = select_epsilon_greedy(scores, epsilon_, rng);

  BlowDecision decision;
  decision.action = actions[pick];
  BlowTransition proto;
  proto.obs = ObsImage::from_raster(color);
  proto.action = actions[pick];
  decision.proto = std::move(proto);
  return decision;
}

}  // namespace aircloth
