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

#include <cstdint>
#include <string>

#include "aircloth/episode.hpp"
#include "aircloth/models.hpp"

namespace aircloth {

// One config file fully determines a run. Flat dotted keys, `key = value`
// lines, '#' comments; unknown keys are rejected.
struct ExperimentConfig {
  // run
  std::string task = "normal_rect";
  std::uint64_t seed = 1;
  std::uint64_t init_seed = 7;  // parameter initialization stream
  std::string out_dir = "out";
  int parallel = 0;  // 0 = hardware concurrency

  Environment env;

  // learning
  double lr = 1e-4;
  double weight_decay = 1e-6;
  int grasp_batch = kDefaultGraspBatch;
  int blow_batch = kDefaultBlowBatch;
  int replay_capacity = static_cast<int>(kDefaultReplayCapacity);
  double eps_start = 0.5;
  double eps_end = 0.05;
  int grasp_base_channels = 8;
  int blow_base_channels = 8;
  int action_hidden = 32;
  int fusion_hidden = 64;

  // training schedule (paper-scale defaults: 300-epoch pre-training per
  // module, 200-epoch fine-tune)
  int pretrain_grasp_epochs = 300;
  int pretrain_blow_epochs = 300;
  int finetune_epochs = 200;
  int episodes_per_epoch = 32;
  int opt_steps_per_epoch = 64;
  int checkpoint_every = 50;

  // evaluation
  int eval_episodes = 50;
  std::string eval_policies = "dextairity,dextairity-fixed,heuristic";
  bool save_observations = false;

  GraspNetSpec grasp_net_spec() const {
    const int c = grasp_base_channels;
    return GraspNetSpec{3, {c, 2 * c, 2 * c, 2 * c}, {2 * c, 2 * c, c}};
  }
  BlowNetSpec blow_net_spec() const {
    const int c = blow_base_channels;
    return BlowNetSpec{3,
                       {c, 2 * c, 2 * c, 2 * c, 2 * c, 2 * c, 2 * c},
                       {2, 2, 2, 2, 1, 1, 1},
                       2,
                       action_hidden,
                       fusion_hidden};
  }
};

// Parses `key = value` text. Throws ConfigError on unknown keys, malformed
// lines, type errors, or invariant violations.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// All keys in sorted order; parsing the result reproduces the config.
std::string canonical_config_text(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

void validate_config(const ExperimentConfig& cfg);

}  // namespace aircloth
