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

#include <memory>
#include <string>

#include "aircloth/config.hpp"
#include "aircloth/models.hpp"

namespace aircloth {

// Both learned models plus their optimizer states. Training runs in single
// precision.
struct TrainState {
  GraspValueModel<float> grasp;
  BlowScoreModel<float> blow;
  AdamState<float> grasp_opt;
  AdamState<float> blow_opt;

  explicit TrainState(const ExperimentConfig& cfg)
      : grasp(cfg.grasp_net_spec(), cfg.init_seed),
        blow(cfg.blow_net_spec(), cfg.init_seed ^ 0x9e3779b97f4a7c15ULL) {
    grasp_opt.lr = blow_opt.lr = cfg.lr;
    grasp_opt.weight_decay = blow_opt.weight_decay = cfg.weight_decay;
  }
};

// Versioned binary container: magic, format version, config hash, then per
// model an architecture descriptor, the flat little-endian float32 parameter
// array, and the optimizer state. Byte-exact across save/load/save.
void save_checkpoint(const std::string& path, const TrainState& state,
                     std::uint64_t cfg_hash);

// Loads into a state constructed from `cfg`. Throws CheckpointError on a bad
// magic, version mismatch, truncation, or architecture mismatch.
struct LoadedCheckpoint {
  std::unique_ptr<TrainState> state;
  std::uint64_t config_hash = 0;
};
LoadedCheckpoint load_checkpoint(const std::string& path,
                                 const ExperimentConfig& cfg);

}  // namespace aircloth
