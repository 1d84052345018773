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

#include <string>
#include <vector>

#include "aircloth/config.hpp"
#include "aircloth/episode.hpp"
#include "aircloth/training.hpp"

namespace aircloth {

// Policy pairs evaluated as table rows. Learned sides require a checkpoint.
//   dextairity         learned grasp + learned closed-loop blow
//   dextairity-fixed   learned grasp + fixed center blow
//   dextairity-hgrasp  heuristic grasp + learned closed-loop blow
//   fixed-hgrasp       heuristic grasp + fixed center blow
//   heuristic          alias of fixed-hgrasp
//   heuristic-noblow   heuristic grasp, no blowing
struct PolicyCell {
  std::string token;
  bool grasp_learned = false;
  enum class Blow { kLearned, kFixed, kNone } blow = Blow::kFixed;
};

PolicyCell parse_policy_cell(const std::string& token);

struct TrainOutcome {
  std::string checkpoint_path;
  std::vector<EpochStats> epochs;
};

// Two-phase training: each model pre-trained against the other's heuristic,
// then joint fine-tuning. Writes per-epoch stats, periodic checkpoints and
// the final checkpoint under cfg.out_dir.
TrainOutcome cmd_train(const ExperimentConfig& cfg);

struct EvalCellResult {
  std::string policy;
  int episodes = 0;
  double final_mean = 0.0;
  double final_std = 0.0;
  double delta_mean = 0.0;
  double delta_std = 0.0;
  std::vector<double> curve;            // per-step mean coverage
  std::vector<double> mean_blow_gains;  // per policy blow index, vs previous
  std::vector<EpisodeLog> logs;
};

struct EvalResults {
  std::uint64_t config_hash = 0;
  std::vector<EvalCellResult> cells;
};

// Seeded evaluation episodes per policy cell; emits results.csv, curves.csv,
// per-episode logs and optional observation dumps under cfg.out_dir.
EvalResults cmd_eval(const ExperimentConfig& cfg,
                     const std::string& checkpoint_path);

// Writes per-step images with grasp line / blow action overlays for a stored
// episode log. Returns the number of images written.
int cmd_render(const ExperimentConfig& cfg, const std::string& log_path,
               const std::string& obs_dir, const std::string& out_dir);

// Fast self-checks (gradients, jet contract, determinism, buffers). Returns
// 0 when everything passes.
int cmd_verify();

// Aggregation helper shared by cmd_eval and tests: means/stds recomputed
// from logs, which remain the primary artifact. Throws on mixed config
// hashes.
EvalCellResult summarize_cell(const std::string& policy,
                              std::vector<EpisodeLog> logs);

}  // namespace aircloth
