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

#include "aircloth/checkpoint.hpp"
#include "aircloth/episode.hpp"

namespace aircloth {

enum class TrainPhase { kPretrainGrasp, kPretrainBlow, kFinetune };

std::string train_phase_name(TrainPhase phase);

struct EpochStats {
  int epoch = 0;
  std::string phase;
  double epsilon = 0.0;
  double mean_grasp_loss = 0.0;
  double mean_blow_loss = 0.0;
  double mean_final_coverage = 0.0;
  double mean_delta_coverage = 0.0;
  int episodes = 0;
  int grasp_buffer_size = 0;
  int blow_buffer_size = 0;
  double wall_time_s = 0.0;
};

// Linear decay from eps_start to eps_end over the first half of training,
// flat afterwards.
double epsilon_schedule(double eps_start, double eps_end, int epoch,
                        int total_epochs);

// Owns the models, replay buffers and the root RNG for one training run.
class Trainer {
 public:
  explicit Trainer(const ExperimentConfig& cfg);

  // Collects episodes_per_epoch episodes with phase-appropriate policies,
  // pushes labeled transitions, then runs opt_steps_per_epoch optimization
  // steps on each model that trains in this phase.
  EpochStats run_epoch(TrainPhase phase, int global_epoch, double epsilon);

  // Collects episodes in parallel workers; transition pushes and stats are
  // reduced in episode order so thread count never changes results.
  std::vector<EpisodeLog> collect_episodes(TrainPhase phase, int global_epoch,
                                           double epsilon);

  TrainState& state() { return state_; }
  const ExperimentConfig& config() const { return cfg_; }
  const ReplayBuffer<GraspTransition>& grasp_buffer() const {
    return grasp_buffer_;
  }
  const ReplayBuffer<BlowTransition>& blow_buffer() const {
    return blow_buffer_;
  }

 private:
  ExperimentConfig cfg_;
  std::uint64_t cfg_hash_;
  TrainState state_;
  ReplayBuffer<GraspTransition> grasp_buffer_;
  ReplayBuffer<BlowTransition> blow_buffer_;
  Rng root_;
  int workers_;
};

}  // namespace aircloth
