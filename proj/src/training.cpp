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

#include "aircloth/training.hpp"

#include <atomic>
#include <chrono>
#include <thread>

namespace aircloth {

std::string train_phase_name(TrainPhase phase) {
  switch (phase) {
    case TrainPhase::kPretrainGrasp:
      return "pretrain-grasp";
    case TrainPhase::kPretrainBlow:
      return "pretrain-blow";
    case TrainPhase::kFinetune:
      return "finetune";
  }
  return "unknown";
}

double epsilon_schedule(double eps_start, double eps_end, int epoch,
                        int total_epochs) {
  if (total_epochs <= 1) return eps_end;
  const double progress = static_cast<double>(epoch) / total_epochs;
  if (progress >= 0.5) return eps_end;
  return eps_start + (eps_end - eps_start) * (progress / 0.5);
}

Trainer::Trainer(const ExperimentConfig& cfg)
    : cfg_(cfg),
      cfg_hash_(config_hash(cfg)),
      state_(cfg),
      grasp_buffer_(cfg.replay_capacity),
      blow_buffer_(cfg.replay_capacity),
      root_(cfg.seed),
      workers_(cfg.parallel > 0
                   ? cfg.parallel
                   : std::max(1u, std::thread::hardware_concurrency())) {}

std::vector<EpisodeLog> Trainer::collect_episodes(TrainPhase phase,
                                                  int global_epoch,
                                                  double epsilon) {
  const int n = cfg_.episodes_per_epoch;
  std::vector<EpisodeLog> logs(n);
  std::vector<LabeledTransitions> transitions(n);

  const int workers = std::min(workers_, n);
  std::atomic<int> next{0};
  auto work = [&]() {
    // Per-thread policy instances; the shared models are read-only here.
    LearnedGraspPolicy learned_grasp(&state_.grasp, cfg_.env.episode.rotations,
                                     epsilon);
    HeuristicGraspPolicy heuristic_grasp_policy;
    LearnedBlowPolicy learned_blow(&state_.blow,
                                   cfg_.env.episode.blow_action_samples,
                                   epsilon);
    FixedBlowPolicy fixed_blow;

    GraspPolicy* grasp_policy = nullptr;
    BlowPolicy* blow_policy = nullptr;
    switch (phase) {
      case TrainPhase::kPretrainGrasp:
        grasp_policy = &learned_grasp;
        blow_policy = &fixed_blow;
        break;
      case TrainPhase::kPretrainBlow:
        grasp_policy = &heuristic_grasp_policy;
        blow_policy = &learned_blow;
        break;
      case TrainPhase::kFinetune:
        grasp_policy = &learned_grasp;
        blow_policy = &learned_blow;
        break;
    }
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      Rng rng = root_.split(0x45500000ULL +
                            static_cast<std::uint64_t>(global_epoch) * 4096 +
                            static_cast<std::uint64_t>(i));
      EpisodeLog log = run_episode(cfg_.env, *grasp_policy, blow_policy, rng);
      log.config_hash = cfg_hash_;
      transitions[i] = label_transitions(log);
      logs[i] = std::move(log);
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // Push in episode order: results are independent of worker count.
  for (int i = 0; i < n; ++i) {
    for (auto& t : transitions[i].grasp) grasp_buffer_.push(std::move(t));
    for (auto& t : transitions[i].blow) blow_buffer_.push(std::move(t));
  }
  return logs;
}

EpochStats Trainer::run_epoch(TrainPhase phase, int global_epoch,
                              double epsilon) {
  const auto t_start = std::chrono::steady_clock::now();
  EpochStats stats;
  stats.epoch = global_epoch;
  stats.phase = train_phase_name(phase);
  stats.epsilon = epsilon;

  const auto logs = collect_episodes(phase, global_epoch, epsilon);
  stats.episodes = static_cast<int>(logs.size());
  for (const auto& log : logs) {
    stats.mean_final_coverage += log.final_coverage;
    stats.mean_delta_coverage += log.delta_coverage;
  }
  stats.mean_final_coverage /= logs.size();
  stats.mean_delta_coverage /= logs.size();

  const bool train_grasp = phase != TrainPhase::kPretrainBlow;
  const bool train_blow = phase != TrainPhase::kPretrainGrasp;
  Rng opt_rng = root_.split(0x0b700000ULL + global_epoch);
  int grasp_steps = 0, blow_steps = 0;
  for (int s = 0; s < cfg_.opt_steps_per_epoch; ++s) {
    if (train_grasp && grasp_buffer_.size() > 0) {
      const auto batch = grasp_buffer_.sample(cfg_.grasp_batch, opt_rng);
      const double loss = grasp_mse_backward(state_.grasp, batch);
      adam_step(state_.grasp_opt, state_.grasp.params().values(),
                state_.grasp.params().grads());
      stats.mean_grasp_loss += loss;
      ++grasp_steps;
    }
    if (train_blow && blow_buffer_.size() > 0) {
      const auto batch = blow_buffer_.sample(cfg_.blow_batch, opt_rng);
      const double loss = blow_mse_backward(state_.blow, batch);
      adam_step(state_.blow_opt, state_.blow.params().values(),
                state_.blow.params().grads());
      stats.mean_blow_loss += loss;
      ++blow_steps;
    }
  }
  if (grasp_steps > 0) stats.mean_grasp_loss /= grasp_steps;
  if (blow_steps > 0) stats.mean_blow_loss /= blow_steps;
  stats.grasp_buffer_size = static_cast<int>(grasp_buffer_.size());
  stats.blow_buffer_size = static_cast<int>(blow_buffer_.size());
  stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return stats;
}

}  // namespace aircloth
