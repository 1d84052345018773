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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aircloth/actions.hpp"
#include "aircloth/air.hpp"
#include "aircloth/policy.hpp"

namespace aircloth {

enum class TaskFamily { kNormalRect, kLargeRect, kXLargeRect };

// Rectangular cloth generator. Edge lengths, mass and stiffness ranges
// follow the simulation task definitions.
struct TaskSpec {
  TaskFamily family = TaskFamily::kNormalRect;
  double edge_min = 0.4;
  double edge_max = 0.7;
  double mass_min = 0.2;
  double mass_max = 2.0;
  StiffnessTriple stiffness{};

  static TaskSpec normal_rect() { return {TaskFamily::kNormalRect, 0.4, 0.7}; }
  static TaskSpec large_rect() { return {TaskFamily::kLargeRect, 0.4, 0.75}; }
  static TaskSpec xlarge_rect() {
    return {TaskFamily::kXLargeRect, 0.8, 0.95};
  }
  static TaskSpec from_name(const std::string& name);
  std::string name() const;
};

struct EpisodeConfig {
  int max_grasp_steps = 5;
  int blows_per_grasp = 4;
  int obs_resolution = 64;
  int metric_resolution = 256;
  int rotations = 8;
  int blow_action_samples = kDefaultBlowActionSamples;
  double target_particle_spacing = 0.06;
  int min_grid_res = 8;
  int max_grid_res = 16;
};

// Everything an episode needs apart from policies and the RNG stream.
struct Environment {
  WorldConfig world;
  JetConfig jet;
  WorkspaceSpec workspace;
  StretchConfig stretch;
  EpisodeConfig episode;
  TaskSpec task;
};

// Samples cloth dimensions/mass/color and builds the mesh, flat at z=0.
ClothMesh sample_task_cloth(const Environment& env, Rng& rng);

struct BlowRecord {
  BlowAction action;
  bool is_center_blow = false;
  double coverage_after = 0.0;
  std::uint64_t obs_hash = 0;
  std::optional<BlowTransition> proto;  // unlabeled until label_transitions
};

struct StepRecord {
  int index = 0;
  std::uint64_t obs_hash = 0;
  bool executed = false;
  std::optional<RejectReason> reject;
  std::optional<GraspLine> line;
  std::optional<GraspPair> pair;
  double coverage_before = 0.0;
  double coverage_after = 0.0;
  std::vector<BlowRecord> blows;
  std::optional<GraspTransition> grasp_proto;
};

struct EpisodeLog {
  int schema_version = 1;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string task_name;
  std::string grasp_policy;
  std::string blow_policy;
  int max_grasp_steps = 5;
  double initial_coverage = 0.0;
  double final_coverage = 0.0;
  double delta_coverage = 0.0;
  std::vector<StepRecord> steps;
  double wall_time_s = 0.0;  // console-only; excluded from serialization

  int steps_executed() const {
    int n = 0;
    for (const auto& s : steps) n += s.executed;
    return n;
  }
};

// Optional per-observation callback (tag examples: "step0_grasp",
// "step0_blow2"); used by the CLI to dump images for offline rendering.
using ObsSink = std::function<void(const std::string& tag, const Raster&)>;

// Crumple, then up to max_grasp_steps of grasp / stretch / center blow /
// policy blows / release / settle. A grasp Reject ends the episode. A null
// blow_policy runs grasp-only episodes (no blowing at all).
EpisodeLog run_episode(const Environment& env, GraspPolicy& grasp_policy,
                       BlowPolicy* blow_policy, Rng& rng,
                       const ObsSink& obs_sink = {});

struct LabeledTransitions {
  std::vector<GraspTransition> grasp;
  std::vector<BlowTransition> blow;
};

// Blow transitions are labeled with coverage right after that blow; grasp
// transitions with coverage at the end of the step's blowing execution.
LabeledTransitions label_transitions(const EpisodeLog& log);

struct MetricConfig {
  int case_count = 1;
  double area_threshold = 1.0;
};

// Fraction of cases with area >= threshold.
double metric_success_rate(const std::vector<double>& areas,
                           const MetricConfig& cfg);

// Mean of min(area / threshold, 1).
double metric_normalized_area(const std::vector<double>& areas,
                              const MetricConfig& cfg);

// Mean coverage at each interaction step, carrying terminated episodes
// forward at their final value.
std::vector<double> coverage_curve(const std::vector<EpisodeLog>& logs);

// Line-delimited records, one step per line plus a summary line. Byte-stable
// for identical logs.
std::string episode_log_to_jsonl(const EpisodeLog& log);
EpisodeLog episode_log_from_jsonl(const std::string& text);

}  // namespace aircloth
