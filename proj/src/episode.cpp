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

#include "aircloth/episode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "aircloth/common.hpp"

namespace aircloth {

using json = nlohmann::json;

TaskSpec TaskSpec::from_name(const std::string& name) {
  if (name == "normal_rect") return normal_rect();
  if (name == "large_rect") return large_rect();
  if (name == "xlarge_rect") return xlarge_rect();
  throw ConfigError("unknown task family: " + name);
}

std::string TaskSpec::name() const {
  switch (family) {
    case TaskFamily::kNormalRect:
      return "normal_rect";
    case TaskFamily::kLargeRect:
      return "large_rect";
    case TaskFamily::kXLargeRect:
      return "xlarge_rect";
  }
  return "unknown";
}

ClothMesh sample_task_cloth(const Environment& env, Rng& rng) {
  const TaskSpec& task = env.task;
  const double width = rng.uniform(task.edge_min, task.edge_max);
  const double height = rng.uniform(task.edge_min, task.edge_max);
  const double mass = rng.uniform(task.mass_min, task.mass_max);

  const EpisodeConfig& ep = env.episode;
  const int res = std::clamp(
      static_cast<int>(std::lround(std::max(width, height) /
                                   ep.target_particle_spacing)) +
          1,
      ep.min_grid_res, ep.max_grid_res);

  ClothMesh cloth = build_rect_cloth(width, height, res, mass, task.stiffness);
  // Random cloth color, kept away from the background gray so the mask is
  // exact.
  for (;;) {
    const int r = rng.uniform_int(256);
    const int g = rng.uniform_int(256);
    const int b = rng.uniform_int(256);
    const int dist = std::abs(r - kBackgroundColor[0]) +
                     std::abs(g - kBackgroundColor[1]) +
                     std::abs(b - kBackgroundColor[2]);
    if (dist >= 60) {
      cloth.color = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                     static_cast<std::uint8_t>(b)};
      break;
    }
  }
  return cloth;
}

namespace {

double metric_coverage(const Environment& env, const ClothMesh& cloth) {
  const RenderResult rr =
      render_topdown(cloth, env.workspace, env.episode.metric_resolution);
  return coverage(cloth_mask(rr.color), cloth);
}

}  // namespace

EpisodeLog run_episode(const Environment& env, GraspPolicy& grasp_policy,
                       BlowPolicy* blow_policy, Rng& rng,
                       const ObsSink& obs_sink) {
  const auto t_start = std::chrono::steady_clock::now();
  EpisodeLog log;
  log.seed = rng.seed();
  log.task_name = env.task.name();
  log.grasp_policy = grasp_policy.name();
  log.blow_policy = blow_policy ? blow_policy->name() : "none";
  log.max_grasp_steps = env.episode.max_grasp_steps;

  ClothMesh cloth = sample_task_cloth(env, rng);
  crumple(env.world, cloth, rng);
  log.initial_coverage = metric_coverage(env, cloth);

  double last_coverage = log.initial_coverage;
  for (int step = 0; step < env.episode.max_grasp_steps; ++step) {
    StepRecord record;
    record.index = step;
    record.coverage_before = last_coverage;

    const RenderResult obs =
        render_topdown(cloth, env.workspace, env.episode.obs_resolution);
    const Raster mask = cloth_mask(obs.color);
    record.obs_hash = obs.color.content_hash();
    if (obs_sink) obs_sink("step" + std::to_string(step) + "_grasp", obs.color);

    GraspDecision decision = grasp_policy.decide(obs.color, mask, obs.depth, rng);
    GraspResolution resolution;
    if (decision.reject) {
      resolution.reject = decision.reject;
    } else if (decision.pair) {
      resolution.pair = decision.pair;
    } else if (decision.line) {
      record.line = decision.line;
      resolution = edge_coincident_grasp(mask, *decision.line, obs.depth);
    } else {
      resolution.reject = RejectReason::kEmptyMask;
    }

    if (!resolution.ok()) {
      record.reject = resolution.reject;
      log.steps.push_back(std::move(record));
      break;
    }
    record.pair = resolution.pair;
    record.grasp_proto = std::move(decision.proto);

    StretchResult grip =
        grasp_and_stretch(env.world, cloth, *resolution.pair, env.stretch);

    if (blow_policy) {
      // Blow 0 is always directed at the workspace center; the policy then
      // adjusts blows_per_grasp times from fresh observations.
      blow(env.world, cloth, grip.pins,
           blow_pose(heuristic_blow(), grip.grip_center), env.jet,
           env.workspace, rng);
      BlowRecord center;
      center.action = heuristic_blow();
      center.is_center_blow = true;
      center.coverage_after = metric_coverage(env, cloth);
      record.blows.push_back(std::move(center));

      for (int b = 1; b <= env.episode.blows_per_grasp; ++b) {
        const RenderResult blow_obs =
            render_topdown(cloth, env.workspace, env.episode.obs_resolution);
        if (obs_sink) {
          obs_sink("step" + std::to_string(step) + "_blow" + std::to_string(b),
                   blow_obs.color);
        }
        BlowDecision bd = blow_policy->decide(blow_obs.color, rng);
        blow(env.world, cloth, grip.pins,
             blow_pose(bd.action, grip.grip_center), env.jet, env.workspace,
             rng);
        BlowRecord br;
        br.action = bd.action;
        br.coverage_after = metric_coverage(env, cloth);
        br.obs_hash = blow_obs.color.content_hash();
        br.proto = std::move(bd.proto);
        record.blows.push_back(std::move(br));
      }
    }

    settle(env.world, cloth, {}, env.world.settle_max_steps,
           env.world.settle_kinetic_tolerance);
    record.coverage_after = metric_coverage(env, cloth);
    record.executed = true;
    last_coverage = record.coverage_after;
    log.steps.push_back(std::move(record));
  }

  log.final_coverage = last_coverage;
  log.delta_coverage = log.final_coverage - log.initial_coverage;
  log.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return log;
}

LabeledTransitions label_transitions(const EpisodeLog& log) {
  LabeledTransitions out;
  for (const StepRecord& step : log.steps) {
    if (!step.executed) continue;
    double final_blow_coverage = step.coverage_after;
    if (!step.blows.empty()) {
      final_blow_coverage = step.blows.back().coverage_after;
    }
    if (step.grasp_proto) {
      GraspTransition t = *step.grasp_proto;
      t.label = static_cast<float>(final_blow_coverage);
      out.grasp.push_back(std::move(t));
    }
    for (const BlowRecord& br : step.blows) {
      if (br.is_center_blow || !br.proto) continue;
      BlowTransition t = *br.proto;
      t.label = static_cast<float>(br.coverage_after);
      out.blow.push_back(std::move(t));
    }
  }
  return out;
}

double metric_success_rate(const std::vector<double>& areas,
                           const MetricConfig& cfg) {
  if (areas.empty() || static_cast<int>(areas.size()) != cfg.case_count) {
    throw std::invalid_argument("metric_success_rate: |areas| must equal N >= 1");
  }
  int hits = 0;
  for (double a : areas) hits += a >= cfg.area_threshold;
  return static_cast<double>(hits) / cfg.case_count;
}

double metric_normalized_area(const std::vector<double>& areas,
                              const MetricConfig& cfg) {
  if (areas.empty() || static_cast<int>(areas.size()) != cfg.case_count) {
    throw std::invalid_argument(
        "metric_normalized_area: |areas| must equal N >= 1");
  }
  if (cfg.area_threshold <= 0.0) {
    throw std::invalid_argument(
        "metric_normalized_area: threshold must be positive");
  }
  double total = 0.0;
  for (double a : areas) total += std::min(a / cfg.area_threshold, 1.0);
  return total / cfg.case_count;
}

std::vector<double> coverage_curve(const std::vector<EpisodeLog>& logs) {
  if (logs.empty()) {
    throw std::invalid_argument("coverage_curve: no logs");
  }
  int max_steps = 0;
  for (const auto& log : logs) max_steps = std::max(max_steps, log.max_grasp_steps);

  std::vector<double> curve(max_steps, 0.0);
  for (const auto& log : logs) {
    double value = log.initial_coverage;
    int i = 0;
    for (const StepRecord& step : log.steps) {
      if (!step.executed) break;
      value = step.coverage_after;
      curve[i++] += value;
    }
    for (; i < max_steps; ++i) curve[i] += value;
  }
  for (double& v : curve) v /= logs.size();
  return curve;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

json pair_to_json(const GraspPair& pair) {
  return json{{"L", {pair.left.x(), pair.left.y(), pair.left.z()}},
              {"R", {pair.right.x(), pair.right.y(), pair.right.z()}}};
}

GraspPair pair_from_json(const json& j) {
  GraspPair pair;
  pair.left = Vec3(j["L"][0], j["L"][1], j["L"][2]);
  pair.right = Vec3(j["R"][0], j["R"][1], j["R"][2]);
  return pair;
}

RejectReason reject_from_name(const std::string& name) {
  if (name == "center-off-cloth") return RejectReason::kCenterOffCloth;
  if (name == "pair-too-close") return RejectReason::kPairTooClose;
  return RejectReason::kEmptyMask;
}

}  // namespace

std::string episode_log_to_jsonl(const EpisodeLog& log) {
  std::ostringstream out;
  for (const StepRecord& step : log.steps) {
    json j;
    j["type"] = "step";
    j["index"] = step.index;
    j["obs_hash"] = hex64(step.obs_hash);
    j["executed"] = step.executed;
    j["reject"] =
        step.reject ? json(reject_reason_name(*step.reject)) : json(nullptr);
    j["line"] = step.line ? json{{"row", step.line->center_row},
                                 {"col", step.line->center_col},
                                 {"theta", step.line->theta_deg}}
                          : json(nullptr);
    j["pair"] = step.pair ? pair_to_json(*step.pair) : json(nullptr);
    j["coverage_before"] = step.coverage_before;
    j["coverage_after"] = step.coverage_after;
    json blows = json::array();
    for (const BlowRecord& br : step.blows) {
      blows.push_back(json{{"px", br.action.p_x},
                           {"rz", br.action.r_z_deg},
                           {"center", br.is_center_blow},
                           {"coverage", br.coverage_after},
                           {"obs_hash", hex64(br.obs_hash)}});
    }
    j["blows"] = std::move(blows);
    out << j.dump() << '\n';
  }
  json summary;
  summary["type"] = "summary";
  summary["schema"] = log.schema_version;
  summary["seed"] = log.seed;
  summary["config_hash"] = hex64(log.config_hash);
  summary["task"] = log.task_name;
  summary["grasp_policy"] = log.grasp_policy;
  summary["blow_policy"] = log.blow_policy;
  summary["max_grasp_steps"] = log.max_grasp_steps;
  summary["steps_executed"] = log.steps_executed();
  summary["initial_coverage"] = log.initial_coverage;
  summary["final_coverage"] = log.final_coverage;
  summary["delta_coverage"] = log.delta_coverage;
  out << summary.dump() << '\n';
  return out.str();
}

EpisodeLog episode_log_from_jsonl(const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.at("type");
    if (type == "step") {
      StepRecord step;
      step.index = j.at("index");
      step.obs_hash = parse_hex64(j.at("obs_hash"));
      step.executed = j.at("executed");
      if (!j.at("reject").is_null()) {
        step.reject = reject_from_name(j.at("reject"));
      }
      if (!j.at("line").is_null()) {
        step.line = GraspLine{j["line"]["row"], j["line"]["col"],
                              j["line"]["theta"]};
      }
      if (!j.at("pair").is_null()) step.pair = pair_from_json(j["pair"]);
      step.coverage_before = j.at("coverage_before");
      step.coverage_after = j.at("coverage_after");
      for (const json& bj : j.at("blows")) {
        BlowRecord br;
        br.action = BlowAction{bj.at("px"), bj.at("rz")};
        br.is_center_blow = bj.at("center");
        br.coverage_after = bj.at("coverage");
        br.obs_hash = parse_hex64(bj.at("obs_hash"));
        step.blows.push_back(std::move(br));
      }
      log.steps.push_back(std::move(step));
    } else if (type == "summary") {
      log.schema_version = j.at("schema");
      log.seed = j.at("seed");
      log.config_hash = parse_hex64(j.at("config_hash"));
      log.task_name = j.at("task");
      log.grasp_policy = j.at("grasp_policy");
      log.blow_policy = j.at("blow_policy");
      log.max_grasp_steps = j.at("max_grasp_steps");
      log.initial_coverage = j.at("initial_coverage");
      log.final_coverage = j.at("final_coverage");
      log.delta_coverage = j.at("delta_coverage");
    } else {
      throw std::runtime_error("episode_log_from_jsonl: unknown record type");
    }
  }
  return log;
}

}  // namespace aircloth
