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

#include "aircloth/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

#include "aircloth/common.hpp"

namespace aircloth {
namespace {

using FieldRef = std::variant<double*, int*, std::uint64_t*, bool*,
                              std::string*>;

// Flat schema: every tunable key bound to its config field.
std::map<std::string, FieldRef> schema(ExperimentConfig& c) {
  Environment& e = c.env;
  return {
      {"task", &c.task},
      {"seed", &c.seed},
      {"init_seed", &c.init_seed},
      {"out_dir", &c.out_dir},
      {"parallel", &c.parallel},

      {"sim.dt", &e.world.dt},
      {"sim.gravity", &e.world.gravity},
      {"sim.damping", &e.world.damping},
      {"sim.table_friction", &e.world.table_friction},
      {"sim.table_restitution", &e.world.table_restitution},
      {"sim.z_tolerance", &e.world.z_tolerance},
      {"sim.max_speed", &e.world.max_speed},
      {"sim.settle_kinetic_tolerance", &e.world.settle_kinetic_tolerance},
      {"sim.settle_max_steps", &e.world.settle_max_steps},
      {"sim.pin_move_speed", &e.world.pin_move_speed},

      {"stretch.hold_height", &e.stretch.hold_height},
      {"stretch.taut_strain", &e.stretch.taut_strain},
      {"stretch.separation_increment", &e.stretch.separation_increment},
      {"stretch.grip_center_y", &e.stretch.grip_center_y},

      {"jet.particles_per_step", &e.jet.particles_per_step},
      {"jet.emission_speed", &e.jet.emission_speed},
      {"jet.cone_angle_deg", &e.jet.cone_angle_deg},
      {"jet.air_particle_mass", &e.jet.air_particle_mass},
      {"jet.blow_duration_steps", &e.jet.blow_duration_steps},
      {"jet.restitution", &e.jet.restitution},
      {"jet.lifetime_steps", &e.jet.lifetime_steps},
      {"jet.cull_margin", &e.jet.cull_margin},
      {"jet.gravity_on_air", &e.jet.gravity_on_air},
      {"jet.post_blow_settle_steps", &e.jet.post_blow_settle_steps},

      {"workspace.side", &e.workspace.side},

      {"episode.max_grasp_steps", &e.episode.max_grasp_steps},
      {"episode.blows_per_grasp", &e.episode.blows_per_grasp},
      {"episode.obs_resolution", &e.episode.obs_resolution},
      {"episode.metric_resolution", &e.episode.metric_resolution},
      {"episode.rotations", &e.episode.rotations},
      {"episode.blow_action_samples", &e.episode.blow_action_samples},
      {"episode.target_particle_spacing", &e.episode.target_particle_spacing},
      {"episode.min_grid_res", &e.episode.min_grid_res},
      {"episode.max_grid_res", &e.episode.max_grid_res},

      {"learn.lr", &c.lr},
      {"learn.weight_decay", &c.weight_decay},
      {"learn.grasp_batch", &c.grasp_batch},
      {"learn.blow_batch", &c.blow_batch},
      {"learn.replay_capacity", &c.replay_capacity},
      {"learn.eps_start", &c.eps_start},
      {"learn.eps_end", &c.eps_end},
      {"learn.grasp_base_channels", &c.grasp_base_channels},
      {"learn.blow_base_channels", &c.blow_base_channels},
      {"learn.action_hidden", &c.action_hidden},
      {"learn.fusion_hidden", &c.fusion_hidden},

      {"train.pretrain_grasp_epochs", &c.pretrain_grasp_epochs},
      {"train.pretrain_blow_epochs", &c.pretrain_blow_epochs},
      {"train.finetune_epochs", &c.finetune_epochs},
      {"train.episodes_per_epoch", &c.episodes_per_epoch},
      {"train.opt_steps_per_epoch", &c.opt_steps_per_epoch},
      {"train.checkpoint_every", &c.checkpoint_every},

      {"eval.episodes", &c.eval_episodes},
      {"eval.policies", &c.eval_policies},
      {"eval.save_observations", &c.save_observations},
  };
}

void assign(const std::string& key, FieldRef ref, const std::string& value) {
  try {
    if (auto* d = std::get_if<double*>(&ref)) {
      std::size_t pos = 0;
      **d = std::stod(value, &pos);
      if (pos != value.size()) throw ConfigError("");
    } else if (auto* i = std::get_if<int*>(&ref)) {
      std::size_t pos = 0;
      **i = std::stoi(value, &pos);
      if (pos != value.size()) throw ConfigError("");
    } else if (auto* u = std::get_if<std::uint64_t*>(&ref)) {
      std::size_t pos = 0;
      **u = std::stoull(value, &pos);
      if (pos != value.size()) throw ConfigError("");
    } else if (auto* b = std::get_if<bool*>(&ref)) {
      if (value == "true") {
        **b = true;
      } else if (value == "false") {
        **b = false;
      } else {
        throw ConfigError("");
      }
    } else {
      *std::get<std::string*>(ref) = value;
    }
  } catch (const std::exception&) {
    throw ConfigError("config: bad value for key '" + key + "': " + value);
  }
}

std::string format(const FieldRef& ref) {
  if (auto* d = std::get_if<double*>(&ref)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", **d);
    return buf;
  }
  if (auto* i = std::get_if<int*>(&ref)) return std::to_string(**i);
  if (auto* u = std::get_if<std::uint64_t*>(&ref)) return std::to_string(**u);
  if (auto* b = std::get_if<bool*>(&ref)) return **b ? "true" : "false";
  return *std::get<std::string*>(ref);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  auto fields = schema(cfg);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: malformed line " + std::to_string(line_no) +
                        ": " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
    assign(key, it->second, value);
  }
  cfg.env.task = TaskSpec::from_name(cfg.task);
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
  auto& mutable_cfg = const_cast<ExperimentConfig&>(cfg);
  const auto fields = schema(mutable_cfg);  // std::map iterates sorted
  std::ostringstream out;
  for (const auto& [key, ref] : fields) {
    out << key << " = " << format(ref) << '\n';
  }
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a64(canonical_config_text(cfg));
}

void validate_config(const ExperimentConfig& cfg) {
  const Environment& e = cfg.env;
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  require(e.world.dt > 0.0, "sim.dt must be positive");
  require(e.world.damping >= 0.0, "sim.damping must be >= 0");
  require(e.world.table_restitution >= 0.0 && e.world.table_restitution <= 1.0,
          "sim.table_restitution must be in [0,1]");
  require(e.jet.particles_per_step >= 1, "jet.particles_per_step must be >= 1");
  require(e.jet.emission_speed > 0.0, "jet.emission_speed must be positive");
  require(e.jet.restitution >= 0.0 && e.jet.restitution <= 1.0,
          "jet.restitution must be in [0,1]");
  require(e.workspace.side > 0.0, "workspace.side must be positive");
  require(e.episode.max_grasp_steps >= 1, "episode.max_grasp_steps must be >= 1");
  require(e.episode.blows_per_grasp >= 1, "episode.blows_per_grasp must be >= 1");
  require(e.episode.obs_resolution >= 32 && e.episode.obs_resolution % 16 == 0,
          "episode.obs_resolution must be >= 32 and a multiple of 16");
  require(e.episode.metric_resolution >= 32,
          "episode.metric_resolution must be >= 32");
  require(e.episode.rotations >= 1, "episode.rotations must be >= 1");
  require(e.episode.min_grid_res >= 3, "episode.min_grid_res must be >= 3");
  require(e.episode.max_grid_res >= e.episode.min_grid_res,
          "episode.max_grid_res must be >= min_grid_res");
  require(cfg.lr > 0.0, "learn.lr must be positive");
  require(cfg.weight_decay >= 0.0, "learn.weight_decay must be >= 0");
  require(cfg.eps_start >= 0.0 && cfg.eps_start <= 1.0 && cfg.eps_end >= 0.0 &&
              cfg.eps_end <= 1.0,
          "learn.eps_* must be in [0,1]");
  require(cfg.replay_capacity >= 1, "learn.replay_capacity must be >= 1");
  require(cfg.grasp_base_channels >= 1 && cfg.blow_base_channels >= 1,
          "channel counts must be >= 1");
  require(cfg.episodes_per_epoch >= 1, "train.episodes_per_epoch must be >= 1");
  require(cfg.opt_steps_per_epoch >= 0,
          "train.opt_steps_per_epoch must be >= 0");
  require(cfg.eval_episodes >= 1, "eval.episodes must be >= 1");
}

}  // namespace aircloth
