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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aircloth/bench.hpp"

namespace {

aircloth::ExperimentConfig load_with_overrides(const std::string& config_path,
                                               std::uint64_t seed,
                                               bool seed_set,
                                               const std::string& out_dir,
                                               int parallel) {
  aircloth::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = aircloth::load_config_file(config_path);
  } else {
    cfg.env.task = aircloth::TaskSpec::from_name(cfg.task);
  }
  if (seed_set) cfg.seed = seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (parallel > 0) cfg.parallel = parallel;
  aircloth::validate_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Air-jet cloth unfolding simulator and policy benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string checkpoint_path;
  std::uint64_t seed = 0;
  int parallel = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config file (key = value lines)");
    cmd->add_option("--seed", seed, "Root seed override");
    cmd->add_option("--out", out_dir, "Output directory override");
    cmd->add_option("--parallel", parallel, "Worker thread count (0 = auto)");
  };

  CLI::App* train = app.add_subcommand(
      "train", "Pre-train both policies against heuristics, then fine-tune");
  add_common(train);

  CLI::App* eval = app.add_subcommand(
      "eval", "Run seeded evaluation episodes per policy cell");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint_path,
                   "Checkpoint for learned policy cells");

  CLI::App* render = app.add_subcommand(
      "render", "Overlay logged actions onto stored episode observations");
  add_common(render);
  std::string log_path, obs_dir, render_out;
  render->add_option("--log", log_path, "Episode log (.jsonl)")->required();
  render->add_option("--obs", obs_dir, "Directory of stored observations")
      ->required();
  render->add_option("--images-out", render_out, "Output image directory")
      ->required();

  CLI::App* verify =
      app.add_subcommand("verify", "Run the invariant and gradient self-checks");
  (void)verify;

  CLI11_PARSE(app, argc, argv);

  try {
    const bool seed_set = app.count("--seed") > 0 || train->count("--seed") > 0 ||
                          eval->count("--seed") > 0;
    if (train->parsed()) {
      const auto cfg = load_with_overrides(config_path, seed,
                                           train->count("--seed") > 0 || seed_set,
                                           out_dir, parallel);
      const auto outcome = aircloth::cmd_train(cfg);
      std::cout << "checkpoint written to " << outcome.checkpoint_path
                << std::endl;
    } else if (eval->parsed()) {
      const auto cfg =
          load_with_overrides(config_path, seed, eval->count("--seed") > 0,
                              out_dir, parallel);
      aircloth::cmd_eval(cfg, checkpoint_path);
    } else if (render->parsed()) {
      const auto cfg = load_with_overrides(config_path, seed, false, out_dir,
                                           parallel);
      const int n = aircloth::cmd_render(cfg, log_path, obs_dir, render_out);
      std::cout << n << " images written to " << render_out << std::endl;
    } else if (verify->parsed()) {
      return aircloth::cmd_verify();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
