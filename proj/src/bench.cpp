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

#include "aircloth/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "aircloth/gradcheck.hpp"

namespace aircloth {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int resolve_workers(const ExperimentConfig& cfg) {
  return cfg.parallel > 0
             ? cfg.parallel
             : std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

PolicyCell parse_policy_cell(const std::string& token) {
  PolicyCell cell;
  cell.token = token;
  if (token == "dextairity") {
    cell.grasp_learned = true;
    cell.blow = PolicyCell::Blow::kLearned;
  } else if (token == "dextairity-fixed") {
    cell.grasp_learned = true;
    cell.blow = PolicyCell::Blow::kFixed;
  } else if (token == "dextairity-hgrasp") {
    cell.grasp_learned = false;
    cell.blow = PolicyCell::Blow::kLearned;
  } else if (token == "fixed-hgrasp" || token == "heuristic") {
    cell.grasp_learned = false;
    cell.blow = PolicyCell::Blow::kFixed;
  } else if (token == "heuristic-noblow") {
    cell.grasp_learned = false;
    cell.blow = PolicyCell::Blow::kNone;
  } else {
    throw ConfigError("unknown eval policy cell: " + token);
  }
  return cell;
}

TrainOutcome cmd_train(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const std::uint64_t hash = config_hash(cfg);
  {
    std::ofstream cfg_out(fs::path(cfg.out_dir) / "config.cfg");
    cfg_out << "# config hash " << hex64(hash) << "\n"
            << canonical_config_text(cfg);
  }

  Trainer trainer(cfg);
  const int total_epochs = cfg.pretrain_grasp_epochs +
                           cfg.pretrain_blow_epochs + cfg.finetune_epochs;
  std::ofstream log_out(fs::path(cfg.out_dir) / "train_log.csv");
  log_out << "# config_hash " << hex64(hash) << "\n";
  log_out << "epoch,phase,epsilon,grasp_loss,blow_loss,mean_final_coverage,"
             "mean_delta_coverage,episodes,grasp_buffer,blow_buffer,wall_s\n";

  TrainOutcome outcome;
  int epoch = 0;
  auto run_phase = [&](TrainPhase phase, int count) {
    for (int i = 0; i < count; ++i, ++epoch) {
      const double eps =
          epsilon_schedule(cfg.eps_start, cfg.eps_end, epoch, total_epochs);
      const EpochStats stats = trainer.run_epoch(phase, epoch, eps);
      outcome.epochs.push_back(stats);
      char row[512];
      std::snprintf(row, sizeof(row),
                    "%d,%s,%.4f,%.6f,%.6f,%.4f,%.4f,%d,%d,%d,%.2f",
                    stats.epoch, stats.phase.c_str(), stats.epsilon,
                    stats.mean_grasp_loss, stats.mean_blow_loss,
                    stats.mean_final_coverage, stats.mean_delta_coverage,
                    stats.episodes, stats.grasp_buffer_size,
                    stats.blow_buffer_size, stats.wall_time_s);
      log_out << row << '\n' << std::flush;
      std::cout << "[train] " << row << std::endl;
      if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "checkpoint_epoch_%05d.bin", epoch);
        save_checkpoint((fs::path(cfg.out_dir) / name).string(),
                        trainer.state(), hash);
      }
    }
  };

  run_phase(TrainPhase::kPretrainGrasp, cfg.pretrain_grasp_epochs);
  run_phase(TrainPhase::kPretrainBlow, cfg.pretrain_blow_epochs);
  run_phase(TrainPhase::kFinetune, cfg.finetune_epochs);

  outcome.checkpoint_path = (fs::path(cfg.out_dir) / "checkpoint.bin").string();
  save_checkpoint(outcome.checkpoint_path, trainer.state(), hash);
  return outcome;
}

EvalCellResult summarize_cell(const std::string& policy,
                              std::vector<EpisodeLog> logs) {
  EvalCellResult cell;
  cell.policy = policy;
  cell.episodes = static_cast<int>(logs.size());
  if (logs.empty()) return cell;
  for (std::size_t i = 1; i < logs.size(); ++i) {
    if (logs[i].config_hash != logs[0].config_hash) {
      throw ConfigError("summarize_cell: mixed config hashes in episode logs");
    }
  }
  double f = 0, f2 = 0, d = 0, d2 = 0;
  for (const auto& log : logs) {
    f += log.final_coverage;
    f2 += log.final_coverage * log.final_coverage;
    d += log.delta_coverage;
    d2 += log.delta_coverage * log.delta_coverage;
  }
  const int n = cell.episodes;
  cell.final_mean = f / n;
  cell.final_std = std::sqrt(std::max(0.0, f2 / n - cell.final_mean * cell.final_mean));
  cell.delta_mean = d / n;
  cell.delta_std = std::sqrt(std::max(0.0, d2 / n - cell.delta_mean * cell.delta_mean));
  cell.curve = coverage_curve(logs);

  // Mean per-blow coverage gain (policy blows only; the center blow is the
  // baseline for blow 1).
  std::vector<double> gain_sum;
  std::vector<int> gain_count;
  for (const auto& log : logs) {
    for (const auto& step : log.steps) {
      if (!step.executed || step.blows.empty()) continue;
      double prev = -1.0;
      int b = 0;
      for (const auto& br : step.blows) {
        if (br.is_center_blow) {
          prev = br.coverage_after;
          continue;
        }
        if (prev < 0.0) {
          prev = br.coverage_after;
          continue;
        }
        if (static_cast<int>(gain_sum.size()) <= b) {
          gain_sum.resize(b + 1, 0.0);
          gain_count.resize(b + 1, 0);
        }
        gain_sum[b] += br.coverage_after - prev;
        gain_count[b] += 1;
        prev = br.coverage_after;
        ++b;
      }
    }
  }
  for (std::size_t i = 0; i < gain_sum.size(); ++i) {
    cell.mean_blow_gains.push_back(gain_sum[i] / std::max(1, gain_count[i]));
  }
  cell.logs = std::move(logs);
  return cell;
}

EvalResults cmd_eval(const ExperimentConfig& cfg,
                     const std::string& checkpoint_path) {
  const std::uint64_t hash = config_hash(cfg);
  const auto tokens = split_csv(cfg.eval_policies);
  if (tokens.empty()) throw ConfigError("eval.policies is empty");

  std::vector<PolicyCell> cells;
  bool needs_checkpoint = false;
  for (const auto& t : tokens) {
    cells.push_back(parse_policy_cell(t));
    needs_checkpoint = needs_checkpoint || cells.back().grasp_learned ||
                       cells.back().blow == PolicyCell::Blow::kLearned;
  }

  std::unique_ptr<TrainState> state;
  if (needs_checkpoint) {
    if (checkpoint_path.empty()) {
      throw ConfigError(
          "eval: a learned policy cell requires --checkpoint; refusing to "
          "fall back");
    }
    state = load_checkpoint(checkpoint_path, cfg).state;
  }

  fs::create_directories(cfg.out_dir);
  EvalResults results;
  results.config_hash = hash;

  const int workers = resolve_workers(cfg);
  Rng root(cfg.seed);

  for (const PolicyCell& cell : cells) {
    const fs::path log_dir = fs::path(cfg.out_dir) / "logs" / cell.token;
    fs::create_directories(log_dir);

    std::vector<EpisodeLog> logs(cfg.eval_episodes);
    std::atomic<int> next{0};
    auto work = [&]() {
      LearnedGraspPolicy learned_grasp(
          state ? &state->grasp : nullptr, cfg.env.episode.rotations, 0.0);
      HeuristicGraspPolicy heuristic_grasp_policy;
      LearnedBlowPolicy learned_blow(state ? &state->blow : nullptr,
                                     cfg.env.episode.blow_action_samples, 0.0);
      FixedBlowPolicy fixed_blow;
      GraspPolicy* grasp_policy =
          cell.grasp_learned
              ? static_cast<GraspPolicy*>(&learned_grasp)
              : static_cast<GraspPolicy*>(&heuristic_grasp_policy);
      BlowPolicy* blow_policy = nullptr;
      if (cell.blow == PolicyCell::Blow::kLearned) blow_policy = &learned_blow;
      if (cell.blow == PolicyCell::Blow::kFixed) blow_policy = &fixed_blow;

      for (;;) {
        const int e = next.fetch_add(1);
        if (e >= cfg.eval_episodes) break;
        Rng rng = root.split(fnv1a64("eval:" + cell.token))
                      .split(static_cast<std::uint64_t>(e));
        ObsSink sink;
        fs::path obs_dir;
        if (cfg.save_observations) {
          char name[32];
          std::snprintf(name, sizeof(name), "ep_%05d", e);
          obs_dir = fs::path(cfg.out_dir) / "obs" / cell.token / name;
          fs::create_directories(obs_dir);
          sink = [obs_dir](const std::string& tag, const Raster& raster) {
            write_pnm(raster, (obs_dir / (tag + ".ppm")).string());
          };
        }
        EpisodeLog log =
            run_episode(cfg.env, *grasp_policy, blow_policy, rng, sink);
        log.config_hash = hash;
        logs[e] = std::move(log);
      }
    };
    if (workers <= 1 || cfg.eval_episodes <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < std::min(workers, cfg.eval_episodes); ++w) {
        pool.emplace_back(work);
      }
      for (auto& t : pool) t.join();
    }

    for (int e = 0; e < cfg.eval_episodes; ++e) {
      char name[32];
      std::snprintf(name, sizeof(name), "ep_%05d.jsonl", e);
      std::ofstream out(log_dir / name, std::ios::binary);
      out << episode_log_to_jsonl(logs[e]);
    }
    results.cells.push_back(summarize_cell(cell.token, std::move(logs)));
  }

  // Derived artifacts; every number here is recomputable from the logs.
  {
    std::ofstream out(fs::path(cfg.out_dir) / "results.csv");
    out << "# config_hash " << hex64(hash) << "\n";
    out << "policy,episodes,final_mean,final_std,delta_mean,delta_std\n";
    for (const auto& cell : results.cells) {
      char row[256];
      std::snprintf(row, sizeof(row), "%s,%d,%.6f,%.6f,%.6f,%.6f",
                    cell.policy.c_str(), cell.episodes, cell.final_mean,
                    cell.final_std, cell.delta_mean, cell.delta_std);
      out << row << '\n';
    }
  }
  {
    std::ofstream out(fs::path(cfg.out_dir) / "curves.csv");
    out << "# config_hash " << hex64(hash) << "\n";
    out << "policy,step,mean_coverage\n";
    for (const auto& cell : results.cells) {
      for (std::size_t s = 0; s < cell.curve.size(); ++s) {
        char row[128];
        std::snprintf(row, sizeof(row), "%s,%zu,%.6f", cell.policy.c_str(), s,
                      cell.curve[s]);
        out << row << '\n';
      }
    }
  }
  {
    json summary;
    summary["config_hash"] = hex64(hash);
    summary["task"] = cfg.task;
    summary["episodes_per_cell"] = cfg.eval_episodes;
    json jcells = json::array();
    for (const auto& cell : results.cells) {
      jcells.push_back(json{{"policy", cell.policy},
                            {"final_mean", cell.final_mean},
                            {"final_std", cell.final_std},
                            {"delta_mean", cell.delta_mean},
                            {"delta_std", cell.delta_std},
                            {"curve", cell.curve},
                            {"mean_blow_gains", cell.mean_blow_gains}});
    }
    summary["cells"] = jcells;
    std::ofstream out(fs::path(cfg.out_dir) / "summary.json");
    out << summary.dump(2) << '\n';
  }

  std::cout << "task: " << cfg.task << " (" << cfg.eval_episodes
            << " episodes per cell, final / delta coverage)\n";
  for (const auto& cell : results.cells) {
    char row[160];
    std::snprintf(row, sizeof(row), "  %-20s %5.1f / %5.1f", cell.policy.c_str(),
                  100.0 * cell.final_mean, 100.0 * cell.delta_mean);
    std::cout << row << "\n";
  }
  return results;
}

namespace {

void paint(Raster& img, int row, int col, std::uint8_t r, std::uint8_t g,
           std::uint8_t b) {
  if (row < 0 || row >= img.height || col < 0 || col >= img.width) return;
  img.at(row, col, 0) = r;
  img.at(row, col, 1) = g;
  img.at(row, col, 2) = b;
}

void paint_dot(Raster& img, int row, int col, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) paint(img, row + dr, col + dc, r, g, b);
  }
}

}  // namespace

int cmd_render(const ExperimentConfig& cfg, const std::string& log_path,
               const std::string& obs_dir, const std::string& out_dir) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw std::runtime_error("render: cannot open log " + log_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const EpisodeLog log = episode_log_from_jsonl(buf.str());

  fs::create_directories(out_dir);
  int written = 0;
  const double side = cfg.env.workspace.side;
  for (const StepRecord& step : log.steps) {
    const std::string grasp_tag = "step" + std::to_string(step.index) + "_grasp";
    const fs::path grasp_obs = fs::path(obs_dir) / (grasp_tag + ".ppm");
    if (fs::exists(grasp_obs)) {
      Raster img = read_pnm(grasp_obs.string());
      img.meters_per_pixel = side / img.width;
      if (step.line) {
        const auto [dcol, drow] = line_direction_image(step.line->theta_deg);
        const double reach = std::hypot(img.width, img.height);
        for (double t = -reach; t <= reach; t += 0.5) {
          paint(img,
                static_cast<int>(std::lround(step.line->center_row + t * drow)),
                static_cast<int>(std::lround(step.line->center_col + t * dcol)),
                255, 255, 0);
        }
        paint_dot(img, static_cast<int>(std::lround(step.line->center_row)),
                  static_cast<int>(std::lround(step.line->center_col)), 255, 0,
                  0);
      }
      write_pnm(img, (fs::path(out_dir) / (grasp_tag + ".ppm")).string());
      ++written;
    } else if (step.executed) {
      throw std::runtime_error("render: missing observation " +
                               grasp_obs.string());
    }

    int b = 0;
    for (const BlowRecord& br : step.blows) {
      if (br.is_center_blow) continue;
      ++b;
      const std::string tag =
          "step" + std::to_string(step.index) + "_blow" + std::to_string(b);
      const fs::path obs_path = fs::path(obs_dir) / (tag + ".ppm");
      if (!fs::exists(obs_path)) {
        throw std::runtime_error("render: missing observation " +
                                 obs_path.string());
      }
      Raster img = read_pnm(obs_path.string());
      img.meters_per_pixel = side / img.width;
      const double nozzle_x = br.action.p_x;
      const double nozzle_y = cfg.env.stretch.grip_center_y - kNozzleGripOffset;
      const auto [nrow, ncol] = world_to_pixel({side}, img.meters_per_pixel,
                                               nozzle_x, nozzle_y);
      const double yaw = deg_to_rad(br.action.r_z_deg);
      for (int t = 0; t <= 6; ++t) {
        paint(img,
              static_cast<int>(std::lround(nrow - t * std::cos(yaw))),
              static_cast<int>(std::lround(ncol - t * std::sin(yaw))),
              0, 255, 255);
      }
      paint_dot(img, static_cast<int>(std::lround(nrow)),
                static_cast<int>(std::lround(ncol)), 0, 0, 255);
      write_pnm(img, (fs::path(out_dir) / (tag + ".ppm")).string());
      ++written;
    }
  }
  return written;
}

int cmd_verify() {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok,
                    const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << std::endl;
    failures += !ok;
  };

  {
    GraspNetSpec spec{3, {2, 2, 2, 2}, {2, 2, 2}};
    GraspValueModel<double> model(spec, 11);
    Rng rng(3);
    std::vector<GraspTransition> batch;
    for (int i = 0; i < 2; ++i) {
      GraspTransition t;
      t.obs.height = t.obs.width = 16;
      t.obs.channels = 3;
      t.obs.bytes.resize(16 * 16 * 3);
      for (auto& bb : t.obs.bytes) {
        bb = static_cast<std::uint8_t>(rng.uniform_int(256));
      }
      t.row = rng.uniform_int(16);
      t.col = rng.uniform_int(16);
      t.label = static_cast<float>(rng.uniform01());
      batch.push_back(std::move(t));
    }
    auto backward = [&]() { return grasp_mse_backward(model, batch); };
    auto forward = [&]() {
      double loss = 0;
      for (const auto& t : batch) {
        const auto y = model.forward(t.obs.to_tensor<double>());
        const double err = y.at(0, t.row, t.col) - t.label;
        loss += err * err;
      }
      return loss / batch.size();
    };
    const auto rep = check_gradients(model.params(), backward, forward);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%d params, max rel err %.2e",
                  rep.parameters, rep.max_rel_error);
    report("grasp model gradient vs finite differences", rep.max_rel_error <= 1e-3,
           detail);
  }
  {
    BlowNetSpec spec{3, {2, 2, 2, 2, 2, 2, 2}, {2, 2, 1, 1, 1, 1, 1}, 2, 3, 4};
    BlowScoreModel<double> model(spec, 13);
    Rng rng(5);
    std::vector<BlowTransition> batch;
    for (int i = 0; i < 2; ++i) {
      BlowTransition t;
      t.obs.height = t.obs.width = 8;
      t.obs.channels = 3;
      t.obs.bytes.resize(8 * 8 * 3);
      for (auto& bb : t.obs.bytes) {
        bb = static_cast<std::uint8_t>(rng.uniform_int(256));
      }
      t.action = BlowAction{rng.uniform(-0.1, 0.1), rng.uniform(-30, 30)};
      t.label = static_cast<float>(rng.uniform01());
      batch.push_back(std::move(t));
    }
    auto backward = [&]() { return blow_mse_backward(model, batch); };
    auto forward = [&]() {
      double loss = 0;
      for (const auto& t : batch) {
        typename BlowScoreModel<double>::ScoreTrace trace;
        const double pred =
            model.forward(t.obs.to_tensor<double>(), t.action, trace);
        const double err = pred - t.label;
        loss += err * err;
      }
      return loss / batch.size();
    };
    const auto rep = check_gradients(model.params(), backward, forward);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%d params, max rel err %.2e",
                  rep.parameters, rep.max_rel_error);
    report("blow model gradient vs finite differences", rep.max_rel_error <= 1e-3,
           detail);
  }
  {
    JetConfig jet;
    JetPose pose{Vec3(0, 0, 0.03), Vec3(0, 1, 0)};
    bool ok = true;
    for (int seed = 0; seed < 100 && ok; ++seed) {
      Rng rng(seed);
      const auto particles = emit_cone(pose, jet, rng);
      ok = static_cast<int>(particles.size()) == jet.particles_per_step;
      for (const auto& p : particles) {
        ok = ok && std::abs(p.velocity.norm() - jet.emission_speed) < 1e-12;
        const double angle =
            std::acos(std::clamp(p.velocity.normalized().dot(pose.axis), -1.0, 1.0));
        ok = ok && angle <= deg_to_rad(jet.cone_angle_deg) / 2 + 1e-9;
      }
    }
    report("jet emission contract (count/speed/cone)", ok);
  }
  {
    auto run = [](std::uint64_t seed) {
      WorldConfig world;
      ClothMesh cloth = build_rect_cloth(0.5, 0.5, 9, 0.6);
      Rng rng(seed);
      crumple(world, cloth, rng);
      std::ostringstream out;
      export_cloth_state(cloth, out);
      return out.str();
    };
    report("seeded crumple determinism", run(42) == run(42));
  }
  {
    ReplayBuffer<int> buffer(3);
    for (int i = 1; i <= 4; ++i) buffer.push(i);
    const bool ok = buffer.size() == 3 && buffer.at(0) == 2 &&
                    buffer.at(1) == 3 && buffer.at(2) == 4;
    report("replay buffer FIFO eviction", ok);
  }
  {
    AdamState<double> opt;
    opt.lr = 0.1;
    opt.weight_decay = 0.0;
    std::vector<double> params{0.0};
    adam_step(opt, params, {1.0});
    report("adam first-step magnitude", std::abs(params[0] + 0.1) < 1e-6);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace aircloth
