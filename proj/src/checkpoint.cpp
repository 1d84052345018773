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

#include "aircloth/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace aircloth {
namespace {

constexpr char kMagic[8] = {'A', 'C', 'L', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CheckpointError("checkpoint: truncated file");
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  std::uint32_t n = 0;
  read_pod(in, n);
  if (n > (1u << 20)) throw CheckpointError("checkpoint: corrupt string size");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw CheckpointError("checkpoint: truncated file");
  return s;
}

void write_floats(std::ostream& out, const std::vector<float>& v) {
  write_pod(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> read_floats(std::istream& in) {
  std::uint64_t n = 0;
  read_pod(in, n);
  if (n > (1ull << 28)) throw CheckpointError("checkpoint: corrupt array size");
  std::vector<float> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw CheckpointError("checkpoint: truncated file");
  return v;
}

template <class Model>
void write_model(std::ostream& out, const Model& model,
                 const AdamState<float>& opt) {
  write_string(out, model.describe());
  write_floats(out, model.params().values());
  write_pod(out, static_cast<std::uint64_t>(opt.step));
  write_pod(out, opt.lr);
  write_pod(out, opt.weight_decay);
  write_pod(out, opt.beta1);
  write_pod(out, opt.beta2);
  write_pod(out, opt.eps);
  write_floats(out, opt.m);
  write_floats(out, opt.v);
}

template <class Model>
void read_model(std::istream& in, Model& model, AdamState<float>& opt) {
  const std::string desc = read_string(in);
  if (desc != model.describe()) {
    throw CheckpointError("checkpoint: architecture mismatch: stored '" + desc +
                          "' vs configured '" + model.describe() + "'");
  }
  std::vector<float> params = read_floats(in);
  if (params.size() != model.params().values().size()) {
    throw CheckpointError("checkpoint: parameter count mismatch");
  }
  model.params().values() = std::move(params);
  std::uint64_t step = 0;
  read_pod(in, step);
  opt.step = static_cast<long>(step);
  read_pod(in, opt.lr);
  read_pod(in, opt.weight_decay);
  read_pod(in, opt.beta1);
  read_pod(in, opt.beta2);
  read_pod(in, opt.eps);
  opt.m = read_floats(in);
  opt.v = read_floats(in);
  if (!opt.m.empty() && opt.m.size() != model.params().values().size()) {
    throw CheckpointError("checkpoint: optimizer moment shape mismatch");
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainState& state,
                     std::uint64_t cfg_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, cfg_hash);
  write_model(out, state.grasp, state.grasp_opt);
  write_model(out, state.blow, state.blow_opt);
  if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path,
                                 const ExperimentConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("checkpoint: bad magic in " + path);
  }
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kVersion) {
    throw CheckpointError("checkpoint: unsupported format version " +
                          std::to_string(version));
  }
  LoadedCheckpoint loaded;
  read_pod(in, loaded.config_hash);
  loaded.state = std::make_unique<TrainState>(cfg);
  read_model(in, loaded.state->grasp, loaded.state->grasp_opt);
  read_model(in, loaded.state->blow, loaded.state->blow_opt);
  return loaded;
}

}  // namespace aircloth
