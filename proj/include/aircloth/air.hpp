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

#include <vector>

#include "aircloth/cloth.hpp"
#include "aircloth/rng.hpp"

namespace aircloth {

struct JetConfig {
  int particles_per_step = 19;
  double emission_speed = 5.0;   // m/s
  double cone_angle_deg = 10.0;  // full aperture
  double air_particle_mass = 0.002;  // kg
  int blow_duration_steps = 150;
  double restitution = 0.3;        // air vs cloth and table
  int lifetime_steps = 60;
  double cull_margin = 0.5;        // workspace bounds inflated by this, m
  bool gravity_on_air = true;
  int post_blow_settle_steps = 60;
};

struct JetPose {
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 axis{0.0, 1.0, 0.0};  // unit
};

struct AirParticle {
  Vec3 position{0.0, 0.0, 0.0};
  Vec3 velocity{0.0, 0.0, 0.0};
  int age = 0;
};

// Per air-cloth collision momentum bookkeeping, for conservation checks.
struct CollisionEvent {
  Vec3 air_momentum_delta{0.0, 0.0, 0.0};
  Vec3 cloth_momentum_delta{0.0, 0.0, 0.0};
  bool all_endpoints_free = true;
};

// Emits exactly particles_per_step particles at the nozzle origin, each at
// emission_speed, directions uniform over the solid-angle cap of half-angle
// cone_angle/2 around the axis.
std::vector<AirParticle> emit_cone(const JetPose& pose, const JetConfig& cfg,
                                   Rng& rng);

// Advects every air particle ballistically by one dt, deflecting off cloth
// triangles and the table. Cloth collisions transfer the air particle's
// momentum change to the triangle's vertices (barycentric split); the
// returned per-particle impulses are meant to be fed to the next sim_step.
// Surviving particles are kept in place; aged-out or out-of-bounds particles
// are removed.
std::vector<Vec3> air_step(const WorldConfig& world, const ClothMesh& cloth,
                           std::vector<AirParticle>& particles,
                           const JetConfig& cfg, const WorkspaceSpec& ws,
                           std::vector<CollisionEvent>* events = nullptr);

// Full blow: for blow_duration_steps, interleave emit_cone / air_step /
// sim_step, then run a short pinned settle so the cloth reaches a stable
// state. Deterministic given (rng state, cloth state, pose).
void blow(const WorldConfig& world, ClothMesh& cloth,
          const std::vector<PinConstraint>& pins, const JetPose& pose,
          const JetConfig& cfg, const WorkspaceSpec& ws, Rng& rng);

}  // namespace aircloth
