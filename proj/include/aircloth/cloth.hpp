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

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "aircloth/rng.hpp"

namespace aircloth {

using Vec3 = Eigen::Vector3d;

enum class SpringFamily : std::uint8_t { kStretch, kBend, kShear };

struct Particle {
  Vec3 position{0.0, 0.0, 0.0};
  Vec3 velocity{0.0, 0.0, 0.0};
  double inverse_mass = 0.0;  // 0 => pinned / infinite mass
};

struct Spring {
  int i = 0;
  int j = 0;
  double rest_length = 0.0;
  double stiffness = 0.0;  // kg/s^2, before grid-spacing scaling
  SpringFamily family = SpringFamily::kStretch;
};

// Kinematically driven particle: after every step the particle sits exactly
// at `target` with zero velocity.
struct PinConstraint {
  int particle = 0;
  Vec3 target{0.0, 0.0, 0.0};
};

struct StiffnessTriple {
  double stretch = 0.8;
  double bend = 1.0;
  double shear = 0.9;
};

struct ClothMesh {
  int rows = 0;
  int cols = 0;
  std::vector<Particle> particles;
  std::vector<Spring> springs;
  std::vector<std::array<int, 3>> faces;
  double total_mass = 0.0;
  double flattened_area = 0.0;  // coverage normalizer, width * height
  double spacing_x = 0.0;
  double spacing_y = 0.0;
  std::array<std::uint8_t, 3> color{200, 60, 60};

  int index(int r, int c) const { return r * cols + c; }
  double grid_spacing() const { return std::max(spacing_x, spacing_y); }
};

struct WorldConfig {
  double gravity = 9.8;  // m/s^2, acts along -z
  double dt = 1.0 / 180.0;
  double damping = 2.0;           // 1/s, per-step velocity damping
  double table_friction = 0.4;    // Coulomb-style tangential damping
  double table_restitution = 0.0;
  double z_tolerance = 1e-4;
  double max_speed = 40.0;  // hard clamp, guards explicit integration
  double settle_kinetic_tolerance = 2e-5;  // J
  int settle_max_steps = 2500;
  double pin_move_speed = 1.0;  // m/s for kinematic pin trajectories
};

// Square workspace on the table plane, centered at the origin.
struct WorkspaceSpec {
  double side = 1.1;
};

// Line-segment grasp resolved to two world-space grasp points.
struct GraspPair {
  Vec3 left{0.0, 0.0, 0.0};
  Vec3 right{0.0, 0.0, 0.0};
  double separation() const { return (left - right).norm(); }
};

// Regular grid of point masses at z=0 with stretch (4-neighbor), shear
// (diagonal) and bend (2-apart) springs. grid_res is the particle count per
// side. Spring constants are the family stiffness scaled by 1/rest_length so
// the assembled cloth's effective stiffness is resolution-independent.
ClothMesh build_rect_cloth(double width, double height, int grid_res,
                           double mass, const StiffnessTriple& stiffness = {});

// One dt of semi-implicit Euler: impulses, spring+gravity forces, damping,
// position update, table collision, pin enforcement. `external_impulses` may
// be empty or one entry per particle (kg*m/s). Throws NumericalBlowupError if
// the state goes non-finite.
void sim_step(const WorldConfig& world, ClothMesh& cloth,
              const std::vector<PinConstraint>& pins,
              const std::vector<Vec3>& external_impulses = {});

double kinetic_energy(const ClothMesh& cloth);

struct SettleResult {
  int steps_taken = 0;
  bool converged = false;
};

// Steps until total kinetic energy drops below `kinetic_tolerance` or
// max_steps is reached (flagged via `converged`, not an error).
SettleResult settle(const WorldConfig& world, ClothMesh& cloth,
                    const std::vector<PinConstraint>& pins, int max_steps,
                    double kinetic_tolerance);

// Moves pin targets along straight lines to `targets` at pin_move_speed,
// stepping the simulation as it goes.
void move_pins(const WorldConfig& world, ClothMesh& cloth,
               std::vector<PinConstraint>& pins,
               const std::vector<Vec3>& targets);

// Random-grasp / lift / drop initialization: pick a uniform random particle,
// raise it to a uniform height in [0.5, 1.5] m, settle the hang, release and
// settle on the table.
void crumple(const WorldConfig& world, ClothMesh& cloth, Rng& rng);

struct StretchConfig {
  double hold_height = 0.10;
  double taut_strain = 0.08;        // stop when a top-edge spring reaches this
  double separation_increment = 0.001;  // m per increment
  double grip_center_y = -0.40;     // canonical grip line, along x at this y
};

struct StretchResult {
  std::vector<PinConstraint> pins;  // two entries: left then right
  Vec3 grip_center{0.0, 0.0, 0.0};
  double separation = 0.0;
};

// Pin the two particles nearest pair.left/right (must be within one grid
// spacing), carry them to the canonical grip pose at hold_height, then widen
// the pin separation in 1 mm increments until the taut criterion is met.
// Throws std::invalid_argument if a grasp point is too far from the cloth.
StretchResult grasp_and_stretch(const WorldConfig& world, ClothMesh& cloth,
                                const GraspPair& pair,
                                const StretchConfig& cfg = {});

// Mean |len - rest| / rest over all springs.
double mean_spring_strain(const ClothMesh& cloth);

// One particle per record: index x y z vx vy vz. Used by golden-file tests.
void export_cloth_state(const ClothMesh& cloth, std::ostream& out);

}  // namespace aircloth
