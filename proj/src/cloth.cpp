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

#include "aircloth/cloth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace aircloth {
namespace {

// Family stiffness is a linear spring constant (kg/s^2) quoted at a
// reference length and particle mass. Dividing by rest length keeps the
// assembled cloth's stiffness resolution-independent; multiplying by the
// particle mass keeps spring frequencies (and therefore the explicit
// integrator's stability margin at dt = 1/180) independent of the sampled
// cloth mass, which spans a 10x range.
constexpr double kStiffnessReferenceLength = 0.75;
constexpr double kReferenceParticleMass = 0.004;

double spring_constant(const Spring& s, double particle_mass) {
  return s.stiffness * (kStiffnessReferenceLength / s.rest_length) *
         (particle_mass / kReferenceParticleMass);
}

}  // namespace

ClothMesh build_rect_cloth(double width, double height, int grid_res,
                           double mass, const StiffnessTriple& stiffness) {
  if (width <= 0.0 || height <= 0.0) {
    throw std::invalid_argument("build_rect_cloth: non-positive dimensions");
  }
  if (grid_res < 3) {
    throw std::invalid_argument("build_rect_cloth: grid_res must be >= 3");
  }
  if (mass <= 0.0) {
    throw std::invalid_argument("build_rect_cloth: non-positive mass");
  }

  ClothMesh cloth;
  cloth.rows = grid_res;
  cloth.cols = grid_res;
  cloth.spacing_x = width / (grid_res - 1);
  cloth.spacing_y = height / (grid_res - 1);
  cloth.total_mass = mass;
  cloth.flattened_area = width * height;

  const int n = grid_res * grid_res;
  const double particle_mass = mass / n;
  cloth.particles.resize(n);
  for (int r = 0; r < grid_res; ++r) {
    for (int c = 0; c < grid_res; ++c) {
      Particle& p = cloth.particles[cloth.index(r, c)];
      p.position = Vec3(-width / 2 + c * cloth.spacing_x,
                        -height / 2 + r * cloth.spacing_y, 0.0);
      p.velocity.setZero();
      p.inverse_mass = 1.0 / particle_mass;
    }
  }

  auto add_spring = [&](int r0, int c0, int r1, int c1, SpringFamily family,
                        double k) {
    Spring s;
    s.i = cloth.index(r0, c0);
    s.j = cloth.index(r1, c1);
    s.rest_length =
        (cloth.particles[s.i].position - cloth.particles[s.j].position).norm();
    s.stiffness = k;
    s.family = family;
    cloth.springs.push_back(s);
  };

  for (int r = 0; r < grid_res; ++r) {
    for (int c = 0; c < grid_res; ++c) {
      // Stretch: 4-neighbors.
      if (c + 1 < grid_res)
        add_spring(r, c, r, c + 1, SpringFamily::kStretch, stiffness.stretch);
      if (r + 1 < grid_res)
        add_spring(r, c, r + 1, c, SpringFamily::kStretch, stiffness.stretch);
      // Shear: diagonals of each cell.
      if (r + 1 < grid_res && c + 1 < grid_res) {
        add_spring(r, c, r + 1, c + 1, SpringFamily::kShear, stiffness.shear);
        add_spring(r, c + 1, r + 1, c, SpringFamily::kShear, stiffness.shear);
      }
      // Bend: 2-apart neighbors.
      if (c + 2 < grid_res)
        add_spring(r, c, r, c + 2, SpringFamily::kBend, stiffness.bend);
      if (r + 2 < grid_res)
        add_spring(r, c, r + 2, c, SpringFamily::kBend, stiffness.bend);
    }
  }

  for (int r = 0; r + 1 < grid_res; ++r) {
    for (int c = 0; c + 1 < grid_res; ++c) {
      cloth.faces.push_back({cloth.index(r, c), cloth.index(r, c + 1),
                             cloth.index(r + 1, c + 1)});
      cloth.faces.push_back(
          {cloth.index(r, c), cloth.index(r + 1, c + 1), cloth.index(r + 1, c)});
    }
  }
  return cloth;
}

void sim_step(const WorldConfig& world, ClothMesh& cloth,
              const std::vector<PinConstraint>& pins,
              const std::vector<Vec3>& external_impulses) {
  const double dt = world.dt;
  const int n = static_cast<int>(cloth.particles.size());
  if (!external_impulses.empty() &&
      static_cast<int>(external_impulses.size()) != n) {
    throw std::invalid_argument("sim_step: impulse count != particle count");
  }

  if (!external_impulses.empty()) {
    for (int i = 0; i < n; ++i) {
      cloth.particles[i].velocity +=
          external_impulses[i] * cloth.particles[i].inverse_mass;
    }
  }

  // Spring forces, accumulated as velocity deltas.
  const double particle_mass = cloth.total_mass / n;
  for (const Spring& s : cloth.springs) {
    Particle& a = cloth.particles[s.i];
    Particle& b = cloth.particles[s.j];
    Vec3 d = b.position - a.position;
    const double len = d.norm();
    if (len < 1e-12) continue;
    const double f = spring_constant(s, particle_mass) * (len - s.rest_length);
    const Vec3 impulse = (f * dt / len) * d;
    a.velocity += impulse * a.inverse_mass;
    b.velocity -= impulse * b.inverse_mass;
  }

  const double damp = std::max(0.0, 1.0 - world.damping * dt);
  const double max_speed2 = world.max_speed * world.max_speed;
  bool finite = true;
  for (Particle& p : cloth.particles) {
    if (p.inverse_mass > 0.0) {
      p.velocity.z() -= world.gravity * dt;
      p.velocity *= damp;
      const double v2 = p.velocity.squaredNorm();
      if (v2 > max_speed2) p.velocity *= world.max_speed / std::sqrt(v2);
    }
    p.position += p.velocity * dt;

    // Table plane at z=0: project, kill approaching normal velocity (scaled
    // by restitution) and damp tangential velocity Coulomb-style.
    if (p.position.z() < 0.0) {
      p.position.z() = 0.0;
      if (p.velocity.z() < 0.0) {
        const double vn = -p.velocity.z();
        p.velocity.z() = world.table_restitution * vn;
        const double vt =
            std::hypot(p.velocity.x(), p.velocity.y());
        if (vt > 1e-12) {
          const double scale =
              std::max(0.0, 1.0 - world.table_friction * vn / vt);
          p.velocity.x() *= scale;
          p.velocity.y() *= scale;
        }
      }
    }
    finite = finite && p.position.allFinite() && p.velocity.allFinite();
  }

  for (const PinConstraint& pin : pins) {
    Particle& p = cloth.particles[pin.particle];
    p.position = pin.target;
    p.velocity.setZero();
  }

  if (!finite) {
    throw NumericalBlowupError(
        "sim_step: non-finite particle state; reduce dt");
  }
}

double kinetic_energy(const ClothMesh& cloth) {
  double e = 0.0;
  for (const Particle& p : cloth.particles) {
    if (p.inverse_mass > 0.0) {
      e += 0.5 * p.velocity.squaredNorm() / p.inverse_mass;
    }
  }
  return e;
}

SettleResult settle(const WorldConfig& world, ClothMesh& cloth,
                    const std::vector<PinConstraint>& pins, int max_steps,
                    double kinetic_tolerance) {
  if (max_steps < 1) {
    throw std::invalid_argument("settle: max_steps must be >= 1");
  }
  SettleResult result;
  if (kinetic_energy(cloth) < kinetic_tolerance) {
    result.converged = true;
    return result;
  }
  for (int step = 0; step < max_steps; ++step) {
    sim_step(world, cloth, pins);
    ++result.steps_taken;
    if (kinetic_energy(cloth) < kinetic_tolerance) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

void move_pins(const WorldConfig& world, ClothMesh& cloth,
               std::vector<PinConstraint>& pins,
               const std::vector<Vec3>& targets) {
  if (pins.size() != targets.size()) {
    throw std::invalid_argument("move_pins: pins/targets size mismatch");
  }
  double longest = 0.0;
  std::vector<Vec3> start(pins.size());
  for (std::size_t i = 0; i < pins.size(); ++i) {
    start[i] = pins[i].target;
    longest = std::max(longest, (targets[i] - start[i]).norm());
  }
  const int steps = std::max(
      1, static_cast<int>(std::ceil(longest / (world.pin_move_speed * world.dt))));
  for (int s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    for (std::size_t i = 0; i < pins.size(); ++i) {
      pins[i].target = start[i] + t * (targets[i] - start[i]);
    }
    sim_step(world, cloth, pins);
  }
}

void crumple(const WorldConfig& world, ClothMesh& cloth, Rng& rng) {
  const int idx = rng.uniform_int(static_cast<int>(cloth.particles.size()));
  const double height = rng.uniform(0.5, 1.5);

  std::vector<PinConstraint> pins{{idx, cloth.particles[idx].position}};
  Vec3 lift_target = cloth.particles[idx].position;
  lift_target.z() = height;
  move_pins(world, cloth, pins, {lift_target});
  settle(world, cloth, pins, world.settle_max_steps,
         world.settle_kinetic_tolerance);

  pins.clear();
  settle(world, cloth, pins, world.settle_max_steps,
         world.settle_kinetic_tolerance);
}

namespace {

int nearest_particle(const ClothMesh& cloth, const Vec3& point) {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(cloth.particles.size()); ++i) {
    const double d2 = (cloth.particles[i].position - point).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

// Max strain among stretch springs whose endpoints both hang near the hold
// height. This is the geometric stand-in for "stretched taut": the springs
// between the two grippers are the first to take up tension.
double top_edge_max_strain(const ClothMesh& cloth, double hold_height) {
  const double band = cloth.grid_spacing();
  double max_strain = 0.0;
  for (const Spring& s : cloth.springs) {
    if (s.family != SpringFamily::kStretch) continue;
    const Particle& a = cloth.particles[s.i];
    const Particle& b = cloth.particles[s.j];
    if (a.position.z() < hold_height - band ||
        b.position.z() < hold_height - band) {
      continue;
    }
    const double len = (a.position - b.position).norm();
    max_strain = std::max(max_strain, (len - s.rest_length) / s.rest_length);
  }
  return max_strain;
}

}  // namespace

StretchResult grasp_and_stretch(const WorldConfig& world, ClothMesh& cloth,
                                const GraspPair& pair,
                                const StretchConfig& cfg) {
  const double snap_radius = cloth.grid_spacing();
  int il = nearest_particle(cloth, pair.left);
  int ir = nearest_particle(cloth, pair.right);
  if ((cloth.particles[il].position - pair.left).norm() > snap_radius ||
      (cloth.particles[ir].position - pair.right).norm() > snap_radius) {
    throw std::invalid_argument(
        "grasp_and_stretch: grasp point farther than one grid spacing "
        "from the cloth");
  }
  if (il == ir) {
    throw std::invalid_argument(
        "grasp_and_stretch: grasp points snap to the same particle");
  }
  // Assign sides to minimize carry rotation; crossing pins mid-carry would
  // momentarily collapse the held segment.
  if (cloth.particles[ir].position.x() < cloth.particles[il].position.x()) {
    std::swap(il, ir);
  }

  std::vector<PinConstraint> pins{{il, cloth.particles[il].position},
                                  {ir, cloth.particles[ir].position}};

  // Carry to the canonical grip pose: grip line along x, centered on
  // (0, grip_center_y, hold_height), preserving the current separation.
  double sep = (cloth.particles[il].position - cloth.particles[ir].position)
                   .norm();
  sep = std::max(sep, 2.0 * cfg.separation_increment);
  const Vec3 center(0.0, cfg.grip_center_y, cfg.hold_height);
  auto pin_targets = [&](double separation) {
    return std::vector<Vec3>{center - Vec3(separation / 2, 0, 0),
                             center + Vec3(separation / 2, 0, 0)};
  };
  move_pins(world, cloth, pins, pin_targets(sep));
  settle(world, cloth, pins, world.settle_max_steps / 2,
         world.settle_kinetic_tolerance);

  // Widen in 1 mm increments until a top-edge spring reaches the taut
  // strain. The diagonal rest length caps runaway separation.
  const double max_sep =
      1.2 * std::hypot(cloth.spacing_x * (cloth.cols - 1),
                       cloth.spacing_y * (cloth.rows - 1));
  while (sep < max_sep &&
         top_edge_max_strain(cloth, cfg.hold_height) < cfg.taut_strain) {
    sep += cfg.separation_increment;
    const auto targets = pin_targets(sep);
    pins[0].target = targets[0];
    pins[1].target = targets[1];
    sim_step(world, cloth, pins);
  }
  settle(world, cloth, pins, world.settle_max_steps / 2,
         world.settle_kinetic_tolerance);

  StretchResult result;
  result.pins = pins;
  result.grip_center = center;
  result.separation = sep;
  return result;
}

double mean_spring_strain(const ClothMesh& cloth) {
  if (cloth.springs.empty()) return 0.0;
  double total = 0.0;
  for (const Spring& s : cloth.springs) {
    const double len =
        (cloth.particles[s.i].position - cloth.particles[s.j].position).norm();
    total += std::abs(len - s.rest_length) / s.rest_length;
  }
  return total / cloth.springs.size();
}

void export_cloth_state(const ClothMesh& cloth, std::ostream& out) {
  out.precision(17);
  for (int i = 0; i < static_cast<int>(cloth.particles.size()); ++i) {
    const Particle& p = cloth.particles[i];
    out << i << ' ' << p.position.x() << ' ' << p.position.y() << ' '
        << p.position.z() << ' ' << p.velocity.x() << ' ' << p.velocity.y()
        << ' ' << p.velocity.z() << '\n';
  }
}

}  // namespace aircloth
