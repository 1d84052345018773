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

#include "aircloth/air.hpp"

#include <algorithm>
#include <cmath>

#include "aircloth/common.hpp"

namespace aircloth {
namespace {

// Orthonormal basis with w as the third column.
void basis_from_axis(const Vec3& w, Vec3& u, Vec3& v) {
  const Vec3 ref =
      std::abs(w.z()) < 0.9 ? Vec3(0.0, 0.0, 1.0) : Vec3(1.0, 0.0, 0.0);
  u = ref.cross(w).normalized();
  v = w.cross(u);
}

// Uniform 2D grid over the inflated workspace for triangle broad phase.
class TriangleGrid {
 public:
  TriangleGrid(const ClothMesh& cloth, const WorkspaceSpec& ws, double margin)
      : cell_(0.08) {
    lo_ = -(ws.side / 2 + margin);
    const double extent = ws.side + 2 * margin;
    dim_ = std::max(1, static_cast<int>(std::ceil(extent / cell_)));
    cells_.assign(static_cast<std::size_t>(dim_) * dim_, {});
    for (int f = 0; f < static_cast<int>(cloth.faces.size()); ++f) {
      const auto& face = cloth.faces[f];
      double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
      for (int k = 0; k < 3; ++k) {
        const Vec3& p = cloth.particles[face[k]].position;
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
      }
      insert_box(xmin, xmax, ymin, ymax, f);
    }
  }

  template <typename Fn>
  void for_candidates(double xmin, double xmax, double ymin, double ymax,
                      Fn&& fn) const {
    int c0, c1, r0, r1;
    clamp_range(xmin, xmax, c0, c1);
    clamp_range(ymin, ymax, r0, r1);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        for (int f : cells_[static_cast<std::size_t>(r) * dim_ + c]) fn(f);
      }
    }
  }

 private:
  void clamp_range(double lo, double hi, int& i0, int& i1) const {
    i0 = std::clamp(static_cast<int>(std::floor((lo - lo_) / cell_)), 0,
                    dim_ - 1);
    i1 = std::clamp(static_cast<int>(std::floor((hi - lo_) / cell_)), 0,
                    dim_ - 1);
  }

  void insert_box(double xmin, double xmax, double ymin, double ymax, int f) {
    int c0, c1, r0, r1;
    clamp_range(xmin, xmax, c0, c1);
    clamp_range(ymin, ymax, r0, r1);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        cells_[static_cast<std::size_t>(r) * dim_ + c].push_back(f);
      }
    }
  }

  double cell_;
  double lo_ = 0.0;
  int dim_ = 0;
  std::vector<std::vector<int>> cells_;
};

// Moller-Trumbore segment/triangle intersection. Returns t in [0,1] along
// p -> p+d, or a negative value on miss.
double segment_triangle(const Vec3& p, const Vec3& d, const Vec3& v0,
                        const Vec3& v1, const Vec3& v2, double& u_out,
                        double& v_out) {
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 h = d.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-14) return -1.0;
  const double inv_det = 1.0 / det;
  const Vec3 s = p - v0;
  const double u = s.dot(h) * inv_det;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  const double t = e2.dot(q) * inv_det;
  if (t < 1e-9 || t > 1.0) return -1.0;
  u_out = u;
  v_out = v;
  return t;
}

}  // namespace

std::vector<AirParticle> emit_cone(const JetPose& pose, const JetConfig& cfg,
                                   Rng& rng) {
  const double half_angle = deg_to_rad(cfg.cone_angle_deg) / 2.0;
  const double cos_min = std::cos(half_angle);
  Vec3 u, v;
  basis_from_axis(pose.axis, u, v);

  std::vector<AirParticle> out;
  out.reserve(cfg.particles_per_step);
  for (int i = 0; i < cfg.particles_per_step; ++i) {
    // Uniform over the spherical cap: cos(theta) uniform in [cos_min, 1].
    const double cos_theta = 1.0 - rng.uniform01() * (1.0 - cos_min);
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const Vec3 dir = sin_theta * std::cos(phi) * u +
                     sin_theta * std::sin(phi) * v + cos_theta * pose.axis;
    AirParticle p;
    p.position = pose.origin;
    p.velocity = cfg.emission_speed * dir;
    out.push_back(p);
  }
  return out;
}

std::vector<Vec3> air_step(const WorldConfig& world, const ClothMesh& cloth,
                           std::vector<AirParticle>& particles,
                           const JetConfig& cfg, const WorkspaceSpec& ws,
                           std::vector<CollisionEvent>* events) {
  std::vector<Vec3> impulses(cloth.particles.size(), Vec3::Zero());
  if (particles.empty()) return impulses;

  const TriangleGrid grid(cloth, ws, cfg.cull_margin);
  const double dt = world.dt;
  const double bound = ws.side / 2 + cfg.cull_margin;
  const double z_max = ws.side + cfg.cull_margin;

  std::size_t alive = 0;
  for (AirParticle& ap : particles) {
    if (cfg.gravity_on_air) ap.velocity.z() -= world.gravity * dt;

    double remaining = dt;
    // Up to a few deflections per step; the stream is fast relative to dt.
    for (int iter = 0; iter < 3 && remaining > 1e-12; ++iter) {
      const Vec3 motion = ap.velocity * remaining;

      // Earliest cloth hit along the swept segment.
      double best_t = 2.0;
      int best_face = -1;
      double best_u = 0.0, best_v = 0.0;
      const Vec3 q = ap.position + motion;
      grid.for_candidates(std::min(ap.position.x(), q.x()),
                          std::max(ap.position.x(), q.x()),
                          std::min(ap.position.y(), q.y()),
                          std::max(ap.position.y(), q.y()), [&](int f) {
        const auto& face = cloth.faces[f];
        double u, v;
        const double t = segment_triangle(
            ap.position, motion, cloth.particles[face[0]].position,
            cloth.particles[face[1]].position,
            cloth.particles[face[2]].position, u, v);
        if (t > 0.0 && t < best_t) {
          best_t = t;
          best_face = f;
          best_u = u;
          best_v = v;
        }
      });

      // Table hit.
      double table_t = 2.0;
      if (q.z() < 0.0 && ap.position.z() > 0.0) {
        table_t = ap.position.z() / (ap.position.z() - q.z());
      }

      if (best_face >= 0 && best_t <= table_t) {
        const auto& face = cloth.faces[best_face];
        const Vec3& a = cloth.particles[face[0]].position;
        const Vec3& b = cloth.particles[face[1]].position;
        const Vec3& c = cloth.particles[face[2]].position;
        Vec3 normal = (b - a).cross(c - a);
        const double nlen = normal.norm();
        if (nlen < 1e-14) break;
        normal /= nlen;

        const double w0 = 1.0 - best_u - best_v;
        const Vec3 surface_velocity = w0 * cloth.particles[face[0]].velocity +
                                      best_u * cloth.particles[face[1]].velocity +
                                      best_v * cloth.particles[face[2]].velocity;
        Vec3 rel = ap.velocity - surface_velocity;
        double rel_n = rel.dot(normal);
        if (rel_n > 0.0) {
          normal = -normal;
          rel_n = -rel_n;
        }
        ap.position += motion * best_t;
        remaining *= (1.0 - best_t);
        if (rel_n < -1e-12) {
          const Vec3 dv = -(1.0 + cfg.restitution) * rel_n * normal;
          ap.velocity += dv;
          const Vec3 cloth_impulse = -cfg.air_particle_mass * dv;
          impulses[face[0]] += w0 * cloth_impulse;
          impulses[face[1]] += best_u * cloth_impulse;
          impulses[face[2]] += best_v * cloth_impulse;
          if (events) {
            CollisionEvent ev;
            ev.air_momentum_delta = cfg.air_particle_mass * dv;
            ev.cloth_momentum_delta = cloth_impulse;
            ev.all_endpoints_free =
                cloth.particles[face[0]].inverse_mass > 0.0 &&
                cloth.particles[face[1]].inverse_mass > 0.0 &&
                cloth.particles[face[2]].inverse_mass > 0.0;
            events->push_back(ev);
          }
        }
        // Nudge off the surface so the next sweep does not re-hit it.
        ap.position += 1e-6 * normal;
        continue;
      }

      if (table_t <= 1.0) {
        ap.position += motion * table_t;
        ap.position.z() = 1e-6;
        remaining *= (1.0 - table_t);
        if (ap.velocity.z() < 0.0) {
          ap.velocity.z() = -cfg.restitution * ap.velocity.z();
        }
        continue;
      }

      ap.position = q;
      remaining = 0.0;
    }

    ++ap.age;
    const bool in_bounds = std::abs(ap.position.x()) <= bound &&
                           std::abs(ap.position.y()) <= bound &&
                           ap.position.z() >= -cfg.cull_margin &&
                           ap.position.z() <= z_max;
    if (ap.age <= cfg.lifetime_steps && in_bounds) {
      particles[alive++] = ap;
    }
  }
  particles.resize(alive);
  return impulses;
}

void blow(const WorldConfig& world, ClothMesh& cloth,
          const std::vector<PinConstraint>& pins, const JetPose& pose,
          const JetConfig& cfg, const WorkspaceSpec& ws, Rng& rng) {
  std::vector<AirParticle> stream;
  for (int step = 0; step < cfg.blow_duration_steps; ++step) {
    auto emitted = emit_cone(pose, cfg, rng);
    stream.insert(stream.end(), emitted.begin(), emitted.end());
    const auto impulses = air_step(world, cloth, stream, cfg, ws);
    sim_step(world, cloth, pins, impulses);
  }
  settle(world, cloth, pins, cfg.post_blow_settle_steps,
         world.settle_kinetic_tolerance);
}

}  // namespace aircloth
