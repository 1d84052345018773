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

#include "aircloth/actions.hpp"

#include <cmath>
#include <stdexcept>

namespace aircloth {
namespace {

constexpr double kWalkStep = 0.25;  // 4x sub-pixel line walk

Vec3 lift_pixel(const Raster& mask, const DepthMap& depth, int row, int col) {
  WorkspaceSpec ws{mask.meters_per_pixel * mask.width};
  const auto [x, y] = pixel_to_world(ws, mask.meters_per_pixel, row, col);
  float z = depth.at(row, col);
  if (z == kBackgroundDepth) z = 0.0f;
  return Vec3(x, y, z);
}

// Deterministic left/right labeling: smaller x (then smaller y) is left.
GraspPair label_pair(const Vec3& a, const Vec3& b) {
  const bool a_left =
      a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  GraspPair pair;
  pair.left = a_left ? a : b;
  pair.right = a_left ? b : a;
  return pair;
}

}  // namespace

std::string reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::kCenterOffCloth:
      return "center-off-cloth";
    case RejectReason::kPairTooClose:
      return "pair-too-close";
    case RejectReason::kEmptyMask:
      return "empty-mask";
  }
  return "unknown";
}

GraspResolution edge_coincident_grasp(const Raster& mask,
                                      const GraspLine& line,
                                      const DepthMap& depth,
                                      double min_separation) {
  GraspResolution result;
  const int n = mask.width;
  const int center_row = static_cast<int>(std::lround(line.center_row));
  const int center_col = static_cast<int>(std::lround(line.center_col));
  if (center_row < 0 || center_row >= mask.height || center_col < 0 ||
      center_col >= n || mask.at(center_row, center_col) == 0) {
    result.reject = RejectReason::kCenterOffCloth;
    return result;
  }

  const auto [dcol, drow] =
      line_direction_image(canonical_angle_deg(line.theta_deg));
  const double reach = std::hypot(mask.width, mask.height) + 2.0;
  const int steps = static_cast<int>(std::ceil(reach / kWalkStep));

  // Farthest cloth pixels along the line in each direction, by walk
  // parameter. Gaps in the mask do not stop the walk.
  bool have_min = false, have_max = false;
  int min_row = 0, min_col = 0, max_row = 0, max_col = 0;
  for (int k = -steps; k <= steps; ++k) {
    const double t = k * kWalkStep;
    const int row =
        static_cast<int>(std::lround(line.center_row + t * drow));
    const int col =
        static_cast<int>(std::lround(line.center_col + t * dcol));
    if (row < 0 || row >= mask.height || col < 0 || col >= n) continue;
    if (mask.at(row, col) == 0) continue;
    if (!have_min) {
      have_min = true;
      min_row = row;
      min_col = col;
    }
    have_max = true;
    max_row = row;
    max_col = col;
  }
  // Center is cloth, so both extremes exist.
  (void)have_max;

  const Vec3 a = lift_pixel(mask, depth, min_row, min_col);
  const Vec3 b = lift_pixel(mask, depth, max_row, max_col);
  if ((a - b).norm() < min_separation) {
    result.reject = RejectReason::kPairTooClose;
    return result;
  }
  result.pair = label_pair(a, b);
  return result;
}

JetPose blow_pose(const BlowAction& action, const Vec3& grip_center) {
  if (std::abs(action.p_x) > kBlowMaxTranslation + 1e-12 ||
      std::abs(action.r_z_deg) > kBlowMaxYawDeg + 1e-12) {
    throw std::invalid_argument("blow_pose: action out of bounds");
  }
  JetPose pose;
  pose.origin = Vec3(grip_center.x() + action.p_x,
                     grip_center.y() - kNozzleGripOffset, kNozzleHeight);
  const double yaw = deg_to_rad(action.r_z_deg);
  const Vec3 heading(-std::sin(yaw), std::cos(yaw), 0.0);
  const double pitch = deg_to_rad(kNozzlePitchDeg);
  pose.axis = Vec3(std::cos(pitch) * heading.x(), std::cos(pitch) * heading.y(),
                   std::sin(pitch));
  return pose;
}

std::vector<BlowAction> sample_blow_actions(int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("sample_blow_actions: m must be >= 1");
  std::vector<BlowAction> actions;
  actions.reserve(m);
  for (int i = 0; i < m; ++i) {
    BlowAction a;
    a.p_x = rng.uniform(-kBlowMaxTranslation, kBlowMaxTranslation);
    a.r_z_deg = rng.uniform(-kBlowMaxYawDeg, kBlowMaxYawDeg);
    actions.push_back(a);
  }
  return actions;
}

GraspResolution heuristic_grasp(const Raster& mask, const DepthMap& depth,
                                Rng& rng, int pair_samples,
                                double min_separation) {
  GraspResolution result;
  std::vector<int> cloth_pixels;
  cloth_pixels.reserve(1024);
  for (int i = 0; i < mask.width * mask.height; ++i) {
    if (mask.pixels[i] != 0) cloth_pixels.push_back(i);
  }
  if (cloth_pixels.empty()) {
    result.reject = RejectReason::kEmptyMask;
    return result;
  }

  double best_d2 = -1.0;
  Vec3 best_a, best_b;
  for (int s = 0; s < pair_samples; ++s) {
    const int pa = cloth_pixels[rng.uniform_int(
        static_cast<int>(cloth_pixels.size()))];
    const int pb = cloth_pixels[rng.uniform_int(
        static_cast<int>(cloth_pixels.size()))];
    const Vec3 a = lift_pixel(mask, depth, pa / mask.width, pa % mask.width);
    const Vec3 b = lift_pixel(mask, depth, pb / mask.width, pb % mask.width);
    const double d2 = (a - b).squaredNorm();
    if (d2 > best_d2) {
      best_d2 = d2;
      best_a = a;
      best_b = b;
    }
  }
  if (best_d2 < min_separation * min_separation) {
    result.reject = RejectReason::kPairTooClose;
    return result;
  }
  result.pair = label_pair(best_a, best_b);
  return result;
}

}  // namespace aircloth
