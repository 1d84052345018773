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

#include <optional>
#include <string>
#include <utility>

#include "aircloth/air.hpp"
#include "aircloth/cloth.hpp"
#include "aircloth/common.hpp"
#include "aircloth/render.hpp"
#include "aircloth/rng.hpp"

namespace aircloth {

// Dual-arm grasp line in raster coordinates; the two grasp points are the
// farthest intersections of this line with the cloth mask.
struct GraspLine {
  double center_row = 0.0;
  double center_col = 0.0;
  double theta_deg = 0.0;  // [0, 180)
};

inline double canonical_angle_deg(double theta) {
  double t = std::fmod(theta, 180.0);
  if (t < 0.0) t += 180.0;
  return t;
}

// Line direction in (col, row) pixel coordinates for a world-frame angle.
inline std::pair<double, double> line_direction_image(double theta_deg) {
  const double t = deg_to_rad(theta_deg);
  return {std::cos(t), -std::sin(t)};
}

struct BlowAction {
  double p_x = 0.0;      // m, [-0.1, 0.1]
  double r_z_deg = 0.0;  // degrees, [-30, 30]
};

inline constexpr double kBlowMaxTranslation = 0.1;
inline constexpr double kBlowMaxYawDeg = 30.0;
inline constexpr double kNozzleHeight = 0.03;
inline constexpr double kNozzleGripOffset = 0.05;
inline constexpr double kNozzlePitchDeg = -10.0;
inline constexpr double kMinGraspSeparation = 0.1;
inline constexpr int kDefaultBlowActionSamples = 64;
inline constexpr int kHeuristicGraspPairSamples = 100;

// Bag-task action; carried for the metrics/logging pipeline only.
struct BagBlowAction {
  double p_y = 0.0;
  double p_z = 0.0;
  double r_x_deg = 0.0;
};

enum class RejectReason { kCenterOffCloth, kPairTooClose, kEmptyMask };

std::string reject_reason_name(RejectReason reason);

// A grasp that cannot be executed; terminates the episode, not an error.
struct GraspResolution {
  std::optional<GraspPair> pair;
  std::optional<RejectReason> reject;

  bool ok() const { return pair.has_value(); }
};

// Extends the infinite line through the mask and lifts the two extreme cloth
// pixels to 3-D via the depth map. Rejects when the center pixel is
// background or the pair is closer than min_separation. The line is walked
// at 4x sub-pixel steps; extreme means farthest along the line regardless of
// mask gaps.
GraspResolution edge_coincident_grasp(const Raster& mask, const GraspLine& line,
                                      const DepthMap& depth,
                                      double min_separation =
                                          kMinGraspSeparation);

// Nozzle pose for a blow action relative to the grip center: translated
// p_x along x, kNozzleGripOffset behind the grip line (facing +y),
// kNozzleHeight above the table, yawed r_z about z and pitched -10 degrees.
JetPose blow_pose(const BlowAction& action, const Vec3& grip_center);

// M independent uniform draws over the action box.
std::vector<BlowAction> sample_blow_actions(int m, Rng& rng);

// Samples pair_samples uniform pairs of cloth pixels and returns the pair
// with the largest separation, subject to the safety floor.
GraspResolution heuristic_grasp(const Raster& mask, const DepthMap& depth,
                                Rng& rng,
                                int pair_samples = kHeuristicGraspPairSamples,
                                double min_separation = kMinGraspSeparation);

// Blower in the middle of the workspace facing forward.
inline BlowAction heuristic_blow() { return BlowAction{0.0, 0.0}; }

}  // namespace aircloth
