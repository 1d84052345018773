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

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aircloth/cloth.hpp"

namespace aircloth {

// Uniform mid-gray, distinct from sampled cloth colors.
inline constexpr std::array<std::uint8_t, 3> kBackgroundColor{128, 128, 128};

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (mask) or 3 (color)
  double meters_per_pixel = 0.0;
  std::vector<std::uint8_t> pixels;  // row-major, interleaved

  std::uint8_t at(int row, int col, int ch = 0) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels +
                  ch];
  }
  std::uint8_t& at(int row, int col, int ch = 0) {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels +
                  ch];
  }
  std::uint64_t content_hash() const;
};

// Top cloth surface height per pixel; kBackgroundDepth where no cloth.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> z;

  float at(int row, int col) const {
    return z[static_cast<std::size_t>(row) * width + col];
  }
};

inline constexpr float kBackgroundDepth = -1.0f;

struct RenderResult {
  Raster color;
  DepthMap depth;
};

// Pixel-center <-> workspace mapping. Row 0 is the +y edge of the workspace.
inline std::pair<double, double> pixel_to_world(const WorkspaceSpec& ws,
                                                double mpp, double row,
                                                double col) {
  return {(col + 0.5) * mpp - ws.side / 2, ws.side / 2 - (row + 0.5) * mpp};
}
inline std::pair<double, double> world_to_pixel(const WorkspaceSpec& ws,
                                                double mpp, double x,
                                                double y) {
  return {(ws.side / 2 - y) / mpp - 0.5, (x + ws.side / 2) / mpp - 0.5};
}

// Orthographic projection of the cloth onto z=0 over the workspace square,
// depth-ordered (highest z wins), uniform background elsewhere.
RenderResult render_topdown(const ClothMesh& cloth, const WorkspaceSpec& ws,
                            int resolution);

// Binary mask (0 / 255): pixel is cloth iff its color differs from the
// background. Idempotent on mask-as-image inputs.
Raster cloth_mask(const Raster& color);

int mask_pixel_count(const Raster& mask);

// (masked pixels * mpp^2) / flattened_area. Unclamped; rasterization can
// report slightly above 1.
double coverage(const Raster& mask, const ClothMesh& cloth);

// k rotations of a square raster at angles i*(180/k) degrees about the image
// center, nearest-neighbor sampled, background-filled outside the source.
struct RotationStack {
  std::vector<Raster> images;
  std::vector<double> angles_deg;
  int size = 0;

  // Original-frame (row, col) of a rotated-frame pixel.
  std::pair<double, double> to_original(int index, double row,
                                        double col) const;
};

RotationStack rotation_stack(const Raster& raster, int k = 8);

// Binary PNM (P5/P6): one header line then raw bytes.
void write_pnm(const Raster& raster, const std::string& path);
Raster read_pnm(const std::string& path);

}  // namespace aircloth
