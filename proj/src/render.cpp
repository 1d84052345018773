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

#include "aircloth/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "aircloth/common.hpp"

namespace aircloth {

std::uint64_t Raster::content_hash() const {
  std::uint64_t h = fnv1a64(pixels.data(), pixels.size());
  const int meta[3] = {width, height, channels};
  return fnv1a64(meta, sizeof(meta), h);
}

RenderResult render_topdown(const ClothMesh& cloth, const WorkspaceSpec& ws,
                            int resolution) {
  if (resolution < 32) {
    throw std::invalid_argument("render_topdown: resolution must be >= 32");
  }
  RenderResult out;
  Raster& img = out.color;
  img.width = img.height = resolution;
  img.channels = 3;
  img.meters_per_pixel = ws.side / resolution;
  img.pixels.resize(static_cast<std::size_t>(resolution) * resolution * 3);
  for (int i = 0; i < resolution * resolution; ++i) {
    img.pixels[i * 3 + 0] = kBackgroundColor[0];
    img.pixels[i * 3 + 1] = kBackgroundColor[1];
    img.pixels[i * 3 + 2] = kBackgroundColor[2];
  }
  out.depth.width = out.depth.height = resolution;
  out.depth.z.assign(static_cast<std::size_t>(resolution) * resolution,
                     kBackgroundDepth);

  const double mpp = img.meters_per_pixel;
  for (const auto& face : cloth.faces) {
    // Pixel-center coordinates of the projected triangle.
    double px[3], py[3], pz[3];
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = cloth.particles[face[k]].position;
      const auto [row, col] = world_to_pixel(ws, mpp, p.x(), p.y());
      px[k] = col;
      py[k] = row;
      pz[k] = p.z();
    }
    const double area = (px[1] - px[0]) * (py[2] - py[0]) -
                        (px[2] - px[0]) * (py[1] - py[0]);
    if (std::abs(area) < 1e-12) continue;  // edge-on, projects to nothing

    const int c0 = std::max(
        0, static_cast<int>(std::ceil(std::min({px[0], px[1], px[2]}))));
    const int c1 = std::min(
        resolution - 1,
        static_cast<int>(std::floor(std::max({px[0], px[1], px[2]}))));
    const int r0 = std::max(
        0, static_cast<int>(std::ceil(std::min({py[0], py[1], py[2]}))));
    const int r1 = std::min(
        resolution - 1,
        static_cast<int>(std::floor(std::max({py[0], py[1], py[2]}))));

    const double inv_area = 1.0 / area;
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double w0 = ((px[1] - c) * (py[2] - r) - (px[2] - c) * (py[1] - r)) *
                          inv_area;
        const double w1 = ((px[2] - c) * (py[0] - r) - (px[0] - c) * (py[2] - r)) *
                          inv_area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const double z = w0 * pz[0] + w1 * pz[1] + w2 * pz[2];
        const std::size_t idx = static_cast<std::size_t>(r) * resolution + c;
        if (z > out.depth.z[idx]) {
          out.depth.z[idx] = static_cast<float>(z);
          img.pixels[idx * 3 + 0] = cloth.color[0];
          img.pixels[idx * 3 + 1] = cloth.color[1];
          img.pixels[idx * 3 + 2] = cloth.color[2];
        }
      }
    }
  }
  return out;
}

Raster cloth_mask(const Raster& color) {
  Raster mask;
  mask.width = color.width;
  mask.height = color.height;
  mask.channels = 1;
  mask.meters_per_pixel = color.meters_per_pixel;
  mask.pixels.resize(static_cast<std::size_t>(color.width) * color.height);
  const int n = color.width * color.height;
  if (color.channels == 3) {
    for (int i = 0; i < n; ++i) {
      const bool bg = color.pixels[i * 3 + 0] == kBackgroundColor[0] &&
                      color.pixels[i * 3 + 1] == kBackgroundColor[1] &&
                      color.pixels[i * 3 + 2] == kBackgroundColor[2];
      mask.pixels[i] = bg ? 0 : 255;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      mask.pixels[i] = color.pixels[i] == 0 ? 0 : 255;
    }
  }
  return mask;
}

int mask_pixel_count(const Raster& mask) {
  int count = 0;
  for (std::uint8_t p : mask.pixels) count += p != 0;
  return count;
}

double coverage(const Raster& mask, const ClothMesh& cloth) {
  if (cloth.flattened_area <= 0.0) {
    throw std::invalid_argument("coverage: flattened_area must be positive");
  }
  const double mpp = mask.meters_per_pixel;
  return mask_pixel_count(mask) * mpp * mpp / cloth.flattened_area;
}

std::pair<double, double> RotationStack::to_original(int index, double row,
                                                     double col) const {
  const double theta = deg_to_rad(angles_deg[index]);
  const double c = (size - 1) / 2.0;
  const double x = col - c;
  const double y = row - c;
  // Chosen so a horizontal direction in rotated frame i maps to world-frame
  // angle +angles_deg[i] (rows run against world y).
  const double ct = std::cos(theta), st = std::sin(theta);
  return {c + (ct * y - st * x), c + (ct * x + st * y)};
}

RotationStack rotation_stack(const Raster& raster, int k) {
  if (raster.width != raster.height) {
    throw std::invalid_argument("rotation_stack: raster must be square");
  }
  RotationStack stack;
  stack.size = raster.width;
  stack.images.reserve(k);
  for (int i = 0; i < k; ++i) {
    stack.angles_deg.push_back(i * 180.0 / k);
  }
  const int n = raster.width;
  for (int i = 0; i < k; ++i) {
    if (i == 0) {
      stack.images.push_back(raster);
      continue;
    }
    Raster rot = raster;  // copies geometry/meta
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const auto [orow, ocol] = stack.to_original(i, r, c);
        const int sr = static_cast<int>(std::lround(orow));
        const int sc = static_cast<int>(std::lround(ocol));
        for (int ch = 0; ch < raster.channels; ++ch) {
          std::uint8_t value;
          if (sr < 0 || sr >= n || sc < 0 || sc >= n) {
            value = raster.channels == 3 ? kBackgroundColor[ch] : 0;
          } else {
            value = raster.at(sr, sc, ch);
          }
          rot.at(r, c, ch) = value;
        }
      }
    }
    stack.images.push_back(std::move(rot));
  }
  return stack;
}

void write_pnm(const Raster& raster, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pnm: cannot open " + path);
  out << (raster.channels == 3 ? "P6" : "P5") << ' ' << raster.width << ' '
      << raster.height << " 255\n";
  out.write(reinterpret_cast<const char*>(raster.pixels.data()),
            static_cast<std::streamsize>(raster.pixels.size()));
}

Raster read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pnm: cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if ((magic != "P5" && magic != "P6") || maxval != 255 || w <= 0 || h <= 0) {
    throw std::runtime_error("read_pnm: unsupported header in " + path);
  }
  in.get();  // single whitespace after header
  Raster raster;
  raster.width = w;
  raster.height = h;
  raster.channels = magic == "P6" ? 3 : 1;
  raster.pixels.resize(static_cast<std::size_t>(w) * h * raster.channels);
  in.read(reinterpret_cast<char*>(raster.pixels.data()),
          static_cast<std::streamsize>(raster.pixels.size()));
  if (!in) throw std::runtime_error("read_pnm: truncated file " + path);
  return raster;
}

}  // namespace aircloth
