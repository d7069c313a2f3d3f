/*
 * Copyright 2026 The Consensus Denoising Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "consensus/ct_sim/phantom.hpp"

#include <cmath>
#include <numbers>

namespace consensus {
namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

Grid2D rasterize(const Phantom& phantom, std::size_t height, std::size_t width, Unit unit) {
  Grid2D out(height, width, unit);
  std::fill(out.data.begin(), out.data.end(), phantom.background);
  for (const auto& e : phantom.ellipses) {
    const double c = std::cos(e.angle);
    const double s = std::sin(e.angle);
    for (std::size_t i = 0; i < height; ++i) {
      const double y = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(height);
      for (std::size_t j = 0; j < width; ++j) {
        const double x = (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(width) - 1.0;
        const double dx = x - e.cx;
        const double dy = y - e.cy;
        const double u = (dx * c + dy * s) / e.semi_x;
        const double v = (-dx * s + dy * c) / e.semi_y;
        if (u * u + v * v <= 1.0) out(i, j) += e.value;
      }
    }
  }
  return out;
}

Phantom shepp_logan() {
  constexpr double deg = std::numbers::pi / 180.0;
  Phantom p;
  p.ellipses = {
      {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
      {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
      {0.22, 0.0, 0.11, 0.31, -18.0 * deg, -0.2},
      {-0.22, 0.0, 0.16, 0.41, 18.0 * deg, -0.2},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
      {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
      {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
      {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
      {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},
      {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  };
  return p;
}

Phantom random_abdomen_phantom(Rng& rng) {
  Phantom p;
  p.background = -1.0;  // air
  const double body_x = uniform(rng, 0.72, 0.86);
  const double body_y = uniform(rng, 0.52, 0.66);
  const double tilt = uniform(rng, -0.08, 0.08);
  // Subcutaneous fat (-90 HU) around soft tissue (+40 HU).
  p.ellipses.push_back({0.0, 0.0, body_x, body_y, tilt, 0.91});
  const double fat = uniform(rng, 0.05, 0.1);
  p.ellipses.push_back({0.0, 0.0, body_x - fat, body_y - fat, tilt, 0.13});
  // Liver (+60 HU) with lesions.
  const double liver_cx = uniform(rng, -0.45, -0.25);
  const double liver_cy = uniform(rng, 0.0, 0.2);
  const double liver_a = uniform(rng, 0.22, 0.32);
  const double liver_b = uniform(rng, 0.2, 0.28);
  p.ellipses.push_back({liver_cx, liver_cy, liver_a, liver_b, uniform(rng, -0.5, 0.5), 0.02});
  const std::size_t lesions = 1 + rng.below(3);
  for (std::size_t k = 0; k < lesions; ++k) {
    const double r = uniform(rng, 0.025, 0.06);
    const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double rad = uniform(rng, 0.0, 0.55);
    p.ellipses.push_back({liver_cx + rad * liver_a * std::cos(ang), liver_cy + rad * liver_b * std::sin(ang),
                          r, r * uniform(rng, 0.8, 1.2), 0.0,
                          (rng.uniform() < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.03, 0.07)});
  }
  // Spleen / stomach region on the other side.
  p.ellipses.push_back({uniform(rng, 0.3, 0.45), uniform(rng, 0.05, 0.25), uniform(rng, 0.1, 0.16),
                        uniform(rng, 0.12, 0.2), uniform(rng, -0.6, 0.6), uniform(rng, -0.03, 0.03)});
  // Kidneys.
  const double ky = uniform(rng, -0.28, -0.18);
  for (double side : {-1.0, 1.0}) {
    p.ellipses.push_back({side * uniform(rng, 0.22, 0.3), ky, uniform(rng, 0.06, 0.09),
                          uniform(rng, 0.09, 0.12), side * uniform(rng, 0.2, 0.5), 0.12});
  }
  // Aorta and vena cava.
  p.ellipses.push_back({uniform(rng, 0.0, 0.06), -0.2, 0.045, 0.045, 0.0, uniform(rng, 0.1, 0.2)});
  p.ellipses.push_back({uniform(rng, -0.12, -0.06), -0.18, 0.05, 0.035, 0.0, uniform(rng, 0.05, 0.12)});
  // Vertebral body.
  p.ellipses.push_back({0.0, -body_y + fat + 0.14, 0.1, 0.09, 0.0, uniform(rng, 0.5, 0.8)});
  return p;
}

Phantom random_knee_phantom(Rng& rng) {
  Phantom p;
  p.background = 0.0;
  // Soft tissue envelope. Layer values are chosen so overlaps stay within [0, 1].
  p.ellipses.push_back({0.0, 0.0, uniform(rng, 0.65, 0.75), uniform(rng, 0.8, 0.9), uniform(rng, -0.1, 0.1), 0.3});
  // Femur and tibia with bright marrow separated by a cartilage gap.
  const double gap = uniform(rng, 0.04, 0.08);
  const double femur_w = uniform(rng, 0.32, 0.4);
  p.ellipses.push_back({0.0, 0.45 + gap, femur_w, 0.42, 0.0, 0.3});
  p.ellipses.push_back({0.0, 0.45 + gap, femur_w - 0.05, 0.37, 0.0, uniform(rng, 0.1, 0.2)});
  p.ellipses.push_back({0.0, -0.45 - gap, femur_w * 0.9, 0.42, 0.0, 0.25});
  p.ellipses.push_back({0.0, -0.45 - gap, femur_w * 0.9 - 0.05, 0.37, 0.0, uniform(rng, 0.1, 0.2)});
  // Cartilage strip.
  p.ellipses.push_back({0.0, gap * 0.5, femur_w * 0.8, 0.02, 0.0, uniform(rng, 0.05, 0.15)});
  // Patella, lateral to the femoral marrow.
  p.ellipses.push_back({uniform(rng, 0.5, 0.55), uniform(rng, 0.1, 0.25), 0.08, 0.16, 0.2, 0.25});
  // Ligaments and small fluid pockets.
  const std::size_t features = 2 + rng.below(4);
  for (std::size_t k = 0; k < features; ++k) {
    p.ellipses.push_back({uniform(rng, -0.4, 0.4), uniform(rng, -0.25, 0.25), uniform(rng, 0.015, 0.05),
                          uniform(rng, 0.04, 0.12), uniform(rng, -1.0, 1.0),
                          (rng.uniform() < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.05, 0.12)});
  }
  return p;
}

}  // namespace consensus
