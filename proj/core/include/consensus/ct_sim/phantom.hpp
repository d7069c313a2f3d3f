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

#pragma once

#include <cstddef>
#include <vector>

#include "consensus/numerics/grid.hpp"
#include "consensus/numerics/rng.hpp"

namespace consensus {

/// Ellipse in normalized coordinates: the image spans [-1, 1] on both axes,
/// x to the right, y upward. angle is in radians, counter-clockwise.
struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double semi_x = 1.0;
  double semi_y = 1.0;
  double angle = 0.0;
  double value = 0.0;
};

struct Phantom {
  std::vector<Ellipse> ellipses;
  double background = 0.0;
};

/// background + sum of values of the ellipses containing each pixel center.
Grid2D rasterize(const Phantom& phantom, std::size_t height, std::size_t width,
                 Unit unit = Unit::kDimensionless);

/// Modified Shepp-Logan head phantom (Toft intensities, outer skull value 1).
Phantom shepp_logan();

/// Random abdomen-like slice in HU/1000: air background, fat and soft-tissue
/// body, liver with small lesions, kidneys, vessels and a vertebra.
Phantom random_abdomen_phantom(Rng& rng);

/// Random knee-like magnitude phantom with values in [0, 1].
Phantom random_knee_phantom(Rng& rng);

}  // namespace consensus
