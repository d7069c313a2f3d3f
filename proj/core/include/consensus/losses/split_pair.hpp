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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "consensus/numerics/grid.hpp"

namespace consensus {

enum class Modality { kCt, kMr };

std::string_view to_string(Modality modality);
Modality modality_from_string(std::string_view text);

/// Channel-planar real image. CT slices have one channel; MR slices carry the
/// real and imaginary parts as two channels.
struct Image {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;
  Unit unit = Unit::kDimensionless;

  Image() = default;
  Image(std::size_t c, std::size_t h, std::size_t w, Unit u = Unit::kDimensionless)
      : channels(c), height(h), width(w), data(c * h * w, 0.0), unit(u) {}

  static Image from_grid(const Grid2D& grid);
  static Image from_complex(const ComplexGrid2D& grid, Unit unit);

  std::size_t pixels() const { return height * width; }
  bool same_shape(const Image& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
  Grid2D channel(std::size_t c) const;
  /// Requires two channels.
  ComplexGrid2D to_complex() const;
  /// Per-pixel magnitude across channels (|v| for one channel).
  Grid2D magnitude() const;
  /// Copies the window [row, row+size) x [col, col+size) of every channel.
  Image crop(std::size_t row, std::size_t col, std::size_t size_h, std::size_t size_w) const;
};

/// Two independently reconstructed noisy realizations of one slice, the
/// consistency estimate, and (synthetic data only) the clean reference.
struct SplitPair {
  Image r1;
  Image r2;
  Image est;
  std::optional<Image> clean;
  Modality modality = Modality::kCt;
  std::map<std::string, std::string> meta;

  /// Throws std::invalid_argument when shapes or units disagree.
  void validate() const;
};

}  // namespace consensus
