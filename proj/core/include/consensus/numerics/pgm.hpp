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

#include <cstdint>
#include <filesystem>

#include "consensus/numerics/grid.hpp"

namespace consensus {

/// Linear window mapping: lo -> 0, hi -> 255, clamped outside, rounded to nearest.
std::uint8_t window_to_byte(double value, double lo, double hi);

/// Writes an 8-bit binary PGM (P5, maxval 255) using window_to_byte.
void write_pgm(const std::filesystem::path& path, const Grid2D& grid, double lo, double hi);

}  // namespace consensus
