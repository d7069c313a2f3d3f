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

#include "consensus/numerics/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace consensus {

std::string_view to_string(Unit unit) {
  switch (unit) {
    case Unit::kHu1000:
      return "HU/1000";
    case Unit::kNormalized:
      return "normalized";
    case Unit::kDimensionless:
      return "dimensionless";
  }
  return "dimensionless";
}

Unit unit_from_string(std::string_view text) {
  if (text == "HU/1000") return Unit::kHu1000;
  if (text == "normalized") return Unit::kNormalized;
  if (text == "dimensionless") return Unit::kDimensionless;
  throw std::invalid_argument("unknown unit label '" + std::string(text) + "'");
}

Grid2D::Grid2D(std::size_t h, std::size_t w, std::vector<double> values, Unit u)
    : height(h), width(w), data(std::move(values)), unit(u) {
  if (data.size() != h * w) {
    throw std::invalid_argument("Grid2D: data length does not match height*width");
  }
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

bool all_finite(const Grid2D& grid) { return all_finite(std::span<const double>(grid.data)); }

bool all_finite(const ComplexGrid2D& grid) {
  return std::all_of(grid.data.begin(), grid.data.end(), [](const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

ComplexGrid2D to_complex(const Grid2D& grid) {
  ComplexGrid2D out(grid.height, grid.width);
  std::transform(grid.data.begin(), grid.data.end(), out.data.begin(),
                 [](double v) { return Complex(v, 0.0); });
  return out;
}

Grid2D real_part(const ComplexGrid2D& grid) {
  Grid2D out(grid.height, grid.width);
  std::transform(grid.data.begin(), grid.data.end(), out.data.begin(),
                 [](const Complex& c) { return c.real(); });
  return out;
}

Grid2D magnitude(const ComplexGrid2D& grid) {
  Grid2D out(grid.height, grid.width);
  std::transform(grid.data.begin(), grid.data.end(), out.data.begin(),
                 [](const Complex& c) { return std::abs(c); });
  return out;
}

}  // namespace consensus
