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

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace consensus {

enum class Unit { kHu1000, kNormalized, kDimensionless };

std::string_view to_string(Unit unit);
Unit unit_from_string(std::string_view text);

/// Dense row-major 2-D array of real samples.
struct Grid2D {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;
  Unit unit = Unit::kDimensionless;

  Grid2D() = default;
  Grid2D(std::size_t h, std::size_t w, Unit u = Unit::kDimensionless)
      : height(h), width(w), data(h * w, 0.0), unit(u) {}
  Grid2D(std::size_t h, std::size_t w, std::vector<double> values,
         Unit u = Unit::kDimensionless);

  std::size_t size() const { return data.size(); }
  double& operator()(std::size_t row, std::size_t col) { return data[row * width + col]; }
  double operator()(std::size_t row, std::size_t col) const { return data[row * width + col]; }
  bool same_shape(const Grid2D& other) const {
    return height == other.height && width == other.width;
  }
};

using Complex = std::complex<double>;

/// Dense row-major 2-D array of complex samples.
struct ComplexGrid2D {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Complex> data;

  ComplexGrid2D() = default;
  ComplexGrid2D(std::size_t h, std::size_t w) : height(h), width(w), data(h * w) {}

  std::size_t size() const { return data.size(); }
  Complex& operator()(std::size_t row, std::size_t col) { return data[row * width + col]; }
  const Complex& operator()(std::size_t row, std::size_t col) const {
    return data[row * width + col];
  }
  bool same_shape(const ComplexGrid2D& other) const {
    return height == other.height && width == other.width;
  }
};

bool all_finite(std::span<const double> values);
bool all_finite(const Grid2D& grid);
bool all_finite(const ComplexGrid2D& grid);

ComplexGrid2D to_complex(const Grid2D& grid);
Grid2D real_part(const ComplexGrid2D& grid);
Grid2D magnitude(const ComplexGrid2D& grid);

}  // namespace consensus
