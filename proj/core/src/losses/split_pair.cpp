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

#include "consensus/losses/split_pair.hpp"

#include <cmath>
#include <stdexcept>

namespace consensus {

std::string_view to_string(Modality modality) { return modality == Modality::kCt ? "ct" : "mr"; }

Modality modality_from_string(std::string_view text) {
  if (text == "ct") return Modality::kCt;
  if (text == "mr") return Modality::kMr;
  throw std::invalid_argument("unknown modality '" + std::string(text) + "'");
}

Image Image::from_grid(const Grid2D& grid) {
  Image img(1, grid.height, grid.width, grid.unit);
  img.data = grid.data;
  return img;
}

Image Image::from_complex(const ComplexGrid2D& grid, Unit unit) {
  Image img(2, grid.height, grid.width, unit);
  const std::size_t p = grid.size();
  for (std::size_t i = 0; i < p; ++i) {
    img.data[i] = grid.data[i].real();
    img.data[p + i] = grid.data[i].imag();
  }
  return img;
}

Grid2D Image::channel(std::size_t c) const {
  if (c >= channels) throw std::out_of_range("Image::channel");
  const auto first = data.begin() + static_cast<std::ptrdiff_t>(c * pixels());
  return Grid2D(height, width, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(pixels())),
                unit);
}

ComplexGrid2D Image::to_complex() const {
  if (channels != 2) throw std::invalid_argument("Image::to_complex requires two channels");
  ComplexGrid2D out(height, width);
  const std::size_t p = pixels();
  for (std::size_t i = 0; i < p; ++i) out.data[i] = Complex(data[i], data[p + i]);
  return out;
}

Grid2D Image::magnitude() const {
  Grid2D out(height, width, unit);
  const std::size_t p = pixels();
  for (std::size_t i = 0; i < p; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) sum += data[c * p + i] * data[c * p + i];
    out.data[i] = std::sqrt(sum);
  }
  return out;
}

Image Image::crop(std::size_t row, std::size_t col, std::size_t size_h, std::size_t size_w) const {
  if (row + size_h > height || col + size_w > width) {
    throw std::out_of_range("Image::crop: window exceeds image bounds");
  }
  Image out(channels, size_h, size_w, unit);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < size_h; ++i) {
      const double* src = data.data() + c * pixels() + (row + i) * width + col;
      std::copy_n(src, size_w, out.data.data() + c * size_h * size_w + i * size_w);
    }
  }
  return out;
}

void SplitPair::validate() const {
  auto check = [&](const Image& img, const char* name) {
    if (!img.same_shape(r1) || img.unit != r1.unit) {
      throw std::invalid_argument(std::string("SplitPair: ") + name + " disagrees with r1 in shape or unit");
    }
  };
  check(r2, "r2");
  check(est, "est");
  if (clean) check(*clean, "clean");
  const std::size_t expected_channels = modality == Modality::kCt ? 1 : 2;
  if (r1.channels != expected_channels) {
    throw std::invalid_argument("SplitPair: channel count does not match modality");
  }
}

}  // namespace consensus
