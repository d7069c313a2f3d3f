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
#include <memory>
#include <span>

#include "consensus/numerics/grid.hpp"

namespace consensus {

// Convention: unnormalized forward transform, 1/(H*W) on the inverse, DC at
// index (0, 0).

ComplexGrid2D fft2(const ComplexGrid2D& grid);
ComplexGrid2D ifft2(const ComplexGrid2D& grid);

/// Maps an index in centered order (DC in the middle, at n/2) to DFT order.
inline std::size_t centered_to_dft(std::size_t centered, std::size_t n) {
  return (centered + n - n / 2) % n;
}
/// Inverse of centered_to_dft.
inline std::size_t dft_to_centered(std::size_t dft, std::size_t n) {
  return (dft + n / 2) % n;
}

/// Reusable 1-D complex transform of fixed length, same normalization as fft2.
class Fft1d {
 public:
  explicit Fft1d(std::size_t n);
  ~Fft1d();
  Fft1d(const Fft1d&) = delete;
  Fft1d& operator=(const Fft1d&) = delete;

  std::size_t size() const { return n_; }
  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace consensus
