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

#include "consensus/numerics/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace consensus {
namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

ComplexGrid2D transform2(const ComplexGrid2D& grid, int sign) {
  if (grid.height == 0 || grid.width == 0) {
    throw std::invalid_argument("fft2: height and width must be >= 1");
  }
  ComplexGrid2D in = grid;
  ComplexGrid2D out(grid.height, grid.width);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(grid.height), static_cast<int>(grid.width),
                            as_fftw(in.data.data()), as_fftw(out.data.data()), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

ComplexGrid2D fft2(const ComplexGrid2D& grid) { return transform2(grid, FFTW_FORWARD); }

ComplexGrid2D ifft2(const ComplexGrid2D& grid) {
  ComplexGrid2D out = transform2(grid, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(grid.height * grid.width);
  for (auto& v : out.data) v *= scale;
  return out;
}

struct Fft1d::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

Fft1d::Fft1d(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw std::invalid_argument("Fft1d: length must be >= 1");
  // Planned on scratch, executed on caller buffers (hence FFTW_UNALIGNED).
  fftw_complex* scratch = fftw_alloc_complex(n);
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, FFTW_FORWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->inverse = fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, FFTW_BACKWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
}

Fft1d::~Fft1d() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->inverse);
}

void Fft1d::forward(std::span<Complex> data) const {
  if (data.size() != n_) throw std::invalid_argument("Fft1d: length mismatch");
  fftw_execute_dft(plans_->forward, as_fftw(data.data()), as_fftw(data.data()));
}

void Fft1d::inverse(std::span<Complex> data) const {
  if (data.size() != n_) throw std::invalid_argument("Fft1d: length mismatch");
  fftw_execute_dft(plans_->inverse, as_fftw(data.data()), as_fftw(data.data()));
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

}  // namespace consensus
