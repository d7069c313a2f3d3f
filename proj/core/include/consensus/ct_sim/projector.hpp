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
#include <utility>
#include <vector>

#include "consensus/numerics/grid.hpp"
#include "consensus/numerics/rng.hpp"

namespace consensus {

/// Parallel-beam sinogram. Lengths are in pixel units; data holds line
/// integrals in row-major [view][detector] order.
struct Sinogram {
  std::size_t views = 0;
  std::size_t detectors = 0;
  double detector_spacing = 1.0;
  std::vector<double> angles;
  std::vector<double> data;

  double& at(std::size_t view, std::size_t det) { return data[view * detectors + det]; }
  double at(std::size_t view, std::size_t det) const { return data[view * detectors + det]; }
  /// Signed detector coordinate of bin d (zero at the array center).
  double detector_offset(std::size_t d) const {
    return (static_cast<double>(d) - 0.5 * static_cast<double>(detectors - 1)) * detector_spacing;
  }
};

/// Smallest odd detector count covering the diagonal of an n x n image at unit spacing.
std::size_t default_detector_count(std::size_t n);

/// Uniform angles pi * v / views over [0, pi).
std::vector<double> uniform_angles(std::size_t views);

/// Ray-driven line integrals through a square image with bilinear
/// interpolation and half-pixel steps. Throws for non-square images or
/// views/detectors < 1.
Sinogram radon(const Grid2D& image, std::size_t views, std::size_t detectors,
               double detector_spacing = 1.0);
/// Same projector over caller-supplied angles.
Sinogram radon(const Grid2D& image, const std::vector<double>& angles, std::size_t detectors,
               double detector_spacing = 1.0);

/// Exact adjoint of radon: <radon(x), y> = <x, radon_adjoint(y)>.
Grid2D radon_adjoint(const Sinogram& sino, std::size_t n);

/// Incident photon count per ray and dose factor in (0, 1].
struct DoseModel {
  double i0 = 1e5;
  double dose = 0.25;
};

/// Transmission Poisson noise: k ~ Poisson(d I0 exp(-p)), k >= 1,
/// p' = -ln(k / (d I0)).
Sinogram insert_noise(const Sinogram& sino, const DoseModel& dose, Rng& rng);

/// Alternating-view split: views {0, 2, 4, ...} and {1, 3, 5, ...}.
/// Requires an even number of views.
std::pair<Sinogram, Sinogram> split_odd_even(const Sinogram& sino);

/// Ramp x Hann frequency response for a zero-padded length. The ramp is the
/// transform of the band-limited spatial ramp kernel; the apodization is
/// 0.5 (1 + cos(pi f / f_N)).
std::vector<double> ramp_hann_response(std::size_t padded_length, double detector_spacing);

/// Filtered backprojection of a parallel-beam sinogram onto an n x n grid
/// with angular weight pi / views. Linear in the sinogram data. Throws when
/// the detector array does not cover the image diagonal.
Grid2D fbp_hann(const Sinogram& sino, std::size_t n);

}  // namespace consensus
