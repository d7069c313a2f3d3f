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

#include "consensus/losses/split_pair.hpp"
#include "consensus/numerics/grid.hpp"

namespace consensus {

/// sqrt(mean((a - b)^2)), multiplied by 1000 for HU/1000 (result in HU) and
/// for normalized images (result in units of 1e-3).
double rmse(const Grid2D& a, const Grid2D& b, Unit unit);
/// Multi-channel variant: sqrt(mean over pixels of sum over channels of
/// (a - b)^2), i.e. complex modulus for MR. Same rescaling rule.
double rmse(const Image& a, const Image& b);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over all positions where the Gaussian window fits, times 100.
/// Throws std::invalid_argument when the window exceeds the image.
double ssim(const Grid2D& a, const Grid2D& b, const SsimOptions& options = {});

inline constexpr double kLiverWindowLowHu = -160.0;
inline constexpr double kLiverWindowHighHu = 240.0;

/// CT SSIM: both HU/1000 images clipped to the [-160, 240] HU window, shifted
/// to [0, 400], dynamic range 400.
double ssim_ct(const Grid2D& a, const Grid2D& reference);
/// MR SSIM on magnitudes with dynamic range max |reference|.
double ssim_mr(const Image& a, const Image& reference);

/// Modality-dispatching SSIM for single images.
double ssim_for(Modality modality, const Image& a, const Image& reference);

}  // namespace consensus
