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

#include "consensus/ct_sim/phantom.hpp"
#include "consensus/ct_sim/projector.hpp"
#include "consensus/losses/split_pair.hpp"

namespace consensus {

struct CtConfig {
  std::size_t grid = 128;
  std::size_t views = 360;
  /// 0 selects default_detector_count(grid).
  std::size_t detectors = 0;
  DoseModel dose;
  double fov_mm = 400.0;
  double mu_water_per_mm = 0.0192;

  std::size_t detector_count() const { return detectors ? detectors : default_detector_count(grid); }
  /// Water attenuation per pixel length.
  double mu_water_per_pixel() const { return mu_water_per_mm * fov_mm / static_cast<double>(grid); }
};

/// HU/1000 image -> attenuation per pixel: mu_w (1 + v).
Grid2D hu1000_to_attenuation(const Grid2D& image, const CtConfig& config);
/// Inverse of hu1000_to_attenuation.
Grid2D attenuation_to_hu1000(const Grid2D& mu, const CtConfig& config);

/// One phantom slice: the noiseless sinogram is computed once, noisy
/// acquisitions are drawn on demand.
class CtAcquisition {
 public:
  CtAcquisition(const Phantom& phantom, const CtConfig& config);

  /// r1 = FBP(first alternating half), r2 = FBP(second half),
  /// est = FBP(all noisy views), clean = FBP(noiseless all views), in HU/1000.
  SplitPair draw(Rng& rng) const;

  const Sinogram& noiseless_sinogram() const { return sinogram_; }
  const Grid2D& phantom_image() const { return image_; }
  /// FBP of the noiseless all-view sinogram (the clean reference).
  const Grid2D& clean() const { return clean_; }
  /// FBP of the noiseless half sinograms: the expectation of r1 / r2.
  const Grid2D& half_reference(int which) const { return which == 0 ? half_ref_[0] : half_ref_[1]; }
  const CtConfig& config() const { return config_; }

 private:
  CtConfig config_;
  Grid2D image_;
  Sinogram sinogram_;
  Grid2D clean_;
  Grid2D half_ref_[2];
};

SplitPair make_ct_splitpair(const Phantom& phantom, const CtConfig& config, Rng& rng);

}  // namespace consensus
