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

#include "consensus/ct_sim/ct_pipeline.hpp"

#include <stdexcept>
#include <string>

namespace consensus {

Grid2D hu1000_to_attenuation(const Grid2D& image, const CtConfig& config) {
  Grid2D mu(image.height, image.width, Unit::kDimensionless);
  const double mw = config.mu_water_per_pixel();
  for (std::size_t i = 0; i < image.size(); ++i) mu.data[i] = mw * (1.0 + image.data[i]);
  return mu;
}

Grid2D attenuation_to_hu1000(const Grid2D& mu, const CtConfig& config) {
  Grid2D out(mu.height, mu.width, Unit::kHu1000);
  const double inv = 1.0 / config.mu_water_per_pixel();
  for (std::size_t i = 0; i < mu.size(); ++i) out.data[i] = mu.data[i] * inv - 1.0;
  return out;
}

CtAcquisition::CtAcquisition(const Phantom& phantom, const CtConfig& config) : config_(config) {
  if (config.views % 2 != 0) throw std::invalid_argument("CtConfig: views must be even");
  image_ = rasterize(phantom, config.grid, config.grid, Unit::kHu1000);
  sinogram_ = radon(hu1000_to_attenuation(image_, config), config.views, config.detector_count());
  clean_ = attenuation_to_hu1000(fbp_hann(sinogram_, config.grid), config);
  const auto [first, second] = split_odd_even(sinogram_);
  half_ref_[0] = attenuation_to_hu1000(fbp_hann(first, config.grid), config);
  half_ref_[1] = attenuation_to_hu1000(fbp_hann(second, config.grid), config);
}

SplitPair CtAcquisition::draw(Rng& rng) const {
  const Sinogram noisy = insert_noise(sinogram_, config_.dose, rng);
  const auto [first, second] = split_odd_even(noisy);
  const std::size_t n = config_.grid;
  SplitPair pair;
  pair.modality = Modality::kCt;
  pair.r1 = Image::from_grid(attenuation_to_hu1000(fbp_hann(first, n), config_));
  pair.r2 = Image::from_grid(attenuation_to_hu1000(fbp_hann(second, n), config_));
  pair.est = Image::from_grid(attenuation_to_hu1000(fbp_hann(noisy, n), config_));
  pair.clean = Image::from_grid(clean_);
  pair.meta = {{"modality", "ct"},
               {"views", std::to_string(config_.views)},
               {"detectors", std::to_string(config_.detector_count())},
               {"i0", std::to_string(config_.dose.i0)},
               {"dose", std::to_string(config_.dose.dose)},
               {"grid", std::to_string(n)}};
  return pair;
}

SplitPair make_ct_splitpair(const Phantom& phantom, const CtConfig& config, Rng& rng) {
  return CtAcquisition(phantom, config).draw(rng);
}

}  // namespace consensus
