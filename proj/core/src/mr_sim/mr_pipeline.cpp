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

#include "consensus/mr_sim/mr_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "consensus/numerics/fft.hpp"

namespace consensus {

std::size_t SamplingMask::count() const {
  return static_cast<std::size_t>(std::count(sampled.begin(), sampled.end(), true));
}

std::vector<std::size_t> SamplingMask::random_lines() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < lines(); ++i) {
    if (sampled[i] && !is_center(i)) out.push_back(i);
  }
  return out;
}

SamplingMask make_mask(std::size_t lines, double accel, std::size_t center_keep, Rng& rng) {
  if (lines == 0) throw std::invalid_argument("make_mask: no lines");
  if (!(accel >= 1.0)) throw std::invalid_argument("make_mask: acceleration must be >= 1");
  if (center_keep >= lines && accel > 1.0) {
    throw std::invalid_argument("make_mask: center_keep must be smaller than the line count");
  }
  SamplingMask mask;
  mask.sampled.assign(lines, false);
  mask.center_keep = std::min(center_keep, lines);
  const double target = static_cast<double>(lines) / accel;
  const double random_region = static_cast<double>(lines - mask.center_keep);
  const double p = random_region > 0.0 ? (target - static_cast<double>(mask.center_keep)) / random_region : 1.0;
  if (p < 0.0) {
    throw std::invalid_argument("make_mask: acceleration " + std::to_string(accel) + " cannot keep " +
                                std::to_string(center_keep) + " center lines of " + std::to_string(lines));
  }
  mask.probability = std::min(p, 1.0);
  for (std::size_t i = 0; i < lines; ++i) {
    if (mask.is_center(i)) {
      mask.sampled[i] = true;
    } else {
      // Always draw so the stream position does not depend on p.
      mask.sampled[i] = rng.uniform() < mask.probability;
    }
  }
  return mask;
}

std::pair<SamplingMask, SamplingMask> split_mask(const SamplingMask& mask, Rng& rng) {
  auto random = mask.random_lines();
  shuffle(random, rng);
  const bool first_gets_extra = rng.uniform() < 0.5;
  const std::size_t first_count = (random.size() + (first_gets_extra ? 1 : 0)) / 2;
  SamplingMask a, b;
  for (SamplingMask* m : {&a, &b}) {
    m->sampled.assign(mask.lines(), false);
    m->center_keep = mask.center_keep;
    m->probability = 0.5 * mask.probability;
    for (std::size_t i = m->center_begin(); i < m->center_begin() + m->center_keep; ++i) m->sampled[i] = true;
  }
  for (std::size_t i = 0; i < random.size(); ++i) {
    (i < first_count ? a : b).sampled[random[i]] = true;
  }
  return {std::move(a), std::move(b)};
}

ComplexGrid2D zero_fill_recon(const KSpace& k, const SamplingMask& mask, double amplify) {
  if (!(amplify > 0.0)) throw std::invalid_argument("zero_fill_recon: amplify must be positive");
  const auto& spec = k.spectrum;
  if (mask.lines() != spec.height) throw std::invalid_argument("zero_fill_recon: mask/k-space size mismatch");
  ComplexGrid2D masked(spec.height, spec.width);
  for (std::size_t row = 0; row < spec.height; ++row) {
    const std::size_t c = dft_to_centered(row, spec.height);
    double factor = 0.0;
    if (mask.is_center(c)) {
      factor = 1.0;
    } else if (mask.sampled[c]) {
      factor = amplify;
    }
    if (factor == 0.0) continue;
    for (std::size_t col = 0; col < spec.width; ++col) masked(row, col) = factor * spec(row, col);
  }
  return ifft2(masked);
}

PhaseField PhaseField::random(Rng& rng) {
  auto u = [&](double a) { return a * (2.0 * rng.uniform() - 1.0); };
  PhaseField f;
  f.c0 = u(3.14159);
  f.cx = u(0.8);
  f.cy = u(0.8);
  f.cxy = u(0.4);
  f.cxx = u(0.4);
  f.cyy = u(0.4);
  return f;
}

ComplexGrid2D complex_phantom(const Phantom& magnitude, const PhaseField& phase, std::size_t n) {
  const Grid2D mag = rasterize(magnitude, n, n);
  ComplexGrid2D out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(n) - 1.0;
      out(i, j) = std::polar(mag(i, j), phase(x, y));
    }
  }
  return out;
}

MrAcquisition::MrAcquisition(const Phantom& magnitude, const PhaseField& phase, const MrConfig& config)
    : config_(config), clean_(complex_phantom(magnitude, phase, config.grid)) {
  kspace_.spectrum = fft2(clean_);
}

double MrAcquisition::normalization_scale() const {
  SamplingMask center_only;
  center_only.sampled.assign(config_.grid, false);
  center_only.center_keep = std::min(config_.center_keep, config_.grid);
  for (std::size_t i = 0; i < config_.grid; ++i) center_only.sampled[i] = center_only.is_center(i);
  const ComplexGrid2D low = zero_fill_recon(kspace_, center_only, 1.0);
  double peak = 0.0;
  for (const auto& v : low.data) peak = std::max(peak, std::abs(v));
  return peak > 0.0 ? 1.0 / peak : 1.0;
}

SplitPair MrAcquisition::draw(Rng& rng) const {
  const SamplingMask mask4 = make_mask(config_.grid, config_.accel, config_.center_keep, rng);
  const auto [m1, m2] = split_mask(mask4, rng);
  auto amplify_for = [&](const SamplingMask& m) {
    if (config_.amplify) return *config_.amplify;
    return m.probability > 0.0 ? 1.0 / m.probability : 1.0;
  };
  ComplexGrid2D r1 = zero_fill_recon(kspace_, m1, amplify_for(m1));
  ComplexGrid2D r2 = zero_fill_recon(kspace_, m2, amplify_for(m2));
  ComplexGrid2D est = zero_fill_recon(kspace_, mask4, amplify_for(mask4));
  const double scale = normalization_scale();

  auto to_image = [&](const ComplexGrid2D& g) {
    Image img = Image::from_complex(g, Unit::kNormalized);
    for (auto& v : img.data) v *= scale;
    return img;
  };
  SplitPair pair;
  pair.modality = Modality::kMr;
  pair.r1 = to_image(r1);
  pair.r2 = to_image(r2);
  pair.est = to_image(est);
  pair.clean = to_image(clean_);
  pair.meta = {{"modality", "mr"},
               {"grid", std::to_string(config_.grid)},
               {"accel", std::to_string(config_.accel)},
               {"center_keep", std::to_string(config_.center_keep)},
               {"sampled_lines", std::to_string(mask4.count())},
               {"scale", std::to_string(scale)}};
  return pair;
}

SplitPair make_mr_splitpair(const Phantom& magnitude, const PhaseField& phase, const MrConfig& config,
                            Rng& rng) {
  return MrAcquisition(magnitude, phase, config).draw(rng);
}

}  // namespace consensus
