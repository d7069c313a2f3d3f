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
#include <optional>
#include <utility>
#include <vector>

#include "consensus/ct_sim/phantom.hpp"
#include "consensus/losses/split_pair.hpp"
#include "consensus/numerics/grid.hpp"
#include "consensus/numerics/rng.hpp"

namespace consensus {

/// K-space with phase-encode lines along rows, DC at row/column 0.
struct KSpace {
  ComplexGrid2D spectrum;
};

/// Phase-encode line selection in centered order (index lines/2 is DC).
struct SamplingMask {
  std::vector<bool> sampled;
  std::size_t center_keep = 0;
  /// Inclusion probability of each line outside the center block.
  double probability = 1.0;

  std::size_t lines() const { return sampled.size(); }
  std::size_t center_begin() const { return lines() / 2 - center_keep / 2; }
  bool is_center(std::size_t centered) const {
    return centered >= center_begin() && centered < center_begin() + center_keep;
  }
  std::size_t count() const;
  /// Sampled lines outside the center block.
  std::vector<std::size_t> random_lines() const;
};

/// Center block always sampled; every other line i.i.d. with probability
/// p = (lines/accel - center_keep) / (lines - center_keep).
/// Throws std::invalid_argument when center_keep >= lines or p < 0.
SamplingMask make_mask(std::size_t lines, double accel, std::size_t center_keep, Rng& rng);

/// Balanced disjoint split of the random-region lines (sizes differ by at most
/// one, the larger half assigned by coin flip); both halves keep the center
/// block and carry probability p/2.
std::pair<SamplingMask, SamplingMask> split_mask(const SamplingMask& mask, Rng& rng);

/// Zero-filled inverse FFT: center lines unscaled, sampled random-region lines
/// multiplied by amplify, all other lines zero. Throws for amplify <= 0.
ComplexGrid2D zero_fill_recon(const KSpace& k, const SamplingMask& mask, double amplify);

struct MrConfig {
  std::size_t grid = 128;
  double accel = 4.0;
  std::size_t center_keep = 16;
  /// Fixed amplification; unset means inverse probability 1/p per mask.
  std::optional<double> amplify;
};

/// Smooth low-order polynomial phase over the normalized [-1, 1]^2 grid.
struct PhaseField {
  double c0 = 0.0, cx = 0.0, cy = 0.0, cxy = 0.0, cxx = 0.0, cyy = 0.0;
  static PhaseField random(Rng& rng);
  double operator()(double x, double y) const {
    return c0 + cx * x + cy * y + cxy * x * y + cxx * x * x + cyy * y * y;
  }
};

ComplexGrid2D complex_phantom(const Phantom& magnitude, const PhaseField& phase, std::size_t n);

/// One MR slice: clean image and its k-space, undersampled on demand.
class MrAcquisition {
 public:
  MrAcquisition(const Phantom& magnitude, const PhaseField& phase, const MrConfig& config);

  /// mask4 = make_mask, (m1, m2) = split_mask(mask4), r1/r2/est are amplified
  /// zero-fills, clean is the phantom. Every image is multiplied by
  /// normalization_scale() so values lie in about [-1, 1].
  SplitPair draw(Rng& rng) const;

  /// 1 / max |center-lines-only reconstruction|. Depends only on the always
  /// acquired center block, so it is the same for every draw.
  double normalization_scale() const;

  const ComplexGrid2D& clean() const { return clean_; }
  const KSpace& kspace() const { return kspace_; }
  const MrConfig& config() const { return config_; }

 private:
  MrConfig config_;
  ComplexGrid2D clean_;
  KSpace kspace_;
};

SplitPair make_mr_splitpair(const Phantom& magnitude, const PhaseField& phase, const MrConfig& config,
                            Rng& rng);

}  // namespace consensus
