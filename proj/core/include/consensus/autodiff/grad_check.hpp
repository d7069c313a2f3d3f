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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "consensus/autodiff/tape.hpp"

namespace consensus::ad {

struct GradInput {
  Shape shape;
  std::vector<double> values;
};

/// Builds a scalar loss from inputs that the checker registers as parameters.
using GraphBuilder = std::function<Var(Tape&, std::span<const Var> inputs)>;

struct GradCheckOptions {
  /// Step is h_scale * max(1, |coordinate|).
  double h_scale = 1e-6;
  double tolerance = 1e-5;
  /// 0 checks every coordinate; otherwise a seeded random subset per input.
  std::size_t max_coords_per_input = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  /// max |numeric - analytic| / max(1, |analytic|)
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t coords_checked = 0;
  bool passed = true;
};

/// Central-difference check of reverse-mode gradients.
GradCheckReport grad_check(const GraphBuilder& builder, const std::vector<GradInput>& point,
                           const GradCheckOptions& options = {});

}  // namespace consensus::ad
