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

#include <span>
#include <utility>

#include "consensus/autodiff/ops.hpp"

namespace consensus {

// Norms are plain sums of squares over every pixel and channel; batch
// averages divide by N = shape[0].

/// (1/N) sum ||y_i - x_i||^2
ad::Var loss_noise2clean(const ad::Var& y, const ad::Var& x);
/// (1/N) sum ||y1_i - target2_i||^2 with a noisy target.
ad::Var loss_noise2noise(const ad::Var& y1, const ad::Var& target2);

/// (1/N) sum { 1/2 ||y1 - r2||^2 + 1/2 ||y2 - r1||^2 - 1/4 ||y1 - y2||^2 }
///
/// Unbounded below per sample along y1 - y2 = const * (r1 - r2) directions;
/// training relies on batch averaging and weight decay for stability.
ad::Var loss_consensus(const ad::Var& y1, const ad::Var& y2, const ad::Var& r1, const ad::Var& r2);

/// (y1 + y2) / 2
ad::Var aggregate(const ad::Var& y1, const ad::Var& y2);

/// ||theta1||^2 + ||theta2||^2 over every slot of both parameter sets.
ad::Var loss_weight_decay(std::span<const ad::Var> theta1, std::span<const ad::Var> theta2);

/// (1/N) sum ||z_i - est_i||^2
ad::Var loss_consistency(const ad::Var& z, const ad::Var& est);

struct LossBreakdown {
  double consensus = 0.0;     // L_n (or the baseline objective)
  double weight_decay = 0.0;  // L_w
  double consistency = 0.0;   // L_r
  double total = 0.0;         // L
  double beta_w = 0.0;
  double beta_r = 0.0;
};

/// L = L_n + beta_w L_w + beta_r L_r. Rejects negative weights.
LossBreakdown loss_total(double l_n, double l_w, double l_r, double beta_w, double beta_r);

/// Differentiable counterpart of loss_total.
ad::Var loss_total(const ad::Var& l_n, const ad::Var& l_w, const ad::Var& l_r, double beta_w,
                   double beta_r);

/// Both sides of ||(y1+y2)/2 - x||^2 = 1/2||y1-x||^2 + 1/2||y2-x||^2 - 1/4||y1-y2||^2.
std::pair<double, double> factorization_identity(std::span<const double> y1,
                                                 std::span<const double> y2,
                                                 std::span<const double> x);

}  // namespace consensus
