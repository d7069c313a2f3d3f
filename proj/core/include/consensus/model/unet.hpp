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
#include <filesystem>
#include <string>
#include <vector>

#include "consensus/autodiff/ops.hpp"
#include "consensus/autodiff/tape.hpp"
#include "consensus/numerics/rng.hpp"

namespace consensus {

struct UNetConfig {
  /// Number of resolution levels; depth 1 is a plain two-conv network.
  std::size_t depth = 3;
  /// Feature maps at the finest level; doubles per level.
  std::size_t base_features = 16;
  /// 1 for CT, 2 for MR (real, imaginary).
  std::size_t in_channels = 1;
  std::size_t kernel = 3;
  ad::PoolMode pool = ad::PoolMode::kAverage;

  bool operator==(const UNetConfig&) const = default;
};

/// Full-scale presets. Desk scale is the UNetConfig default.
UNetConfig published_ct_preset();
UNetConfig published_mr_preset();

struct LayerSlot {
  std::string name;
  std::size_t offset = 0;
  ad::Shape shape;
  /// Fan-in for He initialization; 0 marks a bias.
  std::size_t fan_in = 0;

  std::size_t size() const { return ad::numel(shape); }
};

/// Flat parameter vector plus the table mapping it onto layers.
struct ModelParams {
  UNetConfig config;
  std::vector<double> theta;
  std::vector<LayerSlot> layout;

  std::size_t size() const { return theta.size(); }
};

/// Zero-initialized parameters for the given architecture.
/// Throws std::invalid_argument for depth 0, base 0, channels 0 or even kernels.
ModelParams build_unet(const UNetConfig& config);

/// Conv weights ~ N(0, 2/fan_in), biases 0.
void init_he(ModelParams& params, Rng& rng);

/// One tape parameter per layout slot.
struct BoundParams {
  std::vector<ad::Var> slots;
};

BoundParams bind(ad::Tape& tape, const ModelParams& params);
/// Flattens the slot gradients back into theta order (zeros where absent).
std::vector<double> gather_grad(const BoundParams& bound, std::size_t total);

/// Residual U-Net: x + net(x). x is [N, in_channels, H, W] with H and W
/// divisible by 2^depth.
ad::Var forward(const ModelParams& params, const BoundParams& bound, const ad::Var& x);

/// Forward-only evaluation on a non-recording tape.
std::vector<double> infer(const ModelParams& params, const ad::Shape& shape,
                          std::vector<double> input);

/// Writes <stem>.cndt (theta, f64) and <stem>.txt (key=value layout header).
void save_params(const std::filesystem::path& stem, const ModelParams& params);
ModelParams load_params(const std::filesystem::path& stem);

}  // namespace consensus
