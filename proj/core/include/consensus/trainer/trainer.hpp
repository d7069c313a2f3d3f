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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "consensus/losses/losses.hpp"
#include "consensus/losses/split_pair.hpp"
#include "consensus/model/adam.hpp"
#include "consensus/model/unet.hpp"
#include "consensus/numerics/rng.hpp"

namespace consensus {

enum class Objective { kNoise2Clean, kNoise2Noise, kConsensus };

std::string_view to_string(Objective objective);
Objective objective_from_string(std::string_view text);

struct TrainConfig {
  std::size_t patch = 32;
  std::size_t batch = 8;
  std::size_t patches_per_slice = 40;
  std::size_t epochs = 20;
  double learning_rate = 1e-4;
  double beta_w = 0.0;
  double beta_r = 0.0;
  std::uint64_t seed = 0;
  Objective objective = Objective::kConsensus;
  UNetConfig model;
  /// Validation slices scored after every epoch (taken from the front).
  std::size_t validation_slices = 4;

  /// 96x96 patches, batch 40, 40 patches/slice, 100 epochs, lr 1e-4,
  /// beta_w = 5e-6, beta_r = 0.5, UNet base 32.
  static TrainConfig published_ct();
  /// As published_ct with beta_w = 1e-6, beta_r = 5, two channels, base 64.
  static TrainConfig published_mr();

  /// Throws ConfigError on violated invariants.
  void validate() const;
  /// FNV-1a over a canonical text rendering; identifies checkpoints.
  std::uint64_t hash() const;
};

/// Aligned windows cut from every image of a SplitPair.
struct PatchTuple {
  std::size_t row = 0;
  std::size_t col = 0;
  Image r1;
  Image r2;
  Image est;
  std::optional<Image> clean;
};

/// count patches of size x size at uniform in-bounds positions.
std::vector<PatchTuple> extract_patches(const SplitPair& pair, std::size_t size, std::size_t count, Rng& rng);

/// Parameters and optimizer state. theta2/adam2 exist only for consensus.
struct TrainState {
  ModelParams theta1;
  std::optional<ModelParams> theta2;
  AdamState adam1;
  std::optional<AdamState> adam2;
  std::size_t epoch = 0;
  Objective objective = Objective::kConsensus;
  std::uint64_t config_hash = 0;
  /// Mean |L_n| of the first epoch; reference for the divergence guard.
  std::optional<double> first_epoch_objective;
};

/// He-initialized networks seeded from cfg.seed.
TrainState init_state(const TrainConfig& config);

struct EpochStats {
  std::size_t epoch = 0;
  LossBreakdown mean;
  double val_rmse = 0.0;
  double val_ssim = 0.0;
};

/// One pass over freshly drawn patches. The epoch's patch positions and order
/// come from Rng(cfg.seed).fork(epoch + 1), so a resumed run replays exactly.
/// Throws NumericError on a non-finite loss (naming the batch) or when |L_n|
/// exceeds 1000x its first-epoch value.
EpochStats train_epoch(TrainState& state, const std::vector<SplitPair>& dataset, const TrainConfig& config);

/// Whole-image inference: (f(r1; theta1) + f(r2; theta2)) / 2 for consensus,
/// f(r1; theta) for the baselines.
Image denoise(const TrainState& state, const SplitPair& pair);

/// Tiled inference. Each tile's core region is evaluated inside a context
/// window grown by margin; offsets and sizes are snapped to 2^depth.
Image denoise_tiled(const TrainState& state, const SplitPair& pair, std::size_t tile, std::size_t margin);

struct TrainResult {
  TrainState state;
  std::vector<EpochStats> log;
};

using EpochCallback = std::function<void(const TrainState&, const EpochStats&)>;

/// Runs epochs state.epoch .. cfg.epochs-1 (from init_state unless resuming)
/// and scores validation RMSE/SSIM against clean references after each.
TrainResult train(const TrainConfig& config, const std::vector<SplitPair>& dataset,
                  const std::vector<SplitPair>& validation, std::optional<TrainState> resume = std::nullopt,
                  const EpochCallback& on_epoch = {});

/// Columns: epoch,L_n,L_w,L_r,L,val_rmse,val_ssim.
void write_training_log(std::ostream& out, const std::vector<EpochStats>& log);

/// Directory layout: theta1/theta2 parameter files, adam moment tensors and
/// checkpoint.txt with counters and the config hash.
void save_checkpoint(const std::filesystem::path& dir, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& dir);

}  // namespace consensus
