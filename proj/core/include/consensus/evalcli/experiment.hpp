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

#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "consensus/evalcli/config.hpp"
#include "consensus/evalcli/dataset.hpp"
#include "consensus/evalcli/evaluate.hpp"
#include "consensus/trainer/trainer.hpp"

namespace consensus {

struct ExperimentOutcome {
  std::vector<MetricsRow> rows;
  TrainResult noise2noise;
  TrainResult consensus;
  TrainResult noise2clean;
};

using ExperimentProgress = std::function<void(std::string_view method, const EpochStats&)>;

/// Baseline config derived from the consensus config: same seed and schedule,
/// no regularization.
TrainConfig baseline_config(const TrainConfig& consensus, Objective objective);

/// Trains noise2noise, consensus and noise2clean on corpus.train, validates
/// on the head of corpus.test, and scores all methods on corpus.test. When
/// out_dir is set, training logs, checkpoints and the report land there.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const Corpus& corpus,
                                 const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                                 const ExperimentProgress& progress = {});

}  // namespace consensus
