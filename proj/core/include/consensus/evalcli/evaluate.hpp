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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "consensus/evalcli/metrics.hpp"
#include "consensus/losses/split_pair.hpp"
#include "consensus/trainer/trainer.hpp"

namespace consensus {

/// RMSE in HU (CT) or x1e-3 (MR), SSIM in percent. Summary std uses n-1.
struct MetricsRow {
  std::string method;
  std::vector<double> rmse;
  std::vector<double> ssim;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double ssim_mean = 0.0;
  double ssim_std = 0.0;
};

/// Scores outputs[i] against test[i].clean.
MetricsRow score_method(const std::string& method, std::span<const Image> outputs,
                        std::span<const SplitPair> test);

/// Trained models to compare. Null entries are skipped.
struct EvaluationModels {
  const TrainState* noise2noise = nullptr;
  const TrainState* consensus = nullptr;
  const TrainState* noise2clean = nullptr;
};

/// Rows in fixed order: input, noise2noise, consensus, noise2clean.
std::vector<MetricsRow> evaluate(const EvaluationModels& models, std::span<const SplitPair> test);

/// Columns: method,n,rmse_mean,rmse_std,ssim_mean,ssim_std,rmse_values,ssim_values
/// with per-slice values joined by ';'. Numbers use shortest round-trip form.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

struct Preview {
  std::string label;
  Image image;
};

/// Writes metrics.csv, metrics_info.txt (SSIM settings) and one PGM per
/// preview. CT previews use the liver window, MR previews the magnitude
/// scaled to [0, max] of the first preview.
void report(const std::filesystem::path& dir, std::span<const MetricsRow> rows, Modality modality,
            std::span<const Preview> previews);

}  // namespace consensus
