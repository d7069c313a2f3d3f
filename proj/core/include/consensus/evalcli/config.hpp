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
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "consensus/ct_sim/ct_pipeline.hpp"
#include "consensus/losses/split_pair.hpp"
#include "consensus/mr_sim/mr_pipeline.hpp"
#include "consensus/trainer/trainer.hpp"

namespace consensus {

/// Every key accepted by parse_config.
std::span<const std::string_view> config_keys();
std::span<const std::string_view> required_config_keys();

/// Validated key/value experiment description. Getters throw ConfigError on
/// malformed values; missing optional keys fall back to the supplied default.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  explicit ExperimentConfig(std::map<std::string, std::string> values);

  const std::map<std::string, std::string>& values() const { return values_; }
  bool has(std::string_view key) const;

  std::string get_string(std::string_view key, std::string_view fallback = {}) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback = 0) const;
  std::size_t get_size(std::string_view key, std::size_t fallback = 0) const;
  double get_double(std::string_view key, double fallback = 0.0) const;

  /// Overrides or inserts a key after checking it against the whitelist.
  void set(std::string_view key, std::string value);

  Modality modality() const;
  std::uint64_t seed() const { return get_u64("seed"); }
  std::size_t slices_train() const { return get_size("slices_train", 200); }
  std::size_t slices_test() const { return get_size("slices_test", 40); }

 private:
  std::map<std::string, std::string> values_;
};

/// One `key = value` per line, `#` starts a comment. Unknown and duplicate
/// keys are rejected; all missing required keys are reported together.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

CtConfig ct_config(const ExperimentConfig& config);
/// amplify_mode is "inverse_probability" (default) or a positive number.
MrConfig mr_config(const ExperimentConfig& config);
/// Desk defaults overridden by the config; regularization weights default to
/// the modality's published values and the channel count follows the modality.
TrainConfig train_config(const ExperimentConfig& config);

}  // namespace consensus
