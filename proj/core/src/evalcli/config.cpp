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

#include "consensus/evalcli/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "consensus/numerics/error.hpp"

namespace consensus {
namespace {

constexpr std::array<std::string_view, 23> kKeys = {
    "modality", "grid",  "views",  "detectors", "i0",     "dose",   "accel",   "center_keep",
    "amplify_mode", "slices_train", "slices_test", "seed", "depth", "base_features", "patch", "batch",
    "patches_per_slice", "epochs", "lr", "beta_w", "beta_r", "objective", "out_dir"};

constexpr std::array<std::string_view, 3> kRequired = {"modality", "grid", "seed"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool known(std::string_view key) { return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end(); }

template <typename T>
T parse_number(std::string_view key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + text + "'");
  }
  return value;
}

}  // namespace

std::span<const std::string_view> config_keys() { return kKeys; }
std::span<const std::string_view> required_config_keys() { return kRequired; }

ExperimentConfig::ExperimentConfig(std::map<std::string, std::string> values) : values_(std::move(values)) {
  for (const auto& [key, value] : values_) {
    if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
  }
}

bool ExperimentConfig::has(std::string_view key) const { return values_.count(std::string(key)) != 0; }

std::string ExperimentConfig::get_string(std::string_view key, std::string_view fallback) const {
  const auto it = values_.find(std::string(key));
  return it == values_.end() ? std::string(fallback) : it->second;
}

std::uint64_t ExperimentConfig::get_u64(std::string_view key, std::uint64_t fallback) const {
  const auto it = values_.find(std::string(key));
  return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
}

std::size_t ExperimentConfig::get_size(std::string_view key, std::size_t fallback) const {
  const auto it = values_.find(std::string(key));
  return it == values_.end() ? fallback : parse_number<std::size_t>(key, it->second);
}

double ExperimentConfig::get_double(std::string_view key, double fallback) const {
  const auto it = values_.find(std::string(key));
  return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

void ExperimentConfig::set(std::string_view key, std::string value) {
  if (!known(key)) throw ConfigError("unknown config key '" + std::string(key) + "'");
  values_[std::string(key)] = std::move(value);
}

Modality ExperimentConfig::modality() const {
  try {
    return modality_from_string(get_string("modality"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> values;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    }
    if (!known(key)) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!values.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  std::vector<std::string> missing;
  for (auto key : kRequired) {
    if (!values.count(std::string(key))) missing.emplace_back(key);
  }
  if (!missing.empty()) {
    std::string msg = "missing required config keys:";
    for (const auto& k : missing) msg += " " + k;
    throw ConfigError(msg);
  }
  ExperimentConfig config(std::move(values));
  config.modality();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

CtConfig ct_config(const ExperimentConfig& config) {
  CtConfig ct;
  ct.grid = config.get_size("grid", ct.grid);
  ct.views = config.get_size("views", ct.views);
  ct.detectors = config.get_size("detectors", ct.detectors);
  ct.dose.i0 = config.get_double("i0", ct.dose.i0);
  ct.dose.dose = config.get_double("dose", ct.dose.dose);
  if (ct.grid < 8) throw ConfigError("grid must be at least 8");
  if (ct.views < 2 || ct.views % 2 != 0) throw ConfigError("views must be even and at least 2");
  if (!(ct.dose.i0 > 0.0) || !(ct.dose.dose > 0.0)) throw ConfigError("i0 and dose must be positive");
  return ct;
}

MrConfig mr_config(const ExperimentConfig& config) {
  MrConfig mr;
  mr.grid = config.get_size("grid", mr.grid);
  mr.accel = config.get_double("accel", mr.accel);
  mr.center_keep = config.get_size("center_keep", mr.center_keep);
  const std::string mode = config.get_string("amplify_mode", "inverse_probability");
  if (mode != "inverse_probability") {
    const double factor = parse_number<double>("amplify_mode", mode);
    if (!(factor > 0.0)) throw ConfigError("amplify_mode factor must be positive");
    mr.amplify = factor;
  }
  if (mr.grid < 8) throw ConfigError("grid must be at least 8");
  if (!(mr.accel >= 1.0)) throw ConfigError("accel must be >= 1");
  if (mr.accel > 1.0 && mr.center_keep >= mr.grid) throw ConfigError("center_keep must be below grid");
  const double expected = static_cast<double>(mr.grid) / mr.accel;
  if (mr.accel > 1.0 && expected < static_cast<double>(mr.center_keep)) {
    throw ConfigError("center_keep exceeds the line budget grid/accel");
  }
  return mr;
}

TrainConfig train_config(const ExperimentConfig& config) {
  const Modality modality = config.modality();
  const TrainConfig published = modality == Modality::kCt ? TrainConfig::published_ct() : TrainConfig::published_mr();
  TrainConfig t;
  t.model.in_channels = modality == Modality::kCt ? 1 : 2;
  t.model.depth = config.get_size("depth", t.model.depth);
  t.model.base_features = config.get_size("base_features", t.model.base_features);
  t.patch = config.get_size("patch", t.patch);
  t.batch = config.get_size("batch", t.batch);
  t.patches_per_slice = config.get_size("patches_per_slice", t.patches_per_slice);
  t.epochs = config.get_size("epochs", t.epochs);
  t.learning_rate = config.get_double("lr", t.learning_rate);
  t.beta_w = config.get_double("beta_w", published.beta_w);
  t.beta_r = config.get_double("beta_r", published.beta_r);
  t.seed = config.seed();
  t.objective = objective_from_string(config.get_string("objective", "consensus"));
  if (t.model.depth == 0 || t.model.base_features == 0) throw ConfigError("depth and base_features must be positive");
  t.validate();
  if (t.patch > config.get_size("grid")) throw ConfigError("patch larger than grid");
  return t;
}

}  // namespace consensus
