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

#include "consensus/model/unet.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "consensus/numerics/error.hpp"
#include "consensus/numerics/tensor_io.hpp"

namespace consensus {
namespace {

void add_conv(ModelParams& params, const std::string& name, std::size_t cin, std::size_t cout,
              std::size_t k) {
  const std::size_t offset = params.theta.size();
  params.layout.push_back({name + ".w", offset, {cout, cin, k, k}, cin * k * k});
  params.layout.push_back({name + ".b", offset + cout * cin * k * k, {cout}, 0});
  params.theta.resize(offset + cout * cin * k * k + cout, 0.0);
}

std::size_t features_at(const UNetConfig& c, std::size_t level) { return c.base_features << level; }

std::string shape_to_string(const ad::Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

}  // namespace

UNetConfig published_ct_preset() { return {4, 32, 1, 3, ad::PoolMode::kAverage}; }
UNetConfig published_mr_preset() { return {4, 64, 2, 3, ad::PoolMode::kAverage}; }

ModelParams build_unet(const UNetConfig& config) {
  if (config.depth == 0) throw std::invalid_argument("build_unet: depth must be >= 1");
  if (config.base_features == 0 || config.in_channels == 0) {
    throw std::invalid_argument("build_unet: feature and channel counts must be positive");
  }
  if (config.kernel % 2 == 0) throw std::invalid_argument("build_unet: kernel must be odd");
  ModelParams params;
  params.config = config;
  const std::size_t k = config.kernel;
  for (std::size_t level = 0; level < config.depth; ++level) {
    const std::size_t cin = level == 0 ? config.in_channels : features_at(config, level - 1);
    const std::size_t f = features_at(config, level);
    const std::string name = "enc" + std::to_string(level);
    add_conv(params, name + ".conv0", cin, f, k);
    add_conv(params, name + ".conv1", f, f, k);
  }
  for (std::size_t level = config.depth - 1; level-- > 0;) {
    const std::size_t f = features_at(config, level);
    const std::string name = "dec" + std::to_string(level);
    add_conv(params, name + ".conv0", features_at(config, level + 1) + f, f, k);
    add_conv(params, name + ".conv1", f, f, k);
  }
  add_conv(params, "head", config.base_features, config.in_channels, 1);
  return params;
}

void init_he(ModelParams& params, Rng& rng) {
  for (const auto& slot : params.layout) {
    double* dst = params.theta.data() + slot.offset;
    if (slot.fan_in == 0) {
      std::fill(dst, dst + slot.size(), 0.0);
      continue;
    }
    const double sigma = std::sqrt(2.0 / static_cast<double>(slot.fan_in));
    for (std::size_t i = 0; i < slot.size(); ++i) dst[i] = sigma * rng.normal();
  }
}

BoundParams bind(ad::Tape& tape, const ModelParams& params) {
  BoundParams bound;
  bound.slots.reserve(params.layout.size());
  for (const auto& slot : params.layout) {
    const auto first = params.theta.begin() + static_cast<std::ptrdiff_t>(slot.offset);
    bound.slots.push_back(tape.parameter(
        slot.shape, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(slot.size()))));
  }
  return bound;
}

std::vector<double> gather_grad(const BoundParams& bound, std::size_t total) {
  std::vector<double> out;
  out.reserve(total);
  for (const auto& v : bound.slots) {
    const auto g = v.grad();
    if (g.empty()) {
      out.insert(out.end(), v.size(), 0.0);
    } else {
      out.insert(out.end(), g.begin(), g.end());
    }
  }
  if (out.size() != total) throw std::logic_error("gather_grad: layout does not cover theta");
  return out;
}

ad::Var forward(const ModelParams& params, const BoundParams& bound, const ad::Var& x) {
  const auto& c = params.config;
  const auto& s = x.shape();
  if (s.size() != 4 || s[1] != c.in_channels) {
    throw std::invalid_argument("forward: expected [N," + std::to_string(c.in_channels) + ",H,W]");
  }
  const std::size_t factor = std::size_t{1} << c.depth;
  if (s[2] % factor != 0 || s[3] % factor != 0) {
    throw std::invalid_argument("forward: spatial dims must be divisible by 2^depth = " +
                                std::to_string(factor));
  }
  if (bound.slots.size() != params.layout.size()) {
    throw std::invalid_argument("forward: bound parameters do not match layout");
  }
  std::size_t slot = 0;
  auto conv_relu = [&](const ad::Var& in) {
    const ad::Var& w = bound.slots[slot++];
    const ad::Var& b = bound.slots[slot++];
    return ad::relu(ad::conv2d(in, w, b));
  };

  std::vector<ad::Var> skips;
  ad::Var h = x;
  for (std::size_t level = 0; level < c.depth; ++level) {
    h = conv_relu(conv_relu(h));
    if (level + 1 < c.depth) {
      skips.push_back(h);
      h = ad::pool2(h, c.pool);
    }
  }
  for (std::size_t level = c.depth - 1; level-- > 0;) {
    h = ad::concat_channels(ad::upsample2(h), skips[level]);
    h = conv_relu(conv_relu(h));
  }
  const ad::Var correction = ad::conv2d(h, bound.slots[slot], bound.slots[slot + 1]);
  return ad::add(x, correction);
}

std::vector<double> infer(const ModelParams& params, const ad::Shape& shape,
                          std::vector<double> input) {
  ad::Tape tape(false);
  const auto bound = bind(tape, params);
  const auto x = tape.constant(shape, std::move(input));
  const auto y = forward(params, bound, x);
  return {y.value().begin(), y.value().end()};
}

void save_params(const std::filesystem::path& stem, const ModelParams& params) {
  auto data_path = stem;
  data_path += ".cndt";
  auto header_path = stem;
  header_path += ".txt";
  save_tensor(data_path, make_f64_record({static_cast<std::uint32_t>(params.size())}, params.theta));
  std::ofstream out(header_path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + header_path.string() + "' for writing");
  const auto& c = params.config;
  out << "depth=" << c.depth << '\n'
      << "base_features=" << c.base_features << '\n'
      << "in_channels=" << c.in_channels << '\n'
      << "kernel=" << c.kernel << '\n'
      << "pool=" << (c.pool == ad::PoolMode::kMax ? "max" : "average") << '\n'
      << "param_count=" << params.size() << '\n';
  for (const auto& slot : params.layout) {
    out << "layer." << slot.name << '=' << slot.offset << ':' << shape_to_string(slot.shape) << '\n';
  }
  if (!out) throw IoError("write failed for '" + header_path.string() + "'");
}

ModelParams load_params(const std::filesystem::path& stem) {
  auto data_path = stem;
  data_path += ".cndt";
  auto header_path = stem;
  header_path += ".txt";
  std::ifstream in(header_path);
  if (!in) throw IoError("cannot open '" + header_path.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> std::size_t {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IoError(header_path.string() + ": missing key '" + key + "'");
    return std::stoul(it->second);
  };
  UNetConfig c;
  c.depth = get("depth");
  c.base_features = get("base_features");
  c.in_channels = get("in_channels");
  c.kernel = get("kernel");
  c.pool = kv["pool"] == "max" ? ad::PoolMode::kMax : ad::PoolMode::kAverage;
  ModelParams params = build_unet(c);
  if (get("param_count") != params.size()) {
    throw IoError(header_path.string() + ": param_count does not match architecture");
  }
  for (const auto& slot : params.layout) {
    const auto it = kv.find("layer." + slot.name);
    const std::string expected = std::to_string(slot.offset) + ":" + shape_to_string(slot.shape);
    if (it == kv.end() || it->second != expected) {
      throw IoError(header_path.string() + ": layout mismatch at " + slot.name);
    }
  }
  const auto record = load_tensor(data_path);
  auto theta = record_to_f64(record);
  if (theta.size() != params.size()) {
    throw IoError(data_path.string() + ": parameter count does not match header");
  }
  params.theta = std::move(theta);
  return params;
}

}  // namespace consensus
