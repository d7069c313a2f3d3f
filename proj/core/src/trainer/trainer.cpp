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

#include "consensus/trainer/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "consensus/evalcli/metrics.hpp"
#include "consensus/numerics/error.hpp"
#include "consensus/numerics/tensor_io.hpp"

namespace consensus {
namespace {

constexpr double kDivergenceFactor = 1e3;

std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_exact(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw IoError("checkpoint: cannot parse number '" + s + "'");
  return v;
}

struct PatchRef {
  std::size_t slice;
  std::size_t row;
  std::size_t col;
};

// Copies the window of one image into slot n of a [N, C, p, p] buffer.
void copy_window(const Image& img, std::size_t row, std::size_t col, std::size_t p, double* dst) {
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t i = 0; i < p; ++i) {
      const double* src = img.data.data() + c * img.pixels() + (row + i) * img.width + col;
      std::copy_n(src, p, dst + (c * p + i) * p);
    }
  }
}

double sum_squares(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

Image run_network(const ModelParams& params, const Image& input) {
  Image out = input;
  out.data = infer(params, {1, input.channels, input.height, input.width}, input.data);
  return out;
}

void save_adam(const std::filesystem::path& dir, const std::string& name, const AdamState& s) {
  const auto n = static_cast<std::uint32_t>(s.first_moment.size());
  save_tensor(dir / (name + "_m.cndt"), make_f64_record({n}, s.first_moment));
  save_tensor(dir / (name + "_v.cndt"), make_f64_record({n}, s.second_moment));
}

AdamState load_adam(const std::filesystem::path& dir, const std::string& name,
                    const std::map<std::string, std::string>& kv) {
  AdamState s;
  s.first_moment = record_to_f64(load_tensor(dir / (name + "_m.cndt")));
  s.second_moment = record_to_f64(load_tensor(dir / (name + "_v.cndt")));
  auto get = [&](const std::string& key) {
    const auto it = kv.find(name + "." + key);
    if (it == kv.end()) throw IoError("checkpoint: missing key '" + name + "." + key + "'");
    return it->second;
  };
  s.step = std::stoull(get("step"));
  s.learning_rate = parse_exact(get("learning_rate"));
  s.beta1 = parse_exact(get("beta1"));
  s.beta2 = parse_exact(get("beta2"));
  s.epsilon = parse_exact(get("epsilon"));
  return s;
}

}  // namespace

std::string_view to_string(Objective objective) {
  switch (objective) {
    case Objective::kNoise2Clean:
      return "noise2clean";
    case Objective::kNoise2Noise:
      return "noise2noise";
    case Objective::kConsensus:
      return "consensus";
  }
  return "consensus";
}

Objective objective_from_string(std::string_view text) {
  if (text == "noise2clean") return Objective::kNoise2Clean;
  if (text == "noise2noise") return Objective::kNoise2Noise;
  if (text == "consensus") return Objective::kConsensus;
  throw ConfigError("unknown objective '" + std::string(text) + "'");
}

TrainConfig TrainConfig::published_ct() {
  TrainConfig c;
  c.patch = 96;
  c.batch = 40;
  c.patches_per_slice = 40;
  c.epochs = 100;
  c.learning_rate = 1e-4;
  c.beta_w = 5e-6;
  c.beta_r = 0.5;
  c.model = published_ct_preset();
  return c;
}

TrainConfig TrainConfig::published_mr() {
  TrainConfig c = published_ct();
  c.beta_w = 1e-6;
  c.beta_r = 5.0;
  c.model = published_mr_preset();
  return c;
}

void TrainConfig::validate() const {
  if (patch == 0 || batch == 0 || patches_per_slice == 0) {
    throw ConfigError("patch, batch and patches_per_slice must be positive");
  }
  const std::size_t factor = std::size_t{1} << model.depth;
  if (patch % factor != 0) {
    throw ConfigError("patch size " + std::to_string(patch) + " is not divisible by 2^depth = " +
                      std::to_string(factor));
  }
  if (beta_w < 0.0 || beta_r < 0.0) throw ConfigError("beta_w and beta_r must be non-negative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

std::uint64_t TrainConfig::hash() const {
  std::ostringstream s;
  s << "patch=" << patch << ";batch=" << batch << ";pps=" << patches_per_slice << ";lr=" << exact(learning_rate)
    << ";beta_w=" << exact(beta_w) << ";beta_r=" << exact(beta_r) << ";seed=" << seed
    << ";objective=" << to_string(objective) << ";depth=" << model.depth << ";base=" << model.base_features
    << ";channels=" << model.in_channels << ";kernel=" << model.kernel
    << ";pool=" << (model.pool == ad::PoolMode::kMax ? "max" : "avg");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<PatchTuple> extract_patches(const SplitPair& pair, std::size_t size, std::size_t count, Rng& rng) {
  if (size == 0 || size > pair.r1.height || size > pair.r1.width) {
    throw std::invalid_argument("extract_patches: patch does not fit in the slice");
  }
  std::vector<PatchTuple> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    PatchTuple t;
    t.row = static_cast<std::size_t>(rng.below(pair.r1.height - size + 1));
    t.col = static_cast<std::size_t>(rng.below(pair.r1.width - size + 1));
    t.r1 = pair.r1.crop(t.row, t.col, size, size);
    t.r2 = pair.r2.crop(t.row, t.col, size, size);
    t.est = pair.est.crop(t.row, t.col, size, size);
    if (pair.clean) t.clean = pair.clean->crop(t.row, t.col, size, size);
    out.push_back(std::move(t));
  }
  return out;
}

TrainState init_state(const TrainConfig& config) {
  config.validate();
  TrainState state;
  state.objective = config.objective;
  state.config_hash = config.hash();
  Rng rng = Rng(config.seed).fork(0);
  state.theta1 = build_unet(config.model);
  init_he(state.theta1, rng);
  state.adam1 = AdamState::zeros(state.theta1.size(), config.learning_rate);
  if (config.objective == Objective::kConsensus) {
    state.theta2 = build_unet(config.model);
    init_he(*state.theta2, rng);
    state.adam2 = AdamState::zeros(state.theta2->size(), config.learning_rate);
  }
  return state;
}

EpochStats train_epoch(TrainState& state, const std::vector<SplitPair>& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("train_epoch: empty dataset");
  const bool consensus = config.objective == Objective::kConsensus;
  if (config.objective != state.objective) throw ConfigError("train_epoch: objective differs from state");
  if (consensus && !state.theta2) throw ConfigError("train_epoch: consensus state lacks theta2");
  const Image& first = dataset.front().r1;
  const std::size_t channels = first.channels;
  if (channels != config.model.in_channels) throw ConfigError("train_epoch: channel count differs from model");
  for (const auto& pair : dataset) {
    pair.validate();
    if (!pair.r1.same_shape(first)) throw std::invalid_argument("train_epoch: slices differ in shape");
    if (config.objective == Objective::kNoise2Clean && !pair.clean) {
      throw ConfigError("noise2clean training needs clean references");
    }
  }

  Rng rng = Rng(config.seed).fork(state.epoch + 1);
  std::vector<PatchRef> refs;
  refs.reserve(dataset.size() * config.patches_per_slice);
  const std::size_t p = config.patch;
  if (p > first.height || p > first.width) throw ConfigError("patch larger than slice");
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    for (std::size_t k = 0; k < config.patches_per_slice; ++k) {
      const auto row = static_cast<std::size_t>(rng.below(first.height - p + 1));
      const auto col = static_cast<std::size_t>(rng.below(first.width - p + 1));
      refs.push_back({s, row, col});
    }
  }
  shuffle(refs, rng);

  const std::size_t per_sample = channels * p * p;
  LossBreakdown sums;
  double abs_objective = 0.0;
  std::size_t batches = 0;
  for (std::size_t begin = 0; begin < refs.size(); begin += config.batch, ++batches) {
    const std::size_t n = std::min(config.batch, refs.size() - begin);
    const ad::Shape shape{n, channels, p, p};
    std::vector<double> r1(n * per_sample), r2(n * per_sample), est(n * per_sample), clean;
    if (config.objective == Objective::kNoise2Clean) clean.resize(n * per_sample);
    for (std::size_t i = 0; i < n; ++i) {
      const PatchRef& ref = refs[begin + i];
      const SplitPair& pair = dataset[ref.slice];
      copy_window(pair.r1, ref.row, ref.col, p, r1.data() + i * per_sample);
      copy_window(pair.r2, ref.row, ref.col, p, r2.data() + i * per_sample);
      copy_window(pair.est, ref.row, ref.col, p, est.data() + i * per_sample);
      if (!clean.empty()) copy_window(*pair.clean, ref.row, ref.col, p, clean.data() + i * per_sample);
    }

    ad::Tape tape;
    const BoundParams bound1 = bind(tape, state.theta1);
    const ad::Var x1 = tape.constant(shape, std::move(r1));
    const ad::Var x2 = tape.constant(shape, std::move(r2));
    const ad::Var y1 = forward(state.theta1, bound1, x1);
    LossBreakdown parts;
    ad::Var total;
    BoundParams bound2;
    if (consensus) {
      bound2 = bind(tape, *state.theta2);
      const ad::Var y2 = forward(*state.theta2, bound2, x2);
      const ad::Var l_n = loss_consensus(y1, y2, x1, x2);
      const ad::Var l_w = loss_weight_decay(bound1.slots, bound2.slots);
      const ad::Var l_r = loss_consistency(aggregate(y1, y2), tape.constant(shape, std::move(est)));
      total = loss_total(l_n, l_w, l_r, config.beta_w, config.beta_r);
      parts = loss_total(l_n.item(), l_w.item(), l_r.item(), config.beta_w, config.beta_r);
    } else {
      const ad::Var target = config.objective == Objective::kNoise2Noise ? x2 : tape.constant(shape, std::move(clean));
      total = config.objective == Objective::kNoise2Noise ? loss_noise2noise(y1, target) : loss_noise2clean(y1, target);
      parts = loss_total(total.item(), sum_squares(state.theta1.theta), 0.0, 0.0, 0.0);
    }
    if (!std::isfinite(total.item())) {
      throw NumericError("non-finite loss at epoch " + std::to_string(state.epoch) + ", batch " +
                         std::to_string(batches));
    }
    tape.backward(total);
    adam_step(state.theta1, gather_grad(bound1, state.theta1.size()), state.adam1);
    if (consensus) adam_step(*state.theta2, gather_grad(bound2, state.theta2->size()), *state.adam2);

    sums.consensus += parts.consensus;
    sums.weight_decay += parts.weight_decay;
    sums.consistency += parts.consistency;
    sums.total += parts.total;
    abs_objective += std::fabs(parts.consensus);
  }

  EpochStats stats;
  stats.epoch = state.epoch;
  const double inv = 1.0 / static_cast<double>(batches);
  stats.mean = {sums.consensus * inv, sums.weight_decay * inv, sums.consistency * inv, sums.total * inv,
                consensus ? config.beta_w : 0.0, consensus ? config.beta_r : 0.0};
  abs_objective *= inv;
  if (!state.first_epoch_objective) {
    state.first_epoch_objective = abs_objective;
  } else if (abs_objective > kDivergenceFactor * *state.first_epoch_objective) {
    throw NumericError("training diverged at epoch " + std::to_string(state.epoch) + ": mean |L_n| " +
                       exact(abs_objective) + " exceeds 1000x the first-epoch value " +
                       exact(*state.first_epoch_objective));
  }
  state.epoch += 1;
  return stats;
}

Image denoise(const TrainState& state, const SplitPair& pair) {
  if (state.objective != Objective::kConsensus) return run_network(state.theta1, pair.r1);
  const Image y1 = run_network(state.theta1, pair.r1);
  const Image y2 = run_network(*state.theta2, pair.r2);
  Image z = y1;
  for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] = 0.5 * (y1.data[i] + y2.data[i]);
  return z;
}

Image denoise_tiled(const TrainState& state, const SplitPair& pair, std::size_t tile, std::size_t margin) {
  const std::size_t f = std::size_t{1} << state.theta1.config.depth;
  if (tile == 0 || tile % f != 0) throw std::invalid_argument("denoise_tiled: tile must be a multiple of 2^depth");
  const Image& r1 = pair.r1;
  Image out(r1.channels, r1.height, r1.width, r1.unit);
  auto snap_down = [f](std::size_t v) { return v / f * f; };
  auto snap_up = [f](std::size_t v, std::size_t limit) { return std::min(limit, (v + f - 1) / f * f); };
  for (std::size_t row = 0; row < r1.height; row += tile) {
    for (std::size_t col = 0; col < r1.width; col += tile) {
      const std::size_t row_end = std::min(row + tile, r1.height);
      const std::size_t col_end = std::min(col + tile, r1.width);
      const std::size_t r0 = snap_down(row > margin ? row - margin : 0);
      const std::size_t c0 = snap_down(col > margin ? col - margin : 0);
      const std::size_t r_hi = snap_up(row_end + margin, r1.height);
      const std::size_t c_hi = snap_up(col_end + margin, r1.width);
      SplitPair window;
      window.modality = pair.modality;
      window.r1 = pair.r1.crop(r0, c0, r_hi - r0, c_hi - c0);
      window.r2 = pair.r2.crop(r0, c0, r_hi - r0, c_hi - c0);
      const Image z = denoise(state, window);
      for (std::size_t c = 0; c < out.channels; ++c) {
        for (std::size_t i = row; i < row_end; ++i) {
          for (std::size_t j = col; j < col_end; ++j) {
            out.data[c * out.pixels() + i * out.width + j] = z.data[c * z.pixels() + (i - r0) * z.width + (j - c0)];
          }
        }
      }
    }
  }
  return out;
}

TrainResult train(const TrainConfig& config, const std::vector<SplitPair>& dataset,
                  const std::vector<SplitPair>& validation, std::optional<TrainState> resume,
                  const EpochCallback& on_epoch) {
  config.validate();
  TrainResult result;
  if (resume) {
    if (resume->config_hash != config.hash()) {
      throw ConfigError("checkpoint was written with a different training configuration");
    }
    result.state = std::move(*resume);
  } else {
    result.state = init_state(config);
  }
  const std::size_t scored = std::min(config.validation_slices, validation.size());
  while (result.state.epoch < config.epochs) {
    EpochStats stats = train_epoch(result.state, dataset, config);
    if (scored > 0) {
      double rmse_sum = 0.0, ssim_sum = 0.0;
      for (std::size_t s = 0; s < scored; ++s) {
        const SplitPair& pair = validation[s];
        if (!pair.clean) throw ConfigError("validation slices need clean references");
        const Image z = denoise(result.state, pair);
        rmse_sum += rmse(z, *pair.clean);
        ssim_sum += ssim_for(pair.modality, z, *pair.clean);
      }
      stats.val_rmse = rmse_sum / static_cast<double>(scored);
      stats.val_ssim = ssim_sum / static_cast<double>(scored);
    }
    result.log.push_back(stats);
    if (on_epoch) on_epoch(result.state, stats);
  }
  return result;
}

void write_training_log(std::ostream& out, const std::vector<EpochStats>& log) {
  out << "epoch,L_n,L_w,L_r,L,val_rmse,val_ssim\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << exact(e.mean.consensus) << ',' << exact(e.mean.weight_decay) << ','
        << exact(e.mean.consistency) << ',' << exact(e.mean.total) << ',' << exact(e.val_rmse) << ','
        << exact(e.val_ssim) << '\n';
  }
}

void save_checkpoint(const std::filesystem::path& dir, const TrainState& state) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory '" + dir.string() + "': " + ec.message());
  save_params(dir / "theta1", state.theta1);
  save_adam(dir, "adam1", state.adam1);
  if (state.theta2) {
    save_params(dir / "theta2", *state.theta2);
    save_adam(dir, "adam2", *state.adam2);
  }
  std::ofstream out(dir / "checkpoint.txt", std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint header in '" + dir.string() + "'");
  out << "objective=" << to_string(state.objective) << '\n'
      << "epoch=" << state.epoch << '\n'
      << "config_hash=" << state.config_hash << '\n';
  if (state.first_epoch_objective) out << "first_epoch_objective=" << exact(*state.first_epoch_objective) << '\n';
  auto adam_lines = [&](const std::string& name, const AdamState& s) {
    out << name << ".step=" << s.step << '\n'
        << name << ".learning_rate=" << exact(s.learning_rate) << '\n'
        << name << ".beta1=" << exact(s.beta1) << '\n'
        << name << ".beta2=" << exact(s.beta2) << '\n'
        << name << ".epsilon=" << exact(s.epsilon) << '\n';
  };
  adam_lines("adam1", state.adam1);
  if (state.adam2) adam_lines("adam2", *state.adam2);
  if (!out) throw IoError("write failed for checkpoint header in '" + dir.string() + "'");
}

TrainState load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "checkpoint.txt");
  if (!in) throw IoError("no checkpoint.txt in '" + dir.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IoError("checkpoint: missing key '" + key + "'");
    return it->second;
  };
  TrainState state;
  try {
    state.objective = objective_from_string(get("objective"));
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
  state.epoch = std::stoul(get("epoch"));
  state.config_hash = std::stoull(get("config_hash"));
  if (kv.count("first_epoch_objective")) state.first_epoch_objective = parse_exact(kv["first_epoch_objective"]);
  state.theta1 = load_params(dir / "theta1");
  state.adam1 = load_adam(dir, "adam1", kv);
  if (state.objective == Objective::kConsensus) {
    state.theta2 = load_params(dir / "theta2");
    state.adam2 = load_adam(dir, "adam2", kv);
  }
  return state;
}

}  // namespace consensus
