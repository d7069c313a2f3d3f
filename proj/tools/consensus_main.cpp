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

// Command-line front end: corpus simulation, training, inference, evaluation
// and the verification utilities.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "consensus/autodiff/grad_check.hpp"
#include "consensus/ct_sim/ct_pipeline.hpp"
#include "consensus/ct_sim/phantom.hpp"
#include "consensus/evalcli/config.hpp"
#include "consensus/evalcli/dataset.hpp"
#include "consensus/evalcli/evaluate.hpp"
#include "consensus/evalcli/experiment.hpp"
#include "consensus/losses/losses.hpp"
#include "consensus/numerics/error.hpp"
#include "consensus/numerics/tensor_io.hpp"
#include "consensus/theorem_lab/theorem_lab.hpp"
#include "consensus/trainer/trainer.hpp"

namespace fs = std::filesystem;
using namespace consensus;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct ConfigArgs {
  std::string path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig load_with_overrides(const ConfigArgs& args) {
  ExperimentConfig cfg = load_config(args.path);
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  return cfg;
}

fs::path output_dir(const ConfigArgs& args, const ExperimentConfig& cfg) {
  if (!args.out.empty()) return args.out;
  if (cfg.has("out_dir")) return cfg.get_string("out_dir");
  throw ConfigError("no output directory: pass --out or set out_dir");
}

Corpus corpus_for(const std::string& corpus_dir, const ExperimentConfig& cfg) {
  if (!corpus_dir.empty()) {
    Corpus c = read_corpus(corpus_dir);
    if (c.modality != cfg.modality()) throw ConfigError("corpus modality differs from the config");
    return c;
  }
  std::cerr << "simulating " << cfg.slices_train() << " + " << cfg.slices_test() << " slices\n";
  return simulate_corpus(cfg);
}

void print_epoch(std::string_view method, const EpochStats& s) {
  std::printf("%-12.*s epoch %3zu  L_n %.6g  L_w %.6g  L_r %.6g  L %.6g  val_rmse %.3f  val_ssim %.2f\n",
              static_cast<int>(method.size()), method.data(), s.epoch, s.mean.consensus, s.mean.weight_decay,
              s.mean.consistency, s.mean.total, s.val_rmse, s.val_ssim);
  std::fflush(stdout);
}

void print_rows(const std::vector<MetricsRow>& rows, Modality modality) {
  const char* unit = modality == Modality::kCt ? "HU" : "1e-3";
  std::printf("%-12s %22s %18s\n", "method", (std::string("RMSE (") + unit + ")").c_str(), "SSIM (%)");
  for (const auto& r : rows) {
    std::printf("%-12s %12.3f +- %6.3f %9.2f +- %5.2f\n", r.method.c_str(), r.rmse_mean, r.rmse_std, r.ssim_mean,
                r.ssim_std);
  }
}

void save_image(const fs::path& path, const Image& img) {
  if (img.channels == 2) {
    save_complex_grid(path, img.to_complex());
  } else {
    save_grid(path, img.channel(0));
  }
}

int run_simulate(const ConfigArgs& args, Modality expected) {
  const ExperimentConfig cfg = load_with_overrides(args);
  if (cfg.modality() != expected) {
    throw ConfigError(std::string("config modality is not ") + (expected == Modality::kCt ? "ct" : "mr"));
  }
  const fs::path out = output_dir(args, cfg);
  const Corpus corpus = simulate_corpus(cfg);
  write_corpus(out, corpus, cfg);
  std::printf("wrote %zu training and %zu test slices to %s\n", corpus.train.size(), corpus.test.size(),
              out.string().c_str());
  return 0;
}

struct TrainArgs {
  ConfigArgs config;
  std::string corpus;
  std::string objective;
  std::string resume;
};

int run_train(const TrainArgs& args) {
  ExperimentConfig cfg = load_with_overrides(args.config);
  if (!args.objective.empty()) cfg.set("objective", args.objective);
  const fs::path out = output_dir(args.config, cfg);
  TrainConfig tc = train_config(cfg);
  if (tc.objective != Objective::kConsensus) tc = baseline_config(tc, tc.objective);
  const Corpus corpus = corpus_for(args.corpus, cfg);
  std::optional<TrainState> resume;
  if (!args.resume.empty()) resume = load_checkpoint(args.resume);

  const fs::path ckpt = out / "checkpoint";
  const std::string name(to_string(tc.objective));
  const TrainResult result = train(tc, corpus.train, corpus.test, std::move(resume),
                                   [&](const TrainState& state, const EpochStats& stats) {
                                     print_epoch(name, stats);
                                     save_checkpoint(ckpt, state);
                                   });
  save_checkpoint(ckpt, result.state);
  std::ofstream log(out / "train_log.csv");
  write_training_log(log, result.log);
  if (!log) throw IoError("cannot write " + (out / "train_log.csv").string());
  std::printf("checkpoint: %s\n", ckpt.string().c_str());
  return 0;
}

struct DenoiseArgs {
  std::string checkpoint;
  std::string corpus;
  std::string split = "test";
  std::string out;
  std::size_t tile = 0;
  std::size_t margin = 16;
};

int run_denoise(const DenoiseArgs& args) {
  const TrainState state = load_checkpoint(args.checkpoint);
  const Corpus corpus = read_corpus(args.corpus);
  if (args.split != "test" && args.split != "train") throw ConfigError("--split must be train or test");
  const auto& slices = args.split == "test" ? corpus.test : corpus.train;
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) throw IoError("cannot create '" + args.out + "': " + ec.message());
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const Image y = args.tile ? denoise_tiled(state, slices[i], args.tile, args.margin) : denoise(state, slices[i]);
    char name[32];
    std::snprintf(name, sizeof name, "%04zu_denoised.cndt", i);
    save_image(fs::path(args.out) / name, y);
  }
  std::printf("denoised %zu slices into %s\n", slices.size(), args.out.c_str());
  return 0;
}

struct EvaluateArgs {
  std::string corpus;
  std::string noise2noise;
  std::string consensus;
  std::string noise2clean;
  std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
  const Corpus corpus = read_corpus(args.corpus);
  std::optional<TrainState> n2n, cons, n2c;
  if (!args.noise2noise.empty()) n2n = load_checkpoint(args.noise2noise);
  if (!args.consensus.empty()) cons = load_checkpoint(args.consensus);
  if (!args.noise2clean.empty()) n2c = load_checkpoint(args.noise2clean);
  EvaluationModels models{n2n ? &*n2n : nullptr, cons ? &*cons : nullptr, n2c ? &*n2c : nullptr};
  const auto rows = evaluate(models, corpus.test);
  print_rows(rows, corpus.modality);
  if (!args.out.empty()) {
    std::vector<Preview> previews;
    if (!corpus.test.empty()) {
      const SplitPair& first = corpus.test.front();
      if (first.clean) previews.push_back({"reference", *first.clean});
      previews.push_back({"input", first.est});
      if (n2n) previews.push_back({"noise2noise", denoise(*n2n, first)});
      if (cons) previews.push_back({"consensus", denoise(*cons, first)});
      if (n2c) previews.push_back({"noise2clean", denoise(*n2c, first)});
    }
    report(args.out, rows, corpus.modality, previews);
  }
  return 0;
}

struct TheoremArgs {
  std::vector<std::size_t> sizes{100, 1000, 10000, 100000, 1000000};
  std::size_t trials = 50;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::string csv;
  std::size_t cross_term = 0;
  std::size_t grid = 64;
  std::size_t views = 180;
};

int run_verify_theorem(const TheoremArgs& args) {
  const ConvergenceTable table = convergence_experiment(args.sizes, args.trials, args.sigma, Rng(args.seed));
  std::printf("%10s %16s %16s\n", "N", "median gap", "median theta_c");
  for (std::size_t i = 0; i < table.sizes.size(); ++i) {
    std::printf("%10zu %16.6e %16.6f\n", table.sizes[i], table.median_gap[i], table.median_theta_c[i]);
  }
  std::printf("log-log slope %.4f (square-root rate: -0.5)\n", table.slope);
  if (!args.csv.empty()) {
    std::ofstream out(args.csv);
    write_convergence_csv(out, table);
    if (!out) throw IoError("cannot write " + args.csv);
  }
  if (args.cross_term > 0) {
    CtConfig cfg;
    cfg.grid = args.grid;
    cfg.views = args.views;
    Rng rng(args.seed);
    const CtAcquisition acq(random_abdomen_phantom(rng), cfg);
    UNetConfig net_cfg;
    net_cfg.depth = 2;
    net_cfg.base_features = 8;
    ModelParams net = build_unet(net_cfg);
    init_he(net, rng);
    const CrossTermProbe probe = cross_term_probe(ct_split_generator(acq), net, args.cross_term, rng);
    std::printf("cross term 2 n2.y over %zu draws: %.6e +- %.3e (z = %.2f)\n", probe.samples, probe.estimate,
                probe.standard_error, probe.z_score());
  }
  return 0;
}

struct GradArgs {
  std::size_t depth = 3;
  std::size_t base = 16;
  std::size_t size = 16;
  std::size_t coords = 0;
  std::uint64_t seed = 0;
  double tolerance = 1e-5;
};

int run_gradcheck(const GradArgs& args) {
  UNetConfig cfg;
  cfg.depth = args.depth;
  cfg.base_features = args.base;
  ModelParams net = build_unet(cfg);
  Rng rng(args.seed);
  init_he(net, rng);
  std::vector<ad::GradInput> point;
  for (const auto& slot : net.layout) {
    std::vector<double> v(net.theta.begin() + static_cast<std::ptrdiff_t>(slot.offset),
                          net.theta.begin() + static_cast<std::ptrdiff_t>(slot.offset + slot.size()));
    // Zero biases would hide their own gradient path; give them small values.
    if (slot.fan_in == 0) {
      for (auto& b : v) b = 0.2 * rng.uniform() - 0.1;
    }
    point.push_back({slot.shape, std::move(v)});
  }
  const ad::Shape shape{1, 1, args.size, args.size};
  point.push_back({shape, gaussian(rng, args.size * args.size, 1.0)});
  const auto target = gaussian(rng, args.size * args.size, 1.0);
  ad::GradCheckOptions opt;
  opt.max_coords_per_input = args.coords;
  opt.seed = args.seed;
  opt.tolerance = args.tolerance;
  const auto rep = ad::grad_check(
      [&](ad::Tape& tape, std::span<const ad::Var> in) {
        BoundParams bound{{in.begin(), in.end() - 1}};
        return loss_noise2clean(forward(net, bound, in.back()), tape.constant(shape, target));
      },
      point, opt);
  std::printf("checked %zu coordinates, max relative error %.3e (tolerance %.1e)\n", rep.coords_checked,
              rep.max_rel_error, args.tolerance);
  if (!rep.passed) {
    throw NumericError("gradient check failed at input " + std::to_string(rep.worst_input) + ", index " +
                       std::to_string(rep.worst_index));
  }
  return 0;
}

struct ReportArgs {
  ConfigArgs config;
  std::string corpus;
};

int run_report(const ReportArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args.config);
  const fs::path out = output_dir(args.config, cfg);
  const Corpus corpus = corpus_for(args.corpus, cfg);
  const ExperimentOutcome outcome = run_experiment(cfg, corpus, out, print_epoch);
  print_rows(outcome.rows, corpus.modality);
  std::printf("report written to %s\n", out.string().c_str());
  return 0;
}

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.path, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("-o,--out", args.out, "output directory (defaults to out_dir)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus-loss denoising: simulators, training and evaluation"};
  app.require_subcommand(1);

  ConfigArgs sim_ct, sim_mr;
  add_config_options(app.add_subcommand("simulate-ct", "simulate a CT split-pair corpus"), sim_ct);
  add_config_options(app.add_subcommand("simulate-mr", "simulate an MR split-pair corpus"), sim_mr);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train one objective and write a checkpoint");
  add_config_options(train_cmd, train_args.config);
  train_cmd->add_option("--corpus", train_args.corpus, "corpus directory (simulated from the config if absent)");
  train_cmd->add_option("--objective", train_args.objective, "consensus, noise2noise or noise2clean");
  train_cmd->add_option("--resume", train_args.resume, "checkpoint directory to continue from");

  DenoiseArgs den;
  auto* den_cmd = app.add_subcommand("denoise", "apply a checkpoint to a corpus split");
  den_cmd->add_option("--checkpoint", den.checkpoint)->required();
  den_cmd->add_option("--corpus", den.corpus)->required();
  den_cmd->add_option("--split", den.split, "train or test");
  den_cmd->add_option("-o,--out", den.out)->required();
  den_cmd->add_option("--tile", den.tile, "tile size for tiled inference (0: whole image)");
  den_cmd->add_option("--margin", den.margin, "context margin around each tile");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "score checkpoints on the test split");
  ev_cmd->add_option("--corpus", ev.corpus)->required();
  ev_cmd->add_option("--noise2noise", ev.noise2noise, "checkpoint directory");
  ev_cmd->add_option("--consensus", ev.consensus, "checkpoint directory");
  ev_cmd->add_option("--noise2clean", ev.noise2clean, "checkpoint directory");
  ev_cmd->add_option("-o,--out", ev.out, "write metrics.csv and previews here");

  TheoremArgs th;
  auto* th_cmd = app.add_subcommand("verify-theorem", "scalar-model convergence table and cross-term probe");
  th_cmd->add_option("--sizes", th.sizes, "sample sizes N (comma separated)")->delimiter(',');
  th_cmd->add_option("--trials", th.trials);
  th_cmd->add_option("--sigma", th.sigma);
  th_cmd->add_option("--seed", th.seed);
  th_cmd->add_option("--csv", th.csv, "write N,trial,theta_c,theta_n,gap rows");
  th_cmd->add_option("--cross-term", th.cross_term, "Monte-Carlo draws for the CT cross-term probe (0: skip)");
  th_cmd->add_option("--grid", th.grid, "CT grid for the cross-term probe");
  th_cmd->add_option("--views", th.views, "CT views for the cross-term probe");

  GradArgs gr;
  auto* gr_cmd = app.add_subcommand("gradcheck", "finite-difference check of the U-Net gradient");
  gr_cmd->add_option("--depth", gr.depth);
  gr_cmd->add_option("--base", gr.base);
  gr_cmd->add_option("--size", gr.size, "input height and width");
  gr_cmd->add_option("--coords", gr.coords, "coordinates per input (0: all)");
  gr_cmd->add_option("--seed", gr.seed);
  gr_cmd->add_option("--tolerance", gr.tolerance);

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "train all three methods, evaluate and write the report");
  add_config_options(rep_cmd, rep.config);
  rep_cmd->add_option("--corpus", rep.corpus, "corpus directory (simulated from the config if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (app.got_subcommand("simulate-ct")) return run_simulate(sim_ct, Modality::kCt);
    if (app.got_subcommand("simulate-mr")) return run_simulate(sim_mr, Modality::kMr);
    if (app.got_subcommand("train")) return run_train(train_args);
    if (app.got_subcommand("denoise")) return run_denoise(den);
    if (app.got_subcommand("evaluate")) return run_evaluate(ev);
    if (app.got_subcommand("verify-theorem")) return run_verify_theorem(th);
    if (app.got_subcommand("gradcheck")) return run_gradcheck(gr);
    if (app.got_subcommand("report")) return run_report(rep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
