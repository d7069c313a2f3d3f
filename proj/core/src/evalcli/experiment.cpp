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

#include "consensus/evalcli/experiment.hpp"

#include <fstream>

#include "consensus/numerics/error.hpp"

namespace consensus {
namespace {

TrainResult run_method(const TrainConfig& cfg, const Corpus& corpus, const ExperimentProgress& progress) {
  const std::string_view name = to_string(cfg.objective);
  return train(cfg, corpus.train, corpus.test, std::nullopt, [&](const TrainState&, const EpochStats& stats) {
    if (progress) progress(name, stats);
  });
}

void write_log(const std::filesystem::path& path, const std::vector<EpochStats>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_training_log(out, log);
}

}  // namespace

TrainConfig baseline_config(const TrainConfig& consensus, Objective objective) {
  TrainConfig cfg = consensus;
  cfg.objective = objective;
  cfg.beta_w = 0.0;
  cfg.beta_r = 0.0;
  return cfg;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const Corpus& corpus,
                                 const std::optional<std::filesystem::path>& out_dir,
                                 const ExperimentProgress& progress) {
  if (corpus.train.empty() || corpus.test.empty()) throw ConfigError("experiment needs training and test slices");
  TrainConfig cfg = train_config(config);
  cfg.objective = Objective::kConsensus;

  ExperimentOutcome outcome;
  outcome.noise2noise = run_method(baseline_config(cfg, Objective::kNoise2Noise), corpus, progress);
  outcome.consensus = run_method(cfg, corpus, progress);
  outcome.noise2clean = run_method(baseline_config(cfg, Objective::kNoise2Clean), corpus, progress);

  EvaluationModels models;
  models.noise2noise = &outcome.noise2noise.state;
  models.consensus = &outcome.consensus.state;
  models.noise2clean = &outcome.noise2clean.state;
  outcome.rows = evaluate(models, corpus.test);

  if (out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir->string() + "': " + ec.message());
    for (const TrainResult* r : {&outcome.noise2noise, &outcome.consensus, &outcome.noise2clean}) {
      const std::string name(to_string(r->state.objective));
      write_log(*out_dir / ("train_" + name + ".csv"), r->log);
      save_checkpoint(*out_dir / ("checkpoint_" + name), r->state);
    }
    const SplitPair& first = corpus.test.front();
    std::vector<Preview> previews;
    previews.push_back({"reference", *first.clean});
    previews.push_back({"input", first.est});
    previews.push_back({"noise2noise", denoise(outcome.noise2noise.state, first)});
    previews.push_back({"consensus", denoise(outcome.consensus.state, first)});
    previews.push_back({"noise2clean", denoise(outcome.noise2clean.state, first)});
    report(*out_dir, outcome.rows, corpus.modality, previews);
  }
  return outcome;
}

}  // namespace consensus
