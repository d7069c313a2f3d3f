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
#include <vector>

#include "consensus/evalcli/config.hpp"
#include "consensus/losses/split_pair.hpp"

namespace consensus {

struct Corpus {
  Modality modality = Modality::kCt;
  std::vector<SplitPair> train;
  std::vector<SplitPair> test;
};

/// Simulates slices_train + slices_test independent phantoms. Slice i draws
/// from Rng(seed).fork(i), so any slice can be regenerated on its own.
Corpus simulate_corpus(const ExperimentConfig& config);
SplitPair simulate_slice(const ExperimentConfig& config, std::size_t index);

/// Layout: manifest.txt plus {train,test}/NNNN_{r1,r2,est,clean}.cndt and
/// NNNN.txt with per-slice metadata. CT slices are stored as real f64 grids,
/// MR slices as complex f64 grids.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus, const ExperimentConfig& config);
Corpus read_corpus(const std::filesystem::path& dir);

}  // namespace consensus
