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

#include "consensus/evalcli/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "consensus/ct_sim/ct_pipeline.hpp"
#include "consensus/ct_sim/phantom.hpp"
#include "consensus/mr_sim/mr_pipeline.hpp"
#include "consensus/numerics/error.hpp"
#include "consensus/numerics/tensor_io.hpp"

namespace consensus {
namespace {

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void write_key_values(const std::filesystem::path& path, const std::map<std::string, std::string>& kv) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string slice_stem(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return buf;
}

void save_image(const std::filesystem::path& path, const Image& img, Modality modality) {
  if (modality == Modality::kCt) {
    save_grid(path, img.channel(0));
  } else {
    save_complex_grid(path, img.to_complex());
  }
}

Image load_image(const std::filesystem::path& path, Modality modality, Unit unit) {
  if (modality == Modality::kCt) return Image::from_grid(load_grid(path, unit));
  return Image::from_complex(load_complex_grid(path), unit);
}

void write_split(const std::filesystem::path& dir, const std::vector<SplitPair>& pairs, Modality modality) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const SplitPair& p = pairs[i];
    const std::string stem = slice_stem(i);
    save_image(dir / (stem + "_r1.cndt"), p.r1, modality);
    save_image(dir / (stem + "_r2.cndt"), p.r2, modality);
    save_image(dir / (stem + "_est.cndt"), p.est, modality);
    if (p.clean) save_image(dir / (stem + "_clean.cndt"), *p.clean, modality);
    write_key_values(dir / (stem + ".txt"), p.meta);
  }
}

std::vector<SplitPair> read_split(const std::filesystem::path& dir, std::size_t count, Modality modality, Unit unit) {
  std::vector<SplitPair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string stem = slice_stem(i);
    SplitPair p;
    p.modality = modality;
    p.r1 = load_image(dir / (stem + "_r1.cndt"), modality, unit);
    p.r2 = load_image(dir / (stem + "_r2.cndt"), modality, unit);
    p.est = load_image(dir / (stem + "_est.cndt"), modality, unit);
    const auto clean_path = dir / (stem + "_clean.cndt");
    if (std::filesystem::exists(clean_path)) p.clean = load_image(clean_path, modality, unit);
    p.meta = read_key_values(dir / (stem + ".txt"));
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw IoError("corpus slice " + (dir / stem).string() + ": " + e.what());
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace

SplitPair simulate_slice(const ExperimentConfig& config, std::size_t index) {
  Rng rng = Rng(config.seed()).fork(index);
  SplitPair pair;
  if (config.modality() == Modality::kCt) {
    const CtConfig ct = ct_config(config);
    const CtAcquisition acq(random_abdomen_phantom(rng), ct);
    pair = acq.draw(rng);
  } else {
    const MrConfig mr = mr_config(config);
    const Phantom magnitude = random_knee_phantom(rng);
    const PhaseField phase = PhaseField::random(rng);
    const MrAcquisition acq(magnitude, phase, mr);
    pair = acq.draw(rng);
  }
  pair.meta["slice"] = std::to_string(index);
  return pair;
}

Corpus simulate_corpus(const ExperimentConfig& config) {
  Corpus corpus;
  corpus.modality = config.modality();
  const std::size_t n_train = config.slices_train();
  const std::size_t n_test = config.slices_test();
  corpus.train.reserve(n_train);
  corpus.test.reserve(n_test);
  for (std::size_t i = 0; i < n_train; ++i) corpus.train.push_back(simulate_slice(config, i));
  for (std::size_t i = 0; i < n_test; ++i) corpus.test.push_back(simulate_slice(config, n_train + i));
  return corpus;
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus, const ExperimentConfig& config) {
  write_split(dir / "train", corpus.train, corpus.modality);
  write_split(dir / "test", corpus.test, corpus.modality);
  std::map<std::string, std::string> manifest = config.values();
  manifest.erase("out_dir");
  manifest["modality"] = std::string(to_string(corpus.modality));
  manifest["count_train"] = std::to_string(corpus.train.size());
  manifest["count_test"] = std::to_string(corpus.test.size());
  const Image* any = !corpus.train.empty() ? &corpus.train.front().r1
                                           : (!corpus.test.empty() ? &corpus.test.front().r1 : nullptr);
  manifest["unit"] = std::string(to_string(any ? any->unit : Unit::kDimensionless));
  if (corpus.modality == Modality::kCt) {
    const CtConfig ct = ct_config(config);
    manifest["views"] = std::to_string(ct.views);
    manifest["detectors"] = std::to_string(ct.detector_count());
    manifest["i0"] = config.get_string("i0", "100000");
    manifest["dose"] = config.get_string("dose", "0.25");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  write_key_values(dir / "manifest.txt", manifest);
}

Corpus read_corpus(const std::filesystem::path& dir) {
  const auto manifest = read_key_values(dir / "manifest.txt");
  auto get = [&](const std::string& key) {
    const auto it = manifest.find(key);
    if (it == manifest.end()) throw IoError("corpus manifest lacks '" + key + "'");
    return it->second;
  };
  Corpus corpus;
  Unit unit;
  try {
    corpus.modality = modality_from_string(get("modality"));
    unit = unit_from_string(get("unit"));
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("corpus manifest: ") + e.what());
  }
  corpus.train = read_split(dir / "train", std::stoul(get("count_train")), corpus.modality, unit);
  corpus.test = read_split(dir / "test", std::stoul(get("count_test")), corpus.modality, unit);
  return corpus;
}

}  // namespace consensus
