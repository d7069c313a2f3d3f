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

#include <benchmark/benchmark.h>

#include "consensus/autodiff/ops.hpp"
#include "consensus/ct_sim/ct_pipeline.hpp"
#include "consensus/ct_sim/phantom.hpp"
#include "consensus/ct_sim/projector.hpp"
#include "consensus/losses/losses.hpp"
#include "consensus/model/unet.hpp"
#include "consensus/numerics/fft.hpp"

using namespace consensus;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return gaussian(rng, n, 1.0);
}

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const std::size_t c = static_cast<std::size_t>(state.range(0));
  const std::size_t hw = static_cast<std::size_t>(state.range(1));
  const auto x = noise(8 * c * hw * hw, 1);
  const auto w = noise(c * c * 9, 2);
  const auto b = noise(c, 3);
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Var vx = tape.constant({8, c, hw, hw}, x);
    const ad::Var vw = tape.parameter({c, c, 3, 3}, w);
    const ad::Var vb = tape.parameter({c}, b);
    const ad::Var y = ad::sq_norm(ad::conv2d(vx, vw, vb));
    tape.backward(y);
    benchmark::DoNotOptimize(vw.grad().data());
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_Conv2dForwardBackward)->Args({16, 32})->Args({32, 16})->Args({64, 8})->Unit(benchmark::kMillisecond);

void BM_UnetInfer(benchmark::State& state) {
  UNetConfig cfg;
  cfg.depth = 3;
  cfg.base_features = 16;
  ModelParams net = build_unet(cfg);
  Rng rng(4);
  init_he(net, rng);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n * n, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(infer(net, {1, 1, n, n}, x));
  }
}
BENCHMARK(BM_UnetInfer)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Fft2(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  ComplexGrid2D g(n, n);
  const auto v = noise(n * n, 6);
  for (std::size_t i = 0; i < n * n; ++i) g.data[i] = v[i];
  for (auto _ : state) {
    benchmark::DoNotOptimize(ifft2(fft2(g)).data.data());
  }
}
BENCHMARK(BM_Fft2)->Arg(128)->Arg(256);

void BM_Radon(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Grid2D img = rasterize(shepp_logan(), n, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(radon(img, 2 * n, default_detector_count(n)).data.data());
  }
}
BENCHMARK(BM_Radon)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_FbpHann(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Sinogram s = radon(rasterize(shepp_logan(), n, n), 2 * n, default_detector_count(n));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fbp_hann(s, n).data.data());
  }
}
BENCHMARK(BM_FbpHann)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ConsensusLoss(benchmark::State& state) {
  const std::size_t n = 8 * 32 * 32;
  const auto y1 = noise(n, 7), y2 = noise(n, 8), r1 = noise(n, 9), r2 = noise(n, 10);
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Shape s{8, 1, 32, 32};
    const ad::Var l = loss_consensus(tape.parameter(s, y1), tape.parameter(s, y2), tape.constant(s, r1),
                                     tape.constant(s, r2));
    tape.backward(l);
    benchmark::DoNotOptimize(l.value().data());
  }
}
BENCHMARK(BM_ConsensusLoss);

}  // namespace

BENCHMARK_MAIN();
