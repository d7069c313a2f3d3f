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

#include <cmath>
#include <fstream>
#include <limits>

#include "consensus/autodiff/grad_check.hpp"
#include "consensus/autodiff/ops.hpp"
#include "consensus/losses/losses.hpp"
#include "consensus/model/adam.hpp"
#include "consensus/model/unet.hpp"
#include "consensus/numerics/error.hpp"
#include "consensus/numerics/grid.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace consensus;

namespace {

std::size_t conv_params(std::size_t cin, std::size_t cout, std::size_t k) { return cout * cin * k * k + cout; }

ModelParams random_net(const UNetConfig& cfg, std::uint64_t seed) {
  ModelParams p = build_unet(cfg);
  Rng rng(seed);
  init_he(p, rng);
  return p;
}

}  // namespace

TEST_CASE("depth 1 network keeps the input shape") {
  UNetConfig cfg;
  cfg.depth = 1;
  cfg.base_features = 4;
  const auto p = random_net(cfg, 1);
  const auto y = infer(p, {1, 1, 16, 16}, testing::random_values(256, 2));
  CHECK(y.size() == 256);
}

TEST_CASE("zero parameters give the identity exactly") {
  for (std::size_t channels : {1u, 2u}) {
    UNetConfig cfg;
    cfg.in_channels = channels;
    const auto p = build_unet(cfg);
    const auto x = testing::random_values(2 * channels * 16 * 16, 3);
    CHECK(infer(p, {2, channels, 16, 16}, x) == x);
  }
}

TEST_CASE("parameter count for depth 2, base 8 matches a hand count") {
  UNetConfig cfg;
  cfg.depth = 2;
  cfg.base_features = 8;
  // enc0: 1->8, 8->8; enc1: 8->16, 16->16; dec0: (16+8)->8, 8->8; head 8->1 (1x1)
  const std::size_t hand = 80 + 584 + 1168 + 2320 + 1736 + 584 + 9;
  const std::size_t formula = conv_params(1, 8, 3) + conv_params(8, 8, 3) + conv_params(8, 16, 3) +
                              conv_params(16, 16, 3) + conv_params(24, 8, 3) + conv_params(8, 8, 3) +
                              conv_params(8, 1, 1);
  CHECK(hand == 6481);
  CHECK(formula == hand);
  CHECK(build_unet(cfg).size() == hand);
}

TEST_CASE("layout tiles theta without gaps or overlaps") {
  for (std::size_t depth : {1u, 2u, 3u, 4u}) {
    UNetConfig cfg;
    cfg.depth = depth;
    cfg.in_channels = 2;
    const auto p = build_unet(cfg);
    std::size_t next = 0;
    for (const auto& slot : p.layout) {
      CHECK(slot.offset == next);
      next += slot.size();
    }
    CHECK(next == p.size());
  }
}

TEST_CASE("build_unet rejects invalid architectures and forward rejects bad inputs") {
  UNetConfig cfg;
  cfg.depth = 0;
  CHECK_THROWS_AS(build_unet(cfg), std::invalid_argument);
  cfg.depth = 2;
  cfg.kernel = 4;
  CHECK_THROWS_AS(build_unet(cfg), std::invalid_argument);
  cfg.kernel = 3;
  const auto p = build_unet(cfg);
  CHECK_THROWS_AS(infer(p, {1, 1, 18, 16}, std::vector<double>(18 * 16)), std::invalid_argument);
  CHECK_THROWS_AS(infer(p, {1, 2, 16, 16}, std::vector<double>(512)), std::invalid_argument);
}

TEST_CASE("He initialization: zero biases, variance and determinism") {
  const auto p = random_net(UNetConfig{}, 7);
  CHECK(random_net(UNetConfig{}, 7).theta == p.theta);
  CHECK(random_net(UNetConfig{}, 8).theta != p.theta);
  const LayerSlot* big = nullptr;
  for (const auto& slot : p.layout) {
    if (slot.fan_in == 0) {
      for (std::size_t i = 0; i < slot.size(); ++i) CHECK(p.theta[slot.offset + i] == 0.0);
    } else if (slot.size() >= 10000 && !big) {
      big = &slot;
    }
  }
  REQUIRE(big != nullptr);
  double s2 = 0.0;
  for (std::size_t i = 0; i < big->size(); ++i) s2 += p.theta[big->offset + i] * p.theta[big->offset + i];
  const double var = s2 / static_cast<double>(big->size());
  CHECK(std::fabs(var - 2.0 / static_cast<double>(big->fan_in)) < 0.1 * 2.0 / static_cast<double>(big->fan_in));
}

TEST_CASE("forward is finite on inputs in [-1, 1], with either pooling mode") {
  for (auto mode : {ad::PoolMode::kAverage, ad::PoolMode::kMax}) {
    UNetConfig cfg;
    cfg.pool = mode;
    const auto p = random_net(cfg, 9);
    const auto y = infer(p, {2, 1, 32, 32}, testing::random_values(2048, 10));
    CHECK(all_finite(y));
  }
}

TEST_CASE("network gradient matches finite differences at 16x16") {
  UNetConfig cfg;
  cfg.depth = 2;
  cfg.base_features = 4;
  const auto p = random_net(cfg, 11);
  std::vector<ad::GradInput> point;
  for (const auto& slot : p.layout) {
    std::vector<double> v(p.theta.begin() + static_cast<std::ptrdiff_t>(slot.offset),
                          p.theta.begin() + static_cast<std::ptrdiff_t>(slot.offset + slot.size()));
    if (slot.fan_in == 0) v = testing::random_values(slot.size(), 12 + slot.offset, -0.1, 0.1);
    point.push_back({slot.shape, std::move(v)});
  }
  point.push_back({{1, 1, 16, 16}, testing::random_values(256, 13)});
  const auto target = testing::random_values(256, 14);
  ad::GradCheckOptions opt;
  opt.max_coords_per_input = 24;
  const auto report = ad::grad_check(
      [&](ad::Tape& t, std::span<const ad::Var> in) {
        BoundParams bound{{in.begin(), in.end() - 1}};
        const ad::Var y = forward(p, bound, in.back());
        return loss_noise2clean(y, t.constant({1, 1, 16, 16}, target));
      },
      point, opt);
  INFO("max rel error " << report.max_rel_error);
  CHECK(report.passed);
}

TEST_CASE("bound gradients gather back into theta order") {
  UNetConfig cfg;
  cfg.depth = 2;
  cfg.base_features = 4;
  const auto p = random_net(cfg, 15);
  ad::Tape tape;
  const auto bound = bind(tape, p);
  tape.backward(loss_weight_decay(bound.slots, {}));
  const auto g = gather_grad(bound, p.size());
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(g[i] == 2.0 * p.theta[i]);
}

TEST_CASE("adam first step equals the bias-corrected closed form") {
  for (double g : {0.3, -2.5, 1e-3}) {
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_features = 1;
    ModelParams p = build_unet(cfg);
    p.theta.assign(p.size(), 0.5);
    AdamState s = AdamState::zeros(p.size(), 0.1);
    std::vector<double> grads(p.size(), g);
    adam_step(p, grads, s);
    // m = (1-b1) g, v = (1-b2) g^2; m/(1-b1) = g, v/(1-b2) = g^2.
    const double expected = 0.5 - 0.1 * g / (std::fabs(g) + 1e-8);
    for (double v : p.theta) CHECK(std::fabs(v - expected) <= 1e-12);
    CHECK(s.step == 1);
  }
}

TEST_CASE("adam leaves parameters unchanged for a zero gradient and is deterministic") {
  ModelParams p = random_net(UNetConfig{}, 16);
  const auto before = p.theta;
  AdamState s = AdamState::zeros(p.size(), 1e-3);
  adam_step(p, std::vector<double>(p.size(), 0.0), s);
  CHECK(p.theta == before);

  auto run = [&]() {
    ModelParams q = random_net(UNetConfig{}, 16);
    AdamState st = AdamState::zeros(q.size(), 1e-3);
    Rng rng(17);
    for (int i = 0; i < 100; ++i) adam_step(q, gaussian(rng, q.size(), 1.0), st);
    return q.theta;
  };
  CHECK(run() == run());
}

TEST_CASE("adam rejects non-finite gradients and names the layer") {
  ModelParams p = random_net(UNetConfig{}, 18);
  AdamState s = AdamState::zeros(p.size(), 1e-3);
  std::vector<double> g(p.size(), 0.1);
  const auto& slot = p.layout[3];
  g[slot.offset + 1] = std::numeric_limits<double>::infinity();
  const auto before = p.theta;
  try {
    adam_step(p, g, s);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find(slot.name) != std::string::npos);
  }
  CHECK(p.theta == before);
  CHECK(s.step == 0);
  CHECK_THROWS_AS(adam_step(p, std::vector<double>(3, 0.0), s), std::invalid_argument);
}

TEST_CASE("noise2clean loss on one batch decreases over 50 Adam steps") {
  UNetConfig cfg;
  ModelParams p = random_net(cfg, 19);
  AdamState s = AdamState::zeros(p.size(), 1e-4);
  const auto clean = testing::random_values(4 * 32 * 32, 20, -0.5, 0.5);
  auto noisy = clean;
  Rng rng(21);
  for (auto& v : noisy) v += 0.2 * rng.normal();
  auto step = [&]() {
    ad::Tape tape;
    const auto bound = bind(tape, p);
    const auto y = forward(p, bound, tape.constant({4, 1, 32, 32}, noisy));
    const auto loss = loss_noise2clean(y, tape.constant({4, 1, 32, 32}, clean));
    tape.backward(loss);
    adam_step(p, gather_grad(bound, p.size()), s);
    return loss.item();
  };
  const double first = step();
  double last = first;
  for (int i = 0; i < 49; ++i) last = step();
  CHECK(last < first);
}

TEST_CASE("parameters round trip through CNDT plus header and reject mismatches") {
  const auto dir = testing::scratch_dir("params");
  UNetConfig cfg;
  cfg.in_channels = 2;
  cfg.pool = ad::PoolMode::kMax;
  const auto p = random_net(cfg, 22);
  save_params(dir / "net", p);
  const auto q = load_params(dir / "net");
  CHECK(q.theta == p.theta);
  CHECK(q.config == p.config);
  CHECK(q.layout.size() == p.layout.size());

  std::ifstream in(dir / "net.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const auto pos = text.find("base_features=16");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 16, "base_features=8");
  std::ofstream(dir / "net.txt") << text;
  CHECK_THROWS_AS(load_params(dir / "net"), IoError);
  CHECK_THROWS_AS(load_params(dir / "missing"), IoError);
}
