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

#include "consensus/autodiff/grad_check.hpp"
#include "consensus/autodiff/ops.hpp"
#include "consensus/autodiff/tape.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace consensus;
using namespace consensus::ad;

namespace {

// Keeps values away from the ReLU kink and pooling ties.
std::vector<double> away_from_zero(std::size_t n, std::uint64_t seed) {
  auto v = testing::random_values(n, seed, 0.1, 1.0);
  Rng sign(seed + 1);
  for (auto& x : v) x *= sign.uniform() < 0.5 ? -1.0 : 1.0;
  return v;
}

// Weighted sum so every output coordinate gets a distinct upstream gradient.
Var weighted_sum(Tape& tape, const Var& y, std::uint64_t seed) {
  const Var w = tape.constant(y.shape(), testing::random_values(y.size(), seed));
  return sq_norm(y + w);
}

void require_pass(const GraphBuilder& f, const std::vector<GradInput>& point, double tol = 1e-5) {
  GradCheckOptions opt;
  opt.tolerance = tol;
  const auto report = grad_check(f, point, opt);
  INFO("max rel error " << report.max_rel_error << " at input " << report.worst_input << " index "
                        << report.worst_index);
  CHECK(report.passed);
  CHECK(report.max_rel_error < tol);
}

}  // namespace

TEST_CASE("conv2d with an identity kernel reproduces the input") {
  Tape tape;
  const auto xv = testing::random_values(2 * 3 * 5 * 4, 1);
  const Var x = tape.constant({2, 3, 5, 4}, xv);
  std::vector<double> w(3 * 3 * 9, 0.0);
  for (std::size_t c = 0; c < 3; ++c) w[(c * 3 + c) * 9 + 4] = 1.0;
  const Var y = conv2d(x, tape.constant({3, 3, 3, 3}, w), tape.constant({3}, {0, 0, 0}));
  CHECK(y.shape() == Shape{2, 3, 5, 4});
  for (std::size_t i = 0; i < xv.size(); ++i) CHECK(y.value()[i] == xv[i]);
}

TEST_CASE("conv2d of ones with a ones kernel gives 9 Cin inside and fewer at borders") {
  Tape tape;
  const std::size_t cin = 4;
  const Var x = tape.constant({1, cin, 6, 6}, std::vector<double>(cin * 36, 1.0));
  const Var y = conv2d(x, tape.constant({2, cin, 3, 3}, std::vector<double>(2 * cin * 9, 1.0)),
                       tape.constant({2}, {0.0, 0.5}));
  CHECK(y.value()[2 * 6 + 3] == doctest::Approx(9.0 * cin));
  CHECK(y.value()[0] == doctest::Approx(4.0 * cin));
  CHECK(y.value()[5] == doctest::Approx(4.0 * cin));
  CHECK(y.value()[36 + 2 * 6 + 3] == doctest::Approx(9.0 * cin + 0.5));
}

TEST_CASE("conv2d rejects bad shapes") {
  Tape tape;
  const Var x = tape.constant({1, 2, 4, 4}, std::vector<double>(32));
  CHECK_THROWS_AS(conv2d(x, tape.constant({1, 3, 3, 3}, std::vector<double>(27)), tape.constant({1}, {0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(conv2d(x, tape.constant({1, 2, 2, 2}, std::vector<double>(8)), tape.constant({1}, {0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(conv2d(x, tape.constant({1, 2, 3, 3}, std::vector<double>(18)), tape.constant({2}, {0.0, 0.0})),
                  std::invalid_argument);
  Tape other;
  CHECK_THROWS_AS(conv2d(x, other.constant({1, 2, 3, 3}, std::vector<double>(18)), tape.constant({1}, {0.0})),
                  std::invalid_argument);
}

TEST_CASE("conv2d gradients for 1x1, 3x3 and 5x5 kernels") {
  for (std::size_t k : {1u, 3u, 5u}) {
    CAPTURE(k);
    require_pass(
        [](Tape& t, std::span<const Var> in) { return weighted_sum(t, conv2d(in[0], in[1], in[2]), 3); },
        {{{2, 3, 6, 5}, testing::random_values(180, 10 + k)},
         {{4, 3, k, k}, testing::random_values(12 * k * k, 20 + k)},
         {{4}, testing::random_values(4, 30 + k)}});
  }
}

TEST_CASE("relu values, subgradient at zero and gradient check") {
  Tape tape;
  const Var x = tape.parameter({3}, {-1.0, 0.0, 2.0});
  const Var y = relu(x);
  CHECK(std::vector<double>(y.value().begin(), y.value().end()) == std::vector<double>{0.0, 0.0, 2.0});
  const Var s = sq_norm(y + tape.constant({3}, {1.0, 1.0, 1.0}));
  tape.backward(s);
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);
  CHECK(x.grad()[2] == 6.0);
  require_pass([](Tape& t, std::span<const Var> in) { return weighted_sum(t, relu(in[0]), 4); },
               {{{2, 2, 4, 4}, away_from_zero(64, 5)}}, 1e-6);
}

TEST_CASE("downsample2 averages blocks and rejects odd sizes") {
  Tape tape;
  const Var y = downsample2(tape.constant({1, 1, 2, 2}, {1, 2, 3, 4}));
  CHECK(y.value()[0] == 2.5);
  const Var c = downsample2(tape.constant({1, 2, 4, 4}, std::vector<double>(32, 3.25)));
  for (double v : c.value()) CHECK(v == 3.25);
  CHECK_THROWS_AS(downsample2(tape.constant({1, 1, 3, 4}, std::vector<double>(12))), std::invalid_argument);
  require_pass([](Tape& t, std::span<const Var> in) { return weighted_sum(t, downsample2(in[0]), 6); },
               {{{2, 3, 4, 6}, testing::random_values(144, 7)}});
}

TEST_CASE("max_pool2 selects block maxima") {
  Tape tape;
  const Var y = max_pool2(tape.constant({1, 1, 2, 4}, {1, 5, 2, 0, 3, 4, 8, 7}));
  CHECK(y.value()[0] == 5.0);
  CHECK(y.value()[1] == 8.0);
  CHECK(pool2(tape.constant({1, 1, 2, 2}, {1, 2, 3, 4}), PoolMode::kAverage).value()[0] == 2.5);
  require_pass([](Tape& t, std::span<const Var> in) { return weighted_sum(t, max_pool2(in[0]), 8); },
               {{{1, 2, 4, 4}, testing::random_values(32, 9)}});
}

TEST_CASE("upsample2 replicates and is undone by downsample2") {
  Tape tape;
  const Var y = upsample2(tape.constant({1, 1, 1, 1}, {7.0}));
  CHECK(y.shape() == Shape{1, 1, 2, 2});
  for (double v : y.value()) CHECK(v == 7.0);
  const auto xv = testing::random_values(2 * 3 * 3 * 5, 12);
  const Var x = tape.constant({2, 3, 3, 5}, xv);
  const Var back = downsample2(upsample2(x));
  for (std::size_t i = 0; i < xv.size(); ++i) CHECK(back.value()[i] == xv[i]);
  require_pass([](Tape& t, std::span<const Var> in) { return weighted_sum(t, upsample2(in[0]), 13); },
               {{{1, 2, 3, 3}, testing::random_values(18, 14)}});
}

TEST_CASE("concat_channels shapes, slots and gradient split") {
  Tape tape;
  const auto av = testing::random_values(32, 15);
  const auto bv = testing::random_values(48, 16);
  const Var y = concat_channels(tape.constant({1, 2, 4, 4}, av), tape.constant({1, 3, 4, 4}, bv));
  CHECK(y.shape() == Shape{1, 5, 4, 4});
  for (std::size_t i = 0; i < 32; ++i) CHECK(y.value()[i] == av[i]);
  for (std::size_t i = 0; i < 48; ++i) CHECK(y.value()[32 + i] == bv[i]);
  CHECK_THROWS_AS(concat_channels(tape.constant({1, 1, 4, 4}, std::vector<double>(16)),
                                  tape.constant({1, 1, 2, 4}, std::vector<double>(8))),
                  std::invalid_argument);
  require_pass(
      [](Tape& t, std::span<const Var> in) { return weighted_sum(t, concat_channels(in[0], in[1]), 17); },
      {{{2, 2, 2, 2}, testing::random_values(16, 18)}, {{2, 1, 2, 2}, testing::random_values(8, 19)}});
}

TEST_CASE("sq_norm value and exact gradient") {
  Tape tape;
  const Var x = tape.parameter({2}, {3.0, 4.0});
  const Var s = sq_norm(x);
  CHECK(s.shape() == Shape{1});
  CHECK(s.item() == 25.0);
  tape.backward(s);
  CHECK(x.grad()[0] == 6.0);
  CHECK(x.grad()[1] == 8.0);
  CHECK(sq_norm(tape.constant({3}, {0, 0, 0})).item() == 0.0);
}

TEST_CASE("elementwise operators pass gradient checks") {
  const std::vector<GradInput> point{{{2, 3}, testing::random_values(6, 20)}, {{2, 3}, testing::random_values(6, 21)}};
  require_pass([](Tape& t, std::span<const Var> in) { return weighted_sum(t, in[0] + in[1], 22); }, point);
  require_pass([](Tape& t, std::span<const Var> in) { return weighted_sum(t, in[0] - in[1], 23); }, point);
  require_pass([](Tape& t, std::span<const Var> in) { return weighted_sum(t, mul(in[0], in[1]), 24); }, point);
  require_pass([](Tape& t, std::span<const Var> in) { return weighted_sum(t, -1.5 * in[0], 25); }, point);
}

TEST_CASE("backward: chain rule on scalars, accumulation and reset") {
  Tape tape;
  const double wv = 1.5, xv = -2.0;
  const Var w = tape.parameter({1}, {wv});
  const Var x = tape.constant({1}, {xv});
  const Var loss = sq_norm(mul(w, x));
  tape.backward(loss);
  CHECK(w.grad()[0] == 2.0 * wv * xv * xv);
  tape.backward(loss);
  CHECK(w.grad()[0] == 4.0 * wv * xv * xv);
  tape.zero_grad();
  tape.backward(loss);
  CHECK(w.grad()[0] == 2.0 * wv * xv * xv);
}

TEST_CASE("backward rejects non-scalar losses, foreign tapes and forward-only tapes") {
  Tape tape;
  const Var v = tape.parameter({2}, {1.0, 2.0});
  CHECK_THROWS_AS(tape.backward(v), std::invalid_argument);
  Tape other;
  const Var s = sq_norm(other.parameter({1}, {1.0}));
  CHECK_THROWS_AS(tape.backward(s), std::invalid_argument);
  Tape frozen(false);
  const Var f = sq_norm(frozen.parameter({1}, {2.0}));
  CHECK(f.item() == 4.0);
  CHECK_THROWS(frozen.backward(f));
}

TEST_CASE("backward scales linearly with the loss and is bitwise deterministic") {
  auto grads = [](double alpha) {
    Tape tape;
    const Var x = tape.parameter({1, 2, 4, 4}, testing::random_values(32, 30));
    const Var w = tape.parameter({3, 2, 3, 3}, testing::random_values(54, 31));
    const Var b = tape.parameter({3}, testing::random_values(3, 32));
    const Var loss = alpha * sq_norm(relu(conv2d(x, w, b)));
    tape.backward(loss);
    std::vector<double> g(w.grad().begin(), w.grad().end());
    g.insert(g.end(), x.grad().begin(), x.grad().end());
    return g;
  };
  const auto g1 = grads(1.0);
  CHECK(grads(1.0) == g1);
  for (double alpha : {2.0, 0.25}) {
    const auto ga = grads(alpha);
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(ga[i] == alpha * g1[i]);
  }
  const auto g3 = grads(3.0);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g3[i] == doctest::Approx(3.0 * g1[i]).epsilon(1e-14));
}

TEST_CASE("grad_check is exact to round-off on a linear function") {
  const auto report = grad_check(
      [](Tape& t, std::span<const Var> in) {
        const Var c = t.constant({4}, {1.0, -2.0, 0.5, 3.0});
        return sq_norm(in[0] + c) - sq_norm(in[0]);  // 2 c.x + const
      },
      {{{4}, testing::random_values(4, 40)}});
  CHECK(report.max_rel_error < 1e-9);
  CHECK(report.coords_checked == 4);
}

TEST_CASE("grad_check error on a cubic shrinks quadratically with the step") {
  // f(x) = sum x^3 via x * x^2; central differences carry h^2 f'''/6 = h^2 error.
  auto error_at = [](double h) {
    GradCheckOptions opt;
    opt.h_scale = h;
    return grad_check(
               [](Tape& t, std::span<const Var> in) {
                 const Var ones = t.constant({1}, {1.0});
                 const Var cube = mul(in[0], mul(in[0], in[0]));
                 return sq_norm(cube + ones) - sq_norm(cube);  // 2 x^3 + 1
               },
               {{{1}, {0.7}}}, opt)
        .max_rel_error;
  };
  const double e1 = error_at(1e-2);
  const double e2 = error_at(5e-3);
  // analytic error 2 * h^2: 2e-4 and 5e-5
  CHECK(e1 == doctest::Approx(2e-4).epsilon(1e-3));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("grad_check reports failures for a wrong gradient") {
  const auto report = grad_check(
      [](Tape& t, std::span<const Var> in) {
        const Var v = in[0];
        // Forward value x^2 but the recorded backward pretends d/dx = x.
        const std::size_t id = v.id();
        const Var y = t.record({1}, {v.value()[0] * v.value()[0]}, {id}, [id](Tape& tp, std::size_t self) {
          tp.grad_buffer(id)[0] += tp.grad(self)[0] * tp.value(id)[0];
        });
        return y;
      },
      {{{1}, {2.0}}});
  CHECK_FALSE(report.passed);
  CHECK(report.analytic_at_worst == doctest::Approx(2.0));
  CHECK(report.numeric_at_worst == doctest::Approx(4.0).epsilon(1e-6));
}
